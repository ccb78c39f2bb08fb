// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "holov/types.hpp"

namespace holov {

/// One image's pruning outcome (format "HMASK1", grammar in
/// docs/formats.md). An empty retained list is accepted on load for
/// render-only use, though prune never produces one.
struct MaskRecord {
    std::string image_id;
    std::size_t n_v = 0;
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    std::size_t retain_count = 0;
    std::vector<std::size_t> retained;  // sorted, unique, in [0, n_v)
    std::string method;                 // holov | random | attn-topk
    std::string config_digest;          // 8 hex chars, CRC-32 of the canonical config string

    bool operator==(const MaskRecord&) const = default;
};

struct MaskFile {
    std::vector<MaskRecord> records;

    bool operator==(const MaskFile&) const = default;
};

std::string encode_mask_file(const MaskFile& mf);
MaskFile decode_mask_file(std::string_view text);

void save_mask_file(const std::filesystem::path& path, const MaskFile& mf);
MaskFile load_mask_file(const std::filesystem::path& path);

/// Binary PGM (P5): retained tokens white (255), pruned black (0), one
/// pixel per grid cell. grid_h * grid_w must equal the record's n_v.
std::vector<std::byte> render_mask_pgm(const MaskRecord& rec, std::size_t grid_h,
                                       std::size_t grid_w);

/// CRC-32 of the canonical config string (docs/formats.md), 8 lowercase
/// hex chars.
std::string config_digest(std::string_view canonical_config);

}  // namespace holov
