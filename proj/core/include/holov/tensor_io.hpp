// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <utility>

#include "holov/types.hpp"

namespace holov {

/// One manifest entry of the tensor container (format "HTC1", grammar in
/// docs/formats.md): name, shape, byte range into the payload, CRC-32.
struct TensorEntry {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;  // bytes into the payload
    std::size_t length = 0;  // bytes
    std::uint32_t crc32 = 0;
};

/// Grid metadata carried per token-set group.
struct GroupMeta {
    std::string group;
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    bool normalized = false;
};

struct TensorContainer {
    std::vector<GroupMeta> groups;
    std::vector<TensorEntry> entries;
    std::vector<std::byte> payload;  // little-endian f32, row-major
};

using NamedTokenSet = std::pair<std::string, TokenSet>;

/// Serializes token sets (group names must be non-empty, without spaces or
/// dots). Deterministic bytes: groups sorted by name, embeddings before
/// attention, payload packed in manifest order.
std::vector<std::byte> encode_token_sets(const std::vector<NamedTokenSet>& sets);

/// Parses and checks a container: manifest grammar, offsets, CRC-32 per
/// tensor, required tensors per group, grid consistency. Errors name the
/// offending tensor.
std::vector<NamedTokenSet> decode_token_sets(std::span<const std::byte> bytes);

/// encode + atomic write (temp file then rename).
void save_token_sets(const std::filesystem::path& path, const std::vector<NamedTokenSet>& sets);

/// Reads, decodes, and validates every TokenSet in the file.
std::vector<NamedTokenSet> load_tensors(const std::filesystem::path& path);

/// Whole-file helpers shared by the mask and pixmap writers.
std::vector<std::byte> read_file(const std::filesystem::path& path);
void atomic_write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace holov
