// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "holov/types.hpp"

namespace holov {

/// Checks every TokenSet invariant and reports all violations (never throws).
ValidationReport validate_token_set(const TokenSet& ts);

/// Returns a copy with unit-L2 rows and the normalized flag set.
/// Throws "degenerate token embedding" on an all-zero row.
TokenSet normalize_rows(const TokenSet& ts);

/// Default crop count: round(1024 / retain_count) half-up, clamped to [1, n_tokens].
std::size_t default_crop_count(std::size_t retain_count, std::size_t n_tokens);

/// Partitions the token set into crops.
///
/// grid_tiles factors C = r*s (r row bands, s column bands) minimizing |r-s|
/// over pairs feasible for the grid, remainders going to the leading bands;
/// falls back to row_major_blocks when C has no feasible factorization.
/// row_major_blocks splits token order into C contiguous blocks whose sizes
/// differ by at most one.
CropPartition make_partition(const TokenSet& ts, const PruneConfig& cfg);

/// Token indices per crop, ascending within each crop.
std::vector<std::vector<std::size_t>> crop_members(const CropPartition& part);

}  // namespace holov
