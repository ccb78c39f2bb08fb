// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "holov/types.hpp"

namespace holov {

/// Uniform sample of retain_count token indices without replacement,
/// reproducible from the seed via SplitMix64 + partial Fisher-Yates
/// (see docs/formats.md). Sorted output.
std::vector<std::size_t> random_prune(const TokenSet& ts, std::size_t retain_count,
                                      std::uint64_t seed);

/// Global top-k by attention, ties -> lower index. No crop structure.
std::vector<std::size_t> attention_topk_prune(const TokenSet& ts, std::size_t retain_count);

}  // namespace holov
