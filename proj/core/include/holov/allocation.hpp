// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "holov/types.hpp"

namespace holov {

/// Crop weights w_c = (mean holistic score of crop c)^tau, normalized to
/// sum 1. Negative crop means clamp to zero before exponentiation; all-zero
/// means fall back to uniform weights. Means are divided by the largest
/// mean before pow() so large tau cannot overflow.
std::vector<float> crop_weights(const ScoreSheet& sheet, const CropPartition& part, float tau);

/// Initial quota per crop: floor(w_c * retain_count).
std::vector<std::size_t> initial_quotas(std::span<const float> weights, std::size_t retain_count);

/// Cap-then-grant redistribution. Quotas above their crop size are clipped
/// and the freed budget returns to the pool; the pool is then granted one
/// token at a time to the highest-weight crop with remaining capacity
/// (ties -> lower crop index) until quotas sum to retain_count.
/// Throws "budget exceeds token count" when retain_count > sum of crop sizes.
QuotaPlan redistribute(std::vector<std::size_t> quotas, std::span<const float> weights,
                       std::span<const std::size_t> crop_sizes, std::size_t retain_count);

/// Per-crop top-k by holistic score, ties -> lower global token index.
PruneResult select_topk(const ScoreSheet& sheet, const CropPartition& part, const QuotaPlan& plan);

/// End-to-end pruning: normalize -> partition -> score -> weights ->
/// quotas -> redistribute -> top-k. Deterministic.
PruneResult prune(const TokenSet& ts, const PruneConfig& cfg);

/// Offset inside log(epsilon + prefix) handling the empty-prefix case.
inline constexpr double kLogAllocationEpsilon = 1e-9;

/// Verification harness for the log-sum allocation bound: one unit at a
/// time to the crop with the largest marginal gain of
/// sum_p log(eps + prefix_p). Scores must be non-negative and sorted
/// descending per crop. Not the production allocator.
std::vector<std::size_t> greedy_log_allocation(const std::vector<std::vector<double>>& crop_scores,
                                               std::size_t retain_count);

/// Objective value of a quota vector, reported as the gain over the empty
/// allocation: sum_p [log(eps + prefix_p) - log(eps)]. Non-negative, so
/// approximation ratios against it are meaningful.
double log_allocation_objective(const std::vector<std::vector<double>>& crop_scores,
                                std::span<const std::size_t> quotas);

}  // namespace holov
