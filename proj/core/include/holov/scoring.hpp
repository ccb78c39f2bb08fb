// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "holov/types.hpp"

namespace holov {

/// Masked intra-crop cosine similarity: S = Z Z^T with the diagonal forced
/// to zero. Embeddings must be unit-normalized. The upper triangle is
/// computed once and mirrored, so S is exactly symmetric.
Matrix intra_crop_similarity(const TokenSet& ts, const CropPartition& part, std::size_t crop);

/// Per-token spread of off-diagonal similarities:
///   mu_i = (1/(M-1)) sum_{j!=i} S_ij,  V_i = (1/(M-1)) sum_{j!=i} (S_ij - mu_i)^2.
/// A singleton crop yields {0}.
std::vector<float> token_variance(const Matrix& sim);

/// Adaptive scale gamma = mean|attention| / mean|variance| for one crop;
/// zero when the variance magnitude falls below gamma_floor.
float adaptive_gamma(std::span<const float> variance, std::span<const float> attention,
                     float gamma_floor);

/// The single rounding point of the fused score. Implementation and tests
/// both call this, which pins the H == gamma*V + A identity bit-for-bit.
inline float fuse_score(float gamma, float variance, float attention) {
    return gamma * variance + attention;
}

/// Full per-token score sheet: variance, gamma per crop, and the fused
/// holistic score, written in ascending token order.
ScoreSheet holistic_scores(const TokenSet& ts, const CropPartition& part,
                           float gamma_floor = 1e-12f);

}  // namespace holov
