// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "holov/types.hpp"

namespace holov {

/// Recipe for a synthetic token set with known structure: clustered
/// embeddings in spatially contiguous bands, optional planted informative
/// tokens with their own directions and elevated saliency, and a U-shaped
/// positional attention bias (high at both sequence ends).
struct SyntheticSpec {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    std::size_t d = 0;
    std::size_t cluster_count = 1;
    std::vector<std::size_t> planted_informative;
    float positional_bias_strength = 0.0f;
    float noise_sigma = 0.0f;
    std::uint64_t seed = 0;
};

struct SyntheticInstance {
    TokenSet tokens;
    std::vector<std::size_t> cluster_of;  // per-token cluster id
    std::vector<bool> planted;            // per-token ground truth
};

/// Deterministic generator (draw order documented in docs/formats.md):
/// cluster centroid directions, planted directions, per-token noise, then
/// attention jitter, all from one SplitMix64 stream.
SyntheticInstance generate_synthetic(const SyntheticSpec& spec);

/// Mean pairwise cosine similarity among the retained tokens.
/// Requires normalized embeddings and at least two retained indices.
float redundancy_metric(const TokenSet& ts, std::span<const std::size_t> retained);

/// Fraction of crops containing at least one retained token.
float spatial_coverage(const CropPartition& part, std::span<const std::size_t> retained);

/// Cumulative attention fractions after sorting descending; the last entry
/// is exactly 1. Throws on an all-zero attention vector.
std::vector<double> attention_cdf(std::span<const float> attention);

/// Fraction of planted tokens present in the retained set.
double planted_recall(std::span<const std::size_t> retained, const std::vector<bool>& planted);

/// One pruned token's coverage check: its best retained match, the local
/// context variance, and whether the distance bound
/// ||x_i - x_j|| <= sqrt(2(1-eps))*||x_j|| + sqrt(delta) held.
struct CoverageEntry {
    std::size_t pruned_index = 0;
    std::size_t matched_index = 0;
    double cosine = 0.0;
    double context_variance = 0.0;
    double distance = 0.0;
    double bound = 0.0;
    bool premise_ok = false;  // cosine >= eps and context variance <= delta
    bool violated = false;    // premise held but the bound did not
};

struct CoverageReport {
    std::vector<CoverageEntry> entries;  // one per pruned token
    std::size_t violations = 0;
    std::size_t premise_failures = 0;
};

/// Checks the retained-surrogate distance bound for every pruned token.
/// Context variance is taken over the 8-connected grid neighbors of the
/// pruned token. Report-style: bound violations and premise failures are
/// counted separately, nothing throws.
CoverageReport check_coverage_lemma(const TokenSet& ts, std::span<const std::size_t> retained,
                                    double epsilon, double delta);

struct SemanticCheck {
    double lhs = 0.0;       // || f(all tokens) - f(retained) ||
    double rhs = 0.0;       // L*(sqrt(2(1-eps))*B + sqrt(delta)) + c_eta*B^2/gamma
    double lipschitz = 0.0; // measured spectral norm of the transform
    bool holds = false;
};

/// Output-drift bound check through a synthetic one-layer transform
/// f(X) = mean_i tanh(W x_i) with W spectral-norm-clipped to lipschitz_l.
/// c_eta is a harness constant for the scoring-residual term.
SemanticCheck check_semantic_preservation(const TokenSet& ts,
                                          std::span<const std::size_t> retained,
                                          double lipschitz_l, double epsilon, double delta,
                                          double gamma, double bound_b, double c_eta = 1.0,
                                          std::uint64_t transform_seed = 0);

}  // namespace holov
