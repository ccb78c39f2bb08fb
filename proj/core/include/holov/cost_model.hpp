// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace holov {

/// Transformer cost-model parameters. a, b, c are modeling conventions,
/// not measured facts: a=2 covers the two attention matmuls (scores and
/// value aggregation), b=4 the Q/K/V/O projections, c=6 SwiGLU's three
/// d x m matmuls at 2 FLOPs per MAC. All overridable.
struct CostParams {
    std::size_t n = 0;       // visual token count
    std::size_t d = 0;       // hidden size
    std::size_t m = 0;       // FFN intermediate size
    std::size_t layers = 1;
    double a = 2.0;
    double b = 4.0;
    double c = 6.0;
};

/// round(x) half-up; the ratio->count rule everywhere.
std::size_t round_half_up(double x);

/// retain_count = round((1-R) * n_tokens) half-up.
std::size_t retain_count_from_ratio(std::size_t n_tokens, double pruning_ratio);

/// Prefill cost: layers * (a n^2 d + b n d^2 + c n d m).
double prefill_flops(const CostParams& p);

struct FlopsReduction {
    double exact = 0.0;          // 1 - cost(n_hat)/cost(n)
    double approx = 0.0;         // 2R - R^2 (quadratic-term-dominates limit)
    std::size_t pruned_n = 0;    // n_hat = round((1-R) n)
};

/// Exact prefill FLOPs reduction at pruning ratio R in [0, 1], plus the
/// large-n approximation.
FlopsReduction flops_reduction(const CostParams& p, double ratio);

/// Decode cost per generated token against a KV cache of cached_n entries:
/// layers * (b d^2 + (b d + c d m) * cached_n).
double decode_flops_per_token(const CostParams& p, std::size_t cached_n);

}  // namespace holov
