// SPDX-License-Identifier: Apache-2.0

#include "holov/cost_model.hpp"

#include <cmath>

#include "holov/types.hpp"

namespace holov {

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

std::size_t retain_count_from_ratio(std::size_t n_tokens, double pruning_ratio) {
    if (pruning_ratio < 0.0 || pruning_ratio > 1.0) throw error("ratio must be in [0, 1]");
    return round_half_up((1.0 - pruning_ratio) * static_cast<double>(n_tokens));
}

namespace {

double per_layer_prefill(const CostParams& p, double n) {
    const double d = static_cast<double>(p.d);
    const double m = static_cast<double>(p.m);
    return p.a * n * n * d + p.b * n * d * d + p.c * n * d * m;
}

}  // namespace

double prefill_flops(const CostParams& p) {
    return static_cast<double>(p.layers) * per_layer_prefill(p, static_cast<double>(p.n));
}

FlopsReduction flops_reduction(const CostParams& p, double ratio) {
    if (ratio < 0.0 || ratio > 1.0) throw error("ratio must be in [0, 1]");
    FlopsReduction out;
    out.pruned_n = round_half_up((1.0 - ratio) * static_cast<double>(p.n));
    out.exact = 1.0 - per_layer_prefill(p, static_cast<double>(out.pruned_n)) /
                          per_layer_prefill(p, static_cast<double>(p.n));
    out.approx = 2.0 * ratio - ratio * ratio;
    return out;
}

double decode_flops_per_token(const CostParams& p, std::size_t cached_n) {
    const double d = static_cast<double>(p.d);
    const double m = static_cast<double>(p.m);
    const double n = static_cast<double>(cached_n);
    return static_cast<double>(p.layers) * (p.b * d * d + (p.b * d + p.c * d * m) * n);
}

}  // namespace holov
