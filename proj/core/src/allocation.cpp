// SPDX-License-Identifier: Apache-2.0

#include "holov/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "holov/core_model.hpp"
#include "holov/scoring.hpp"

namespace holov {

std::vector<float> crop_weights(const ScoreSheet& sheet, const CropPartition& part, float tau) {
    if (!(tau > 0.0f) || !std::isfinite(tau)) throw error("tau must be finite and positive");
    if (sheet.holistic.size() != part.assignment.size())
        throw error("score sheet does not match partition");
    const std::size_t c = part.crop_count;

    std::vector<double> mean(c, 0.0);
    std::vector<std::size_t> count(c, 0);
    for (std::size_t i = 0; i < part.assignment.size(); ++i) {
        mean[part.assignment[i]] += static_cast<double>(sheet.holistic[i]);
        ++count[part.assignment[i]];
    }
    double max_mean = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        mean[k] = std::max(mean[k] / static_cast<double>(count[k]), 0.0);
        max_mean = std::max(max_mean, mean[k]);
    }

    std::vector<float> weights(c);
    if (max_mean == 0.0) {
        std::fill(weights.begin(), weights.end(), static_cast<float>(1.0 / c));
        return weights;
    }

    std::vector<double> powed(c);
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        powed[k] = std::pow(mean[k] / max_mean, static_cast<double>(tau));
        total += powed[k];
    }
    for (std::size_t k = 0; k < c; ++k) weights[k] = static_cast<float>(powed[k] / total);
    return weights;
}

std::vector<std::size_t> initial_quotas(std::span<const float> weights, std::size_t retain_count) {
    std::vector<std::size_t> quotas(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k)
        quotas[k] = static_cast<std::size_t>(
            std::floor(static_cast<double>(weights[k]) * static_cast<double>(retain_count)));
    return quotas;
}

QuotaPlan redistribute(std::vector<std::size_t> quotas, std::span<const float> weights,
                       std::span<const std::size_t> crop_sizes, std::size_t retain_count) {
    const std::size_t c = quotas.size();
    if (weights.size() != c || crop_sizes.size() != c)
        throw error("quota, weight, and size vectors must agree in length");

    const std::size_t capacity = std::accumulate(crop_sizes.begin(), crop_sizes.end(),
                                                 std::size_t{0});
    if (retain_count > capacity) throw error("budget exceeds token count");

    // Cap pass: freed budget returns to the pool.
    for (std::size_t k = 0; k < c; ++k) quotas[k] = std::min(quotas[k], crop_sizes[k]);
    std::size_t assigned = std::accumulate(quotas.begin(), quotas.end(), std::size_t{0});

    // Callers normally arrive with assigned <= retain_count (floor quotas);
    // shrink from the lowest-weight crop if not, so the function is total.
    while (assigned > retain_count) {
        std::size_t pick = c;
        for (std::size_t k = c; k-- > 0;) {
            if (quotas[k] == 0) continue;
            if (pick == c || weights[k] < weights[pick]) pick = k;
        }
        --quotas[pick];
        --assigned;
    }

    // Grant pass: one token at a time to the highest-weight crop with
    // remaining capacity, ties -> lower crop index.
    while (assigned < retain_count) {
        std::size_t pick = c;
        for (std::size_t k = 0; k < c; ++k) {
            if (quotas[k] >= crop_sizes[k]) continue;
            if (pick == c || weights[k] > weights[pick]) pick = k;
        }
        ++quotas[pick];
        ++assigned;
    }

    QuotaPlan plan;
    plan.quotas = std::move(quotas);
    plan.weights.assign(weights.begin(), weights.end());
    return plan;
}

PruneResult select_topk(const ScoreSheet& sheet, const CropPartition& part,
                        const QuotaPlan& plan) {
    if (plan.quotas.size() != part.crop_count) throw error("quota plan does not match partition");
    if (sheet.holistic.size() != part.assignment.size())
        throw error("score sheet does not match partition");

    PruneResult result;
    result.quota_plan = plan;
    result.score_sheet = sheet;
    result.per_crop.resize(part.crop_count);

    const auto members = crop_members(part);
    for (std::size_t c = 0; c < part.crop_count; ++c) {
        const std::size_t q = plan.quotas[c];
        if (q > members[c].size()) throw error("quota exceeds crop size");

        std::vector<std::size_t> order = members[c];
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (sheet.holistic[a] != sheet.holistic[b])
                return sheet.holistic[a] > sheet.holistic[b];
            return a < b;
        });
        order.resize(q);
        std::sort(order.begin(), order.end());
        result.per_crop[c] = std::move(order);
    }

    for (const auto& crop_sel : result.per_crop)
        result.retained.insert(result.retained.end(), crop_sel.begin(), crop_sel.end());
    std::sort(result.retained.begin(), result.retained.end());
    return result;
}

PruneResult prune(const TokenSet& ts, const PruneConfig& cfg) {
    const std::size_t n = ts.token_count();
    if (cfg.retain_count == 0) throw error("retain_count must be >= 1");
    if (cfg.retain_count > n) throw error("retain_count exceeds token count");

    const TokenSet normalized = ts.normalized ? ts : normalize_rows(ts);
    const CropPartition part = make_partition(normalized, cfg);
    const ScoreSheet sheet = holistic_scores(normalized, part, cfg.gamma_floor);
    const std::vector<float> weights = crop_weights(sheet, part, cfg.tau);
    std::vector<std::size_t> quotas = initial_quotas(weights, cfg.retain_count);
    const QuotaPlan plan =
        redistribute(std::move(quotas), weights, part.crop_sizes, cfg.retain_count);
    return select_topk(sheet, part, plan);
}

namespace {

double prefix_sum(const std::vector<double>& scores, std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += scores[t];
    return s;
}

void check_scores(const std::vector<std::vector<double>>& crop_scores) {
    for (const auto& scores : crop_scores) {
        for (std::size_t t = 0; t < scores.size(); ++t) {
            if (scores[t] < 0.0) throw error("scores must be non-negative");
            if (t > 0 && scores[t] > scores[t - 1]) throw error("scores must be sorted descending");
        }
    }
}

}  // namespace

std::vector<std::size_t> greedy_log_allocation(const std::vector<std::vector<double>>& crop_scores,
                                               std::size_t retain_count) {
    check_scores(crop_scores);
    std::size_t capacity = 0;
    for (const auto& s : crop_scores) capacity += s.size();
    if (retain_count > capacity) throw error("budget exceeds token count");

    const std::size_t p = crop_scores.size();
    std::vector<std::size_t> quotas(p, 0);
    std::vector<double> prefix(p, 0.0);

    for (std::size_t step = 0; step < retain_count; ++step) {
        std::size_t pick = p;
        double best_gain = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            if (quotas[k] >= crop_scores[k].size()) continue;
            const double before = std::log(kLogAllocationEpsilon + prefix[k]);
            const double after =
                std::log(kLogAllocationEpsilon + prefix[k] + crop_scores[k][quotas[k]]);
            const double gain = after - before;
            if (pick == p || gain > best_gain) {
                pick = k;
                best_gain = gain;
            }
        }
        prefix[pick] += crop_scores[pick][quotas[pick]];
        ++quotas[pick];
    }
    return quotas;
}

double log_allocation_objective(const std::vector<std::vector<double>>& crop_scores,
                                std::span<const std::size_t> quotas) {
    if (quotas.size() != crop_scores.size()) throw error("quota vector length mismatch");
    double value = 0.0;
    for (std::size_t k = 0; k < quotas.size(); ++k) {
        if (quotas[k] > crop_scores[k].size()) throw error("quota exceeds crop size");
        value += std::log(kLogAllocationEpsilon + prefix_sum(crop_scores[k], quotas[k])) -
                 std::log(kLogAllocationEpsilon);
    }
    return value;
}

}  // namespace holov
