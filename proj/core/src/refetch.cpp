// SPDX-License-Identifier: Apache-2.0

#include "holov/refetch.hpp"

#include <algorithm>
#include <cmath>

namespace holov {

namespace {

void apply_activation(std::vector<double>& scores, Activation activation) {
    switch (activation) {
        case Activation::relu:
            for (double& s : scores) s = std::max(s, 0.0);
            return;
        case Activation::silu:
            for (double& s : scores) s = s / (1.0 + std::exp(-s));
            return;
        case Activation::softmax_over_scores: {
            double mx = scores[0];
            for (double s : scores) mx = std::max(mx, s);
            double total = 0.0;
            for (double& s : scores) {
                s = std::exp(s - mx);
                total += s;
            }
            for (double& s : scores) s /= total;
            return;
        }
    }
}

// sum_i phi(<x, key_i>) * value_i with keys/values supplied as row or
// column accessors over the same index range.
template <typename KeyDot, typename ValueAt>
std::vector<float> memory_lookup(std::size_t entries, std::size_t d, KeyDot key_dot,
                                 ValueAt value_at, Activation activation,
                                 std::uint64_t* mult_count) {
    std::vector<double> scores(entries);
    for (std::size_t i = 0; i < entries; ++i) scores[i] = key_dot(i);
    apply_activation(scores, activation);

    std::vector<double> acc(d, 0.0);
    for (std::size_t i = 0; i < entries; ++i)
        for (std::size_t j = 0; j < d; ++j) acc[j] += scores[i] * value_at(i, j);

    if (mult_count) *mult_count += 2ULL * entries * d;  // dots + accumulation

    std::vector<float> out(d);
    for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<float>(acc[j]);
    return out;
}

}  // namespace

std::vector<float> ffn_memory(std::span<const float> x, const FfnWeights& w,
                              std::uint64_t* mult_count) {
    const std::size_t d = w.dim();
    const std::size_t entries = w.entries();
    if (x.size() != d) throw error("input length does not match FFN dimension");
    if (w.w2.rows != d || w.w2.cols != entries) throw error("FFN weight shapes disagree");
    if (entries == 0) throw error("FFN memory must have at least one entry");

    return memory_lookup(
        entries, d,
        [&](std::size_t i) {
            double dot = 0.0;  // key i is column i of w1
            for (std::size_t j = 0; j < d; ++j)
                dot += static_cast<double>(x[j]) * static_cast<double>(w.w1.at(j, i));
            return dot;
        },
        [&](std::size_t i, std::size_t j) { return static_cast<double>(w.w2.at(j, i)); },
        w.activation, mult_count);
}

std::vector<float> vcr_delta(std::span<const float> x, const Matrix& z_v, Activation activation,
                             std::uint64_t* mult_count) {
    if (z_v.rows == 0) throw error("no visual evidence");
    if (z_v.cols != x.size()) throw error("visual token dimension does not match query");

    return memory_lookup(
        z_v.rows, z_v.cols,
        [&](std::size_t i) {
            const auto row = z_v.row(i);
            double dot = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j)
                dot += static_cast<double>(x[j]) * static_cast<double>(row[j]);
            return dot;
        },
        [&](std::size_t i, std::size_t j) { return static_cast<double>(z_v.at(i, j)); },
        activation, mult_count);
}

std::vector<float> ffn_with_vcr(std::span<const float> x, const FfnWeights& w, const Matrix& z_v,
                                float alpha) {
    if (!(alpha >= 0.0f && alpha <= 1.0f)) throw error("alpha must be in [0, 1]");
    if (alpha == 0.0f) return ffn_memory(x, w);
    if (alpha == 1.0f) return vcr_delta(x, z_v, w.activation);

    const std::vector<float> base = ffn_memory(x, w);
    const std::vector<float> delta = vcr_delta(x, z_v, w.activation);
    std::vector<float> out(base.size());
    for (std::size_t j = 0; j < base.size(); ++j)
        out[j] = alpha * delta[j] + (1.0f - alpha) * base[j];
    return out;
}

bool uncertainty_trigger(std::span<const float> logits, float threshold) {
    if (logits.size() < 2) throw error("vocabulary size must be at least 2");
    for (float v : logits)
        if (!std::isfinite(v)) throw error("non-finite logits");

    double mx = logits[0];
    for (float v : logits) mx = std::max(mx, static_cast<double>(v));
    double total = 0.0;
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(static_cast<double>(logits[i]) - mx);
        total += p[i];
    }
    double entropy = 0.0;
    for (double& pi : p) {
        pi /= total;
        if (pi > 0.0) entropy -= pi * std::log(pi);
    }
    const double normalized = entropy / std::log(static_cast<double>(logits.size()));
    return normalized > static_cast<double>(threshold);
}

float vcr_alpha_from_variance(float mean_variance, float alpha_max) {
    const double v = std::max(static_cast<double>(mean_variance), 0.0);
    const double squashed = 2.0 / (1.0 + std::exp(-10.0 * v)) - 1.0;
    return static_cast<float>(static_cast<double>(alpha_max) * squashed);
}

std::size_t middle_trigger_layer(std::size_t layer_count) {
    return layer_count / 2;
}

Matrix gather_pruned_rows(const Matrix& m, std::span<const std::size_t> retained) {
    std::vector<bool> keep(m.rows, false);
    for (std::size_t i : retained) {
        if (i >= m.rows) throw error("retained index out of range");
        keep[i] = true;
    }
    std::size_t pruned = 0;
    for (bool k : keep)
        if (!k) ++pruned;

    Matrix out(pruned, m.cols);
    std::size_t r = 0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (keep[i]) continue;
        const auto src = m.row(i);
        std::copy(src.begin(), src.end(), out.row(r).begin());
        ++r;
    }
    return out;
}

}  // namespace holov
