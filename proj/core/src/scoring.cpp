// SPDX-License-Identifier: Apache-2.0

#include "holov/scoring.hpp"

#include <cmath>

#include "holov/core_model.hpp"

namespace holov {

namespace {

std::vector<std::size_t> members_of(const CropPartition& part, std::size_t crop) {
    std::vector<std::size_t> idx;
    idx.reserve(part.crop_sizes[crop]);
    for (std::size_t i = 0; i < part.assignment.size(); ++i)
        if (part.assignment[i] == crop) idx.push_back(i);
    return idx;
}

Matrix similarity_for_members(const TokenSet& ts, const std::vector<std::size_t>& idx) {
    const std::size_t m = idx.size();
    Matrix sim(m, m, 0.0f);
    for (std::size_t i = 0; i < m; ++i) {
        const auto ri = ts.embeddings.row(idx[i]);
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto rj = ts.embeddings.row(idx[j]);
            double dot = 0.0;
            for (std::size_t k = 0; k < ri.size(); ++k)
                dot += static_cast<double>(ri[k]) * static_cast<double>(rj[k]);
            const float s = static_cast<float>(dot);
            sim.at(i, j) = s;
            sim.at(j, i) = s;  // mirrored, exactly symmetric
        }
    }
    return sim;
}

}  // namespace

Matrix intra_crop_similarity(const TokenSet& ts, const CropPartition& part, std::size_t crop) {
    if (!ts.normalized) throw error("embeddings must be unit-normalized");
    if (crop >= part.crop_count) throw error("crop index out of range");
    return similarity_for_members(ts, members_of(part, crop));
}

std::vector<float> token_variance(const Matrix& sim) {
    if (sim.rows != sim.cols) throw error("similarity matrix must be square");
    const std::size_t m = sim.rows;
    if (m == 1) return {0.0f};

    std::vector<float> variance(m);
    const double denom = static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) sum += static_cast<double>(sim.at(i, j));
        const double mu = sum / denom;
        double sq = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const double dev = static_cast<double>(sim.at(i, j)) - mu;
            sq += dev * dev;
        }
        variance[i] = static_cast<float>(sq / denom);
    }
    return variance;
}

float adaptive_gamma(std::span<const float> variance, std::span<const float> attention,
                     float gamma_floor) {
    if (variance.size() != attention.size() || variance.empty())
        throw error("gamma inputs must have equal nonzero length");
    double va = 0.0, aa = 0.0;
    for (float v : variance) va += std::abs(static_cast<double>(v));
    for (float a : attention) aa += std::abs(static_cast<double>(a));
    const double mean_v = va / static_cast<double>(variance.size());
    const double mean_a = aa / static_cast<double>(attention.size());
    // A zero variance mean is always treated as degenerate, even at floor 0.
    if (mean_v == 0.0 || mean_v < static_cast<double>(gamma_floor)) return 0.0f;
    return static_cast<float>(mean_a / mean_v);
}

ScoreSheet holistic_scores(const TokenSet& ts, const CropPartition& part, float gamma_floor) {
    if (!ts.normalized) throw error("embeddings must be unit-normalized");
    const std::size_t n = ts.token_count();

    ScoreSheet sheet;
    sheet.variance.assign(n, 0.0f);
    sheet.attention = ts.attention;
    sheet.gamma.assign(part.crop_count, 0.0f);
    sheet.holistic.assign(n, 0.0f);

    const auto members = crop_members(part);
    for (std::size_t c = 0; c < part.crop_count; ++c) {
        const auto& idx = members[c];
        const Matrix sim = similarity_for_members(ts, idx);
        const std::vector<float> var = token_variance(sim);

        std::vector<float> att(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) att[k] = ts.attention[idx[k]];

        const float gamma = adaptive_gamma(var, att, gamma_floor);
        sheet.gamma[c] = gamma;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            sheet.variance[idx[k]] = var[k];
            sheet.holistic[idx[k]] = fuse_score(gamma, var[k], att[k]);
        }
    }
    return sheet;
}

}  // namespace holov
