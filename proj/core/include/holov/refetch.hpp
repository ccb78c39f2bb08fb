// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "holov/types.hpp"

namespace holov {

enum class Activation {
    relu,
    silu,
    softmax_over_scores,  // softmax across all key scores instead of elementwise
};

/// FFN weights viewed as key-value memory: column i of w1 is key k_i,
/// column i of w2 is value v_i.
struct FfnWeights {
    Matrix w1;  // d x D
    Matrix w2;  // d x D
    Activation activation = Activation::relu;

    std::size_t dim() const { return w1.rows; }
    std::size_t entries() const { return w1.cols; }
};

/// Key-value form of the FFN: sum_i phi(<x, k_i>) * v_i. Equals the matrix
/// form phi(x W1) W2^T. mult_count, when given, accumulates the number of
/// scalar multiplies (2*D*d per call).
std::vector<float> ffn_memory(std::span<const float> x, const FfnWeights& w,
                              std::uint64_t* mult_count = nullptr);

/// Visual context retrieval: sum_i phi(<x, z_i>) * z_i over the rows of
/// z_v, treating each visual token as its own key-value entry
/// (2*N_v*d multiplies). Throws "no visual evidence" on an empty z_v.
std::vector<float> vcr_delta(std::span<const float> x, const Matrix& z_v, Activation activation,
                             std::uint64_t* mult_count = nullptr);

/// alpha * vcr_delta + (1 - alpha) * ffn_memory. alpha in [0, 1];
/// the endpoints return the respective sub-result exactly.
std::vector<float> ffn_with_vcr(std::span<const float> x, const FfnWeights& w, const Matrix& z_v,
                                float alpha);

/// True iff the normalized Shannon entropy of softmax(logits) exceeds the
/// threshold. Requires at least two logits.
bool uncertainty_trigger(std::span<const float> logits, float threshold);

/// Heuristic injection ratio: mean token variance squashed through
/// alpha_max * (2*sigmoid(10*v) - 1), giving [0, alpha_max). Callers that
/// want a different complexity proxy can supply alpha directly.
float vcr_alpha_from_variance(float mean_variance, float alpha_max = 0.3f);

/// Default refetch layer: floor(layer_count / 2).
std::size_t middle_trigger_layer(std::size_t layer_count);

/// Rows of m not listed in retained (the pruned-token matrix handed to
/// vcr_delta). retained must be sorted ascending.
Matrix gather_pruned_rows(const Matrix& m, std::span<const std::size_t> retained);

}  // namespace holov
