// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "holov/prng.hpp"
#include "holov/refetch.hpp"

using namespace holov;

namespace {

double activate(double s, Activation act) {
    switch (act) {
        case Activation::relu: return std::max(s, 0.0);
        case Activation::silu: return s / (1.0 + std::exp(-s));
        default: return s;  // softmax handled by the caller
    }
}

// Matrix-form oracle: phi(x W1) W2^T with its own accumulation order.
std::vector<double> matrix_ffn_oracle(std::span<const float> x, const FfnWeights& w) {
    const std::size_t d = w.dim(), entries = w.entries();
    std::vector<double> scores(entries, 0.0);
    for (std::size_t i = 0; i < entries; ++i)
        for (std::size_t j = 0; j < d; ++j)
            scores[i] += static_cast<double>(x[j]) * static_cast<double>(w.w1.at(j, i));

    if (w.activation == Activation::softmax_over_scores) {
        double mx = scores[0];
        for (double s : scores) mx = std::max(mx, s);
        double total = 0.0;
        for (double& s : scores) {
            s = std::exp(s - mx);
            total += s;
        }
        for (double& s : scores) s /= total;
    } else {
        for (double& s : scores) s = activate(s, w.activation);
    }

    std::vector<double> out(d, 0.0);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < entries; ++i)
            out[j] += scores[i] * static_cast<double>(w.w2.at(j, i));
    return out;
}

double relative_gap(std::span<const float> got, const std::vector<double>& expected) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < got.size(); ++j) {
        const double dv = static_cast<double>(got[j]) - expected[j];
        num += dv * dv;
        den += expected[j] * expected[j];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

FfnWeights random_weights(std::size_t d, std::size_t entries, std::uint64_t seed,
                          Activation act = Activation::relu) {
    GaussianSource gauss(seed);
    FfnWeights w;
    w.w1 = Matrix(d, entries);
    w.w2 = Matrix(d, entries);
    for (float& v : w.w1.data) v = static_cast<float>(gauss.next());
    for (float& v : w.w2.data) v = static_cast<float>(gauss.next());
    w.activation = act;
    return w;
}

std::vector<float> random_vector(std::size_t d, std::uint64_t seed) {
    GaussianSource gauss(seed);
    std::vector<float> x(d);
    for (float& v : x) v = static_cast<float>(gauss.next());
    return x;
}

}  // namespace

TEST_CASE("relu memory of the zero vector is zero") {
    const auto w = random_weights(4, 8, 1);
    const std::vector<float> x(4, 0.0f);
    for (float v : ffn_memory(x, w)) CHECK(v == 0.0f);
}

TEST_CASE("single-entry memory retrieves its value") {
    FfnWeights w;
    w.w1 = Matrix(2, 1);
    w.w2 = Matrix(2, 1);
    w.w1.at(0, 0) = 1.0f;  // key e1
    w.w2.at(1, 0) = 1.0f;  // value e2
    const std::vector<float> x = {1.0f, 0.0f};
    const auto out = ffn_memory(x, w);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(1.0));
}

TEST_CASE("key-value form equals the matrix form across random shapes") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng.next() % 64;
        const std::size_t entries = 1 + rng.next() % 256;
        const Activation act = trial % 3 == 0   ? Activation::softmax_over_scores
                               : trial % 3 == 1 ? Activation::silu
                                                : Activation::relu;
        const auto w = random_weights(d, entries, rng.next(), act);
        const auto x = random_vector(d, rng.next());
        CHECK(relative_gap(ffn_memory(x, w), matrix_ffn_oracle(x, w)) < 1e-5);
    }
}

TEST_CASE("ffn_memory rejects shape mismatches") {
    const auto w = random_weights(4, 8, 2);
    const std::vector<float> x(3, 1.0f);
    CHECK_THROWS_AS(ffn_memory(x, w), error);
}

TEST_CASE("vcr with a single aligned token returns phi(|x|) times the token") {
    const float inv = 1.0f / std::sqrt(2.0f);
    Matrix z(1, 2);
    z.at(0, 0) = inv;
    z.at(0, 1) = inv;
    const std::vector<float> x = {2.0f * inv, 2.0f * inv};  // x = 2 * z
    const auto out = vcr_delta(x, z, Activation::relu);
    CHECK(out[0] == doctest::Approx(2.0 * inv).epsilon(1e-6));
    CHECK(out[1] == doctest::Approx(2.0 * inv).epsilon(1e-6));
}

TEST_CASE("relu vcr vanishes when the query is orthogonal to all evidence") {
    Matrix z(2, 2);
    z.at(0, 0) = 1.0f;
    z.at(1, 0) = -1.0f;
    const std::vector<float> x = {0.0f, 1.0f};
    for (float v : vcr_delta(x, z, Activation::relu)) CHECK(v == 0.0f);
}

TEST_CASE("vcr matches a definitional loop oracle") {
    SplitMix64 rng(123);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 2 + rng.next() % 16;
        const std::size_t n = 1 + rng.next() % 24;
        GaussianSource gauss(rng.next());
        Matrix z(n, d);
        for (float& v : z.data) v = static_cast<float>(gauss.next());
        const auto x = random_vector(d, rng.next());

        std::vector<double> expected(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                dot += static_cast<double>(x[j]) * static_cast<double>(z.at(i, j));
            const double act = std::max(dot, 0.0);
            for (std::size_t j = 0; j < d; ++j)
                expected[j] += act * static_cast<double>(z.at(i, j));
        }
        CHECK(relative_gap(vcr_delta(x, z, Activation::relu), expected) < 1e-6);
    }
}

TEST_CASE("vcr requires visual evidence") {
    Matrix empty(0, 4);
    const std::vector<float> x(4, 1.0f);
    CHECK_THROWS_WITH_AS(vcr_delta(x, empty, Activation::relu), "no visual evidence", error);
}

TEST_CASE("alpha endpoints are exact identities") {
    const auto w = random_weights(6, 24, 5);
    GaussianSource gauss(77);
    Matrix z(10, 6);
    for (float& v : z.data) v = static_cast<float>(gauss.next());
    const auto x = random_vector(6, 8);

    CHECK(ffn_with_vcr(x, w, z, 0.0f) == ffn_memory(x, w));
    CHECK(ffn_with_vcr(x, w, z, 1.0f) == vcr_delta(x, z, w.activation));
}

TEST_CASE("mixing is affine in alpha") {
    const auto w = random_weights(8, 32, 6);
    GaussianSource gauss(13);
    Matrix z(12, 8);
    for (float& v : z.data) v = static_cast<float>(gauss.next());
    const auto x = random_vector(8, 9);

    const auto at0 = ffn_with_vcr(x, w, z, 0.0f);
    const auto at1 = ffn_with_vcr(x, w, z, 1.0f);
    for (float alpha : {0.25f, 0.5f, 0.75f}) {
        const auto mixed = ffn_with_vcr(x, w, z, alpha);
        for (std::size_t j = 0; j < mixed.size(); ++j)
            CHECK(mixed[j] ==
                  doctest::Approx(alpha * at1[j] + (1.0f - alpha) * at0[j]).epsilon(1e-6));
    }
    CHECK_THROWS_WITH_AS(ffn_with_vcr(x, w, z, 1.5f), "alpha must be in [0, 1]", error);
}

TEST_CASE("measured multiply counts scale as N_v / D") {
    const std::size_t d = 16, entries = 128, n_v = 8;
    const auto w = random_weights(d, entries, 3);
    GaussianSource gauss(4);
    Matrix z(n_v, d);
    for (float& v : z.data) v = static_cast<float>(gauss.next());
    const auto x = random_vector(d, 5);

    std::uint64_t ffn_mults = 0, vcr_mults = 0;
    ffn_memory(x, w, &ffn_mults);
    vcr_delta(x, z, Activation::relu, &vcr_mults);
    CHECK(ffn_mults == 2 * entries * d);
    CHECK(vcr_mults == 2 * n_v * d);
    CHECK(vcr_mults * entries == ffn_mults * n_v);  // ratio exactly N_v / D
}

TEST_CASE("entropy trigger fires on flat logits and stays quiet on peaked ones") {
    CHECK(uncertainty_trigger(std::vector<float>{0.0f, 0.0f}, 0.9f));         // ln2/ln2 = 1
    CHECK(uncertainty_trigger(std::vector<float>{1.0f, 1.0f, 1.0f}, 0.99f));  // uniform
    CHECK_FALSE(uncertainty_trigger(std::vector<float>{30.0f, 0.0f, 0.0f}, 0.5f));
    CHECK_THROWS_WITH_AS(uncertainty_trigger(std::vector<float>{1.0f}, 0.5f),
                         "vocabulary size must be at least 2", error);
}

TEST_CASE("alpha helper maps variance into [0, alpha_max)") {
    CHECK(vcr_alpha_from_variance(0.0f) == 0.0f);
    const float low = vcr_alpha_from_variance(0.05f);
    const float high = vcr_alpha_from_variance(0.5f);
    CHECK(low > 0.0f);
    CHECK(high > low);
    CHECK(high < 0.3f);
}

TEST_CASE("trigger layer defaults to the middle of the stack") {
    CHECK(middle_trigger_layer(32) == 16);
    CHECK(middle_trigger_layer(33) == 16);
}

TEST_CASE("gather_pruned_rows returns the complement of the retained set") {
    Matrix m(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        m.at(i, 0) = static_cast<float>(i);
        m.at(i, 1) = static_cast<float>(i) + 0.5f;
    }
    const std::vector<std::size_t> retained = {0, 2};
    const auto pruned = gather_pruned_rows(m, retained);
    REQUIRE(pruned.rows == 2);
    CHECK(pruned.at(0, 0) == 1.0f);
    CHECK(pruned.at(1, 0) == 3.0f);
}

TEST_CASE("toy decoder refetches pruned evidence at the middle layer") {
    // A minimal 4-layer decoder over one hidden state: each layer applies its
    // FFN; at the trigger layer, high output uncertainty injects the pruned
    // visual tokens through the refetch path.
    const std::size_t d = 8, layers = 4;
    GaussianSource gauss(2024);

    std::vector<FfnWeights> stack;
    for (std::size_t l = 0; l < layers; ++l) stack.push_back(random_weights(d, 16, 100 + l));

    Matrix visual(6, d);
    for (float& v : visual.data) v = static_cast<float>(gauss.next());
    const std::vector<std::size_t> retained = {0, 2, 4};
    const Matrix pruned = gather_pruned_rows(visual, retained);
    REQUIRE(pruned.rows == 3);

    const float alpha = vcr_alpha_from_variance(0.12f);
    REQUIRE(alpha > 0.0f);

    const auto decode_once = [&](bool uncertain) {
        std::vector<float> h(d);
        for (float& v : h) v = 0.25f;
        for (std::size_t l = 0; l < layers; ++l) {
            const std::vector<float> flat_logits(4, 0.0f);    // max entropy
            const std::vector<float> peaked_logits = {9.0f, 0.0f, 0.0f, 0.0f};
            const bool fire = l == middle_trigger_layer(layers) &&
                              uncertainty_trigger(uncertain ? flat_logits : peaked_logits, 0.5f);
            h = fire ? ffn_with_vcr(h, stack[l], pruned, alpha) : ffn_memory(h, stack[l]);
        }
        return h;
    };

    const auto with_refetch = decode_once(true);
    const auto without_refetch = decode_once(false);
    REQUIRE(with_refetch.size() == d);
    // The injected visual evidence must actually change the trajectory.
    CHECK(with_refetch != without_refetch);

    // And the run is deterministic.
    CHECK(decode_once(true) == decode_once(true));
}
