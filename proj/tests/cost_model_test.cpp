// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "holov/cost_model.hpp"
#include "holov/types.hpp"

using namespace holov;

namespace {

// Independent integer-arithmetic oracle: with integer constants every term
// is exact in 64-bit integers, so the f64 result must match bit for bit.
double prefill_oracle_integer(std::uint64_t n, std::uint64_t d, std::uint64_t m,
                              std::uint64_t layers, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    const std::uint64_t term = a * n * n * d + b * n * d * d + c * n * d * m;
    return static_cast<double>(layers * term);
}

double reduction_oracle_integer(std::uint64_t n, std::uint64_t n_hat, std::uint64_t d,
                                std::uint64_t m, std::uint64_t a, std::uint64_t b,
                                std::uint64_t c) {
    const std::uint64_t num = a * n_hat * n_hat * d + b * n_hat * d * d + c * n_hat * d * m;
    const std::uint64_t den = a * n * n * d + b * n * d * d + c * n * d * m;
    return 1.0 - static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

TEST_CASE("ratio to retain-count conversion rounds half-up") {
    CHECK(retain_count_from_ratio(576, 0.889) == 64);
    CHECK(retain_count_from_ratio(576, 0.778) == 128);
    CHECK(retain_count_from_ratio(576, 0.667) == 192);
    CHECK(retain_count_from_ratio(576, 0.0) == 576);
    CHECK(retain_count_from_ratio(576, 1.0) == 0);
    CHECK_THROWS_AS(retain_count_from_ratio(576, 1.5), error);
}

TEST_CASE("prefill cost is zero at n = 0") {
    CostParams p;
    p.n = 0;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    CHECK(prefill_flops(p) == 0.0);
}

TEST_CASE("prefill cost matches the integer oracle to 0 ULP at LLaMA scale") {
    CostParams p;
    p.n = 576;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    CHECK(prefill_flops(p) == prefill_oracle_integer(576, 4096, 11008, 32, 2, 4, 6));
}

TEST_CASE("doubling n quadruples the pure-quadratic cost") {
    CostParams p;
    p.n = 100;
    p.d = 64;
    p.m = 256;
    p.layers = 1;
    p.b = 0.0;
    p.c = 0.0;
    const double base = prefill_flops(p);
    p.n = 200;
    CHECK(prefill_flops(p) == doctest::Approx(4.0 * base));
}

TEST_CASE("reduction endpoints are exact") {
    CostParams p;
    p.n = 576;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    CHECK(flops_reduction(p, 0.0).exact == 0.0);
    CHECK(flops_reduction(p, 1.0).exact == 1.0);
    CHECK(flops_reduction(p, 1.0).pruned_n == 0);
    CHECK_THROWS_AS(flops_reduction(p, -0.1), error);
}

TEST_CASE("exact reduction matches the integer oracle to 0 ULP") {
    CostParams p;
    p.n = 576;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    for (double ratio : {0.25, 0.5, 0.667, 0.778, 0.889}) {
        const auto out = flops_reduction(p, ratio);
        CHECK(out.exact == reduction_oracle_integer(576, out.pruned_n, 4096, 11008, 2, 4, 6));
    }
}

TEST_CASE("approximation carries the closed form 2R - R^2") {
    CostParams p;
    p.n = 576;
    p.d = 4096;
    p.m = 11008;
    const auto out = flops_reduction(p, 0.889);
    CHECK(out.approx == doctest::Approx(0.987679).epsilon(1e-6));
    CHECK(out.pruned_n == 64);
}

TEST_CASE("exact reduction approaches 2R - R^2 for large n with d, m fixed") {
    for (double ratio : {0.25, 0.5, 0.667, 0.778, 0.889}) {
        CostParams p;
        p.n = 1 << 14;
        p.d = 128;
        p.m = 128;
        p.layers = 1;
        const auto out = flops_reduction(p, ratio);
        CHECK(std::abs(out.exact - out.approx) < 0.02);
    }
    // And within 5% of the approximation from n = 2048 upward.
    for (std::size_t n : {2048u, 4096u, 65536u}) {
        CostParams p;
        p.n = n;
        p.d = 128;
        p.m = 128;
        const auto out = flops_reduction(p, 0.889);
        CHECK(std::abs(out.exact - out.approx) <= 0.05 * out.approx);
    }
}

TEST_CASE("F is monotone non-decreasing in R on a 1001-point grid") {
    CostParams p;
    p.n = 4096;
    p.d = 512;
    p.m = 2048;
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double f = flops_reduction(p, static_cast<double>(i) / 1000.0).exact;
        CHECK(f >= prev);
        prev = f;
    }
}

TEST_CASE("decode cost with an empty cache is the bias term") {
    CostParams p;
    p.n = 576;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    CHECK(decode_flops_per_token(p, 0) == 32.0 * 4.0 * 4096.0 * 4096.0);
}

TEST_CASE("decode reduction approaches R for large caches") {
    CostParams p;
    p.n = 1000000;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    const double ratio = 0.889;
    const std::size_t pruned = retain_count_from_ratio(p.n, ratio);
    const double full = decode_flops_per_token(p, p.n);
    const double reduced = decode_flops_per_token(p, pruned);
    CHECK(1.0 - reduced / full == doctest::Approx(ratio).epsilon(1e-3));
}

TEST_CASE("decode cost is affine, not linear, in the cache size") {
    CostParams p;
    p.n = 576;
    p.d = 1024;
    p.m = 4096;
    const double once = decode_flops_per_token(p, 100);
    const double twice = decode_flops_per_token(p, 200);
    CHECK(twice < 2.0 * once);
}

TEST_CASE("cost arithmetic is reproducible") {
    CostParams p;
    p.n = 2880;
    p.d = 4096;
    p.m = 11008;
    p.layers = 32;
    CHECK(prefill_flops(p) == prefill_flops(p));
    CHECK(flops_reduction(p, 0.889).exact == flops_reduction(p, 0.889).exact);
}
