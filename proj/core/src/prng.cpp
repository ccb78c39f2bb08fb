// SPDX-License-Identifier: Apache-2.0

#include "holov/prng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "holov/types.hpp"

namespace holov {

double GaussianSource::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = rng_.next_open_double();
    const double u2 = rng_.next_double();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    SplitMix64& rng) {
    if (k > n) throw error("sample larger than population");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next() % (n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    SplitMix64 rng(master_seed);
    std::uint64_t out = 0;
    for (std::uint64_t i = 0; i <= trial_index; ++i) out = rng.next();
    return out;
}

}  // namespace holov
