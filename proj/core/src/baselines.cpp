// SPDX-License-Identifier: Apache-2.0

#include "holov/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "holov/prng.hpp"

namespace holov {

std::vector<std::size_t> random_prune(const TokenSet& ts, std::size_t retain_count,
                                      std::uint64_t seed) {
    if (retain_count > ts.token_count()) throw error("retain_count exceeds token count");
    SplitMix64 rng(seed);
    return sample_without_replacement(ts.token_count(), retain_count, rng);
}

std::vector<std::size_t> attention_topk_prune(const TokenSet& ts, std::size_t retain_count) {
    if (retain_count > ts.token_count()) throw error("retain_count exceeds token count");
    std::vector<std::size_t> order(ts.token_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ts.attention[a] != ts.attention[b]) return ts.attention[a] > ts.attention[b];
        return a < b;
    });
    order.resize(retain_count);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace holov
