// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace holov {

/// SplitMix64, the fixed portable generator behind every seeded operation.
/// The algorithm and a reference output sequence are published in
/// docs/formats.md so other implementations can reproduce runs bit-exactly.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1], usable as a log() argument.
    double next_open_double() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Standard normal deviates via Box-Muller over SplitMix64 uniforms
/// (two uniforms per pair; the second deviate is cached).
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next();

private:
    SplitMix64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// k distinct indices from [0, n) by partial Fisher-Yates
/// (step i swaps position i with i + next() % (n - i)); output sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, SplitMix64& rng);

/// Random-access per-trial seed: the (index+1)-th output of SplitMix64(master).
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

}  // namespace holov
