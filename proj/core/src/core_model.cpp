// SPDX-License-Identifier: Apache-2.0

#include "holov/core_model.hpp"

#include <cmath>
#include <limits>

namespace holov {

namespace {

bool all_finite(std::span<const float> v) {
    for (float x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double row_norm(std::span<const float> row) {
    double acc = 0.0;
    for (float x : row) acc += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(acc);
}

}  // namespace

ValidationReport validate_token_set(const TokenSet& ts) {
    ValidationReport report;
    const std::size_t n = ts.token_count();
    const std::size_t d = ts.dim();

    if (n == 0) report.violations.push_back("empty token set");
    if (d == 0) report.violations.push_back("zero embedding dimension");
    if (ts.embeddings.data.size() != n * d)
        report.violations.push_back("embedding buffer size mismatch");
    if (ts.attention.size() != n) report.violations.push_back("attention length mismatch");

    if (!all_finite(ts.embeddings.data)) report.violations.push_back("non-finite embedding");
    if (!all_finite(ts.attention)) report.violations.push_back("non-finite attention");

    for (float a : ts.attention) {
        if (std::isfinite(a) && a < 0.0f) {
            report.violations.push_back("negative attention");
            break;
        }
    }

    if (ts.grid_h == 0 || ts.grid_w == 0 || ts.grid_h * ts.grid_w != n)
        report.violations.push_back("grid mismatch");

    if (ts.normalized && ts.embeddings.data.size() == n * d) {
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(row_norm(ts.embeddings.row(i)) - 1.0) > 1e-5) {
                report.violations.push_back("normalized flag set but row norm differs from 1");
                break;
            }
        }
    }

    return report;
}

TokenSet normalize_rows(const TokenSet& ts) {
    TokenSet out = ts;
    const std::size_t n = ts.token_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double norm = row_norm(ts.embeddings.row(i));
        if (norm == 0.0) throw error("degenerate token embedding");
        const double inv = 1.0 / norm;
        auto dst = out.embeddings.row(i);
        auto src = ts.embeddings.row(i);
        for (std::size_t j = 0; j < src.size(); ++j)
            dst[j] = static_cast<float>(static_cast<double>(src[j]) * inv);
    }
    out.normalized = true;
    return out;
}

std::size_t default_crop_count(std::size_t retain_count, std::size_t n_tokens) {
    const std::size_t c =
        static_cast<std::size_t>(std::floor(1024.0 / static_cast<double>(retain_count) + 0.5));
    return std::min(std::max<std::size_t>(c, 1), n_tokens);
}

namespace {

// Band boundaries: `count` split into `bands` near-equal pieces, remainder
// to the leading bands. Returns the band index of each position.
std::vector<std::size_t> band_of(std::size_t count, std::size_t bands) {
    std::vector<std::size_t> out(count);
    const std::size_t base = count / bands;
    const std::size_t extra = count % bands;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bands; ++b) {
        const std::size_t len = base + (b < extra ? 1 : 0);
        for (std::size_t k = 0; k < len; ++k) out[pos++] = b;
    }
    return out;
}

// Factor pair (r, s), r*s = c, feasible for the grid (r <= grid_h,
// s <= grid_w), minimizing |r-s|; ties prefer r <= s, then smaller r.
std::optional<std::pair<std::size_t, std::size_t>> tile_factors(std::size_t c, std::size_t grid_h,
                                                                std::size_t grid_w) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t r = 1; r <= c; ++r) {
        if (c % r != 0) continue;
        const std::size_t s = c / r;
        if (r > grid_h || s > grid_w) continue;
        if (!best) {
            best = {r, s};
            continue;
        }
        const auto diff = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
        const std::size_t cur = diff(r, s), prev = diff(best->first, best->second);
        if (cur < prev) best = {r, s};
        else if (cur == prev && best->first > best->second && r <= s) best = {r, s};
    }
    return best;
}

CropPartition row_major_partition(std::size_t n, std::size_t c) {
    CropPartition part;
    part.crop_count = c;
    part.assignment = band_of(n, c);
    part.crop_sizes.assign(c, 0);
    for (std::size_t b : part.assignment) ++part.crop_sizes[b];
    return part;
}

}  // namespace

CropPartition make_partition(const TokenSet& ts, const PruneConfig& cfg) {
    const std::size_t n = ts.token_count();
    const std::size_t c = cfg.crop_count ? *cfg.crop_count
                                         : default_crop_count(cfg.retain_count, n);
    if (c == 0) throw error("crop count must be positive");
    if (c > n) throw error("more crops than tokens");

    if (cfg.partition_mode == PartitionMode::row_major_blocks)
        return row_major_partition(n, c);

    const auto factors = tile_factors(c, ts.grid_h, ts.grid_w);
    if (!factors) return row_major_partition(n, c);  // no feasible tiling

    const auto [r, s] = *factors;
    const auto row_band = band_of(ts.grid_h, r);
    const auto col_band = band_of(ts.grid_w, s);

    CropPartition part;
    part.crop_count = c;
    part.assignment.resize(n);
    part.crop_sizes.assign(c, 0);
    for (std::size_t y = 0; y < ts.grid_h; ++y) {
        for (std::size_t x = 0; x < ts.grid_w; ++x) {
            const std::size_t crop = row_band[y] * s + col_band[x];
            part.assignment[y * ts.grid_w + x] = crop;
            ++part.crop_sizes[crop];
        }
    }
    return part;
}

std::vector<std::vector<std::size_t>> crop_members(const CropPartition& part) {
    std::vector<std::vector<std::size_t>> members(part.crop_count);
    for (std::size_t c = 0; c < part.crop_count; ++c) members[c].reserve(part.crop_sizes[c]);
    for (std::size_t i = 0; i < part.assignment.size(); ++i)
        members[part.assignment[i]].push_back(i);
    return members;
}

}  // namespace holov
