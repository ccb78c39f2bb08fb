// SPDX-License-Identifier: Apache-2.0

#include "holov/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "holov/prng.hpp"

namespace holov {

namespace {

constexpr float kBaseSaliency = 0.2f;
constexpr float kPlantedBoost = 0.3f;
constexpr float kAttentionJitter = 0.02f;

// Positional profile: 1 at both sequence ends, decaying fast toward the
// middle (t^8 keeps the mass in the first and last few rows, matching the
// boundary-heavy attention pattern this models).
double u_shape(std::size_t i, std::size_t n) {
    if (n <= 1) return 1.0;
    const double t = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    const double t2 = t * t;
    return t2 * t2 * t2 * t2;
}

std::vector<double> unit_direction(GaussianSource& gauss, std::size_t d) {
    std::vector<double> v(d);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        v[j] = gauss.next();
        norm2 += v[j] * v[j];
    }
    const double norm = std::sqrt(norm2);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    else
        v[0] = 1.0;  // astronomically unlikely; keep the generator total
    return v;
}

double dot_rows(const Matrix& m, std::size_t a, std::size_t b) {
    const auto ra = m.row(a), rb = m.row(b);
    double acc = 0.0;
    for (std::size_t j = 0; j < ra.size(); ++j)
        acc += static_cast<double>(ra[j]) * static_cast<double>(rb[j]);
    return acc;
}

}  // namespace

SyntheticInstance generate_synthetic(const SyntheticSpec& spec) {
    const std::size_t n = spec.grid_h * spec.grid_w;
    if (n == 0 || spec.d == 0) throw error("synthetic grid and dimension must be positive");
    if (spec.cluster_count == 0) throw error("cluster count must be positive");
    for (std::size_t idx : spec.planted_informative)
        if (idx >= n) throw error("planted index out of range");
    if (!std::isfinite(spec.noise_sigma) || spec.noise_sigma < 0.0f)
        throw error("noise sigma must be finite and non-negative");

    SyntheticInstance inst;
    inst.planted.assign(n, false);
    for (std::size_t idx : spec.planted_informative) inst.planted[idx] = true;

    // Spatially contiguous cluster bands in token order.
    inst.cluster_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) inst.cluster_of[i] = i * spec.cluster_count / n;

    GaussianSource gauss(spec.seed);

    std::vector<std::vector<double>> centroids(spec.cluster_count);
    for (auto& c : centroids) c = unit_direction(gauss, spec.d);

    // Planted directions drawn in ascending token order. With two or more
    // clusters a planted token points along the difference of its own and
    // the next cluster's centroid (plus a private component), so its
    // similarity row is bimodal: strongly positive to one group, strongly
    // negative to the other. That is the diverse-connection signature the
    // variance score rewards.
    std::vector<std::vector<double>> planted_dir;
    std::vector<std::size_t> planted_slot(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!inst.planted[i]) continue;
        planted_slot[i] = planted_dir.size();
        std::vector<double> dir = unit_direction(gauss, spec.d);
        if (spec.cluster_count >= 2) {
            const auto& own = centroids[inst.cluster_of[i]];
            const auto& next = centroids[(inst.cluster_of[i] + 1) % spec.cluster_count];
            double norm2 = 0.0;
            for (std::size_t j = 0; j < spec.d; ++j) {
                dir[j] = own[j] - next[j] + 0.2 * dir[j];
                norm2 += dir[j] * dir[j];
            }
            const double norm = std::sqrt(norm2);
            for (double& x : dir) x /= norm;
        }
        planted_dir.push_back(std::move(dir));
    }

    TokenSet& ts = inst.tokens;
    ts.embeddings = Matrix(n, spec.d);
    ts.attention.resize(n);
    ts.grid_h = spec.grid_h;
    ts.grid_w = spec.grid_w;
    ts.normalized = false;

    const double sigma = static_cast<double>(spec.noise_sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& dir =
            inst.planted[i] ? planted_dir[planted_slot[i]] : centroids[inst.cluster_of[i]];
        auto row = ts.embeddings.row(i);
        for (std::size_t j = 0; j < spec.d; ++j)
            row[j] = static_cast<float>(dir[j] + sigma * gauss.next());
    }

    SplitMix64 jitter(spec.seed ^ 0x5DEECE66DULL);
    for (std::size_t i = 0; i < n; ++i) {
        double a = kBaseSaliency;
        if (inst.planted[i]) a += kPlantedBoost;
        a += static_cast<double>(spec.positional_bias_strength) * u_shape(i, n);
        a += kAttentionJitter * jitter.next_double();
        ts.attention[i] = static_cast<float>(a);
    }
    return inst;
}

float redundancy_metric(const TokenSet& ts, std::span<const std::size_t> retained) {
    if (!ts.normalized) throw error("embeddings must be unit-normalized");
    if (retained.size() < 2) throw error("redundancy needs at least two retained tokens");
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < retained.size(); ++a)
        for (std::size_t b = a + 1; b < retained.size(); ++b) {
            total += dot_rows(ts.embeddings, retained[a], retained[b]);
            ++pairs;
        }
    return static_cast<float>(total / static_cast<double>(pairs));
}

float spatial_coverage(const CropPartition& part, std::span<const std::size_t> retained) {
    std::vector<bool> touched(part.crop_count, false);
    for (std::size_t i : retained) {
        if (i >= part.assignment.size()) throw error("retained index out of range");
        touched[part.assignment[i]] = true;
    }
    const std::size_t hit = static_cast<std::size_t>(
        std::count(touched.begin(), touched.end(), true));
    return static_cast<float>(static_cast<double>(hit) / static_cast<double>(part.crop_count));
}

std::vector<double> attention_cdf(std::span<const float> attention) {
    std::vector<double> sorted(attention.begin(), attention.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double total = 0.0;
    for (double& v : sorted) {
        total += v;
        v = total;  // reuse as running sum
    }
    if (total <= 0.0) throw error("all-zero attention");
    for (double& v : sorted) v /= total;  // final entry is exactly 1
    return sorted;
}

double planted_recall(std::span<const std::size_t> retained, const std::vector<bool>& planted) {
    const std::size_t total = static_cast<std::size_t>(
        std::count(planted.begin(), planted.end(), true));
    if (total == 0) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i : retained)
        if (i < planted.size() && planted[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(total);
}

namespace {

std::vector<std::size_t> grid_neighbors(std::size_t idx, std::size_t h, std::size_t w) {
    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(idx / w);
    const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(idx % w);
    std::vector<std::size_t> out;
    for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const std::ptrdiff_t ny = y + dy, nx = x + dx;
            if (ny < 0 || nx < 0 || ny >= static_cast<std::ptrdiff_t>(h) ||
                nx >= static_cast<std::ptrdiff_t>(w))
                continue;
            out.push_back(static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx));
        }
    return out;
}

double euclidean_distance(const Matrix& m, std::size_t a, std::size_t b) {
    const auto ra = m.row(a), rb = m.row(b);
    double acc = 0.0;
    for (std::size_t j = 0; j < ra.size(); ++j) {
        const double dv = static_cast<double>(ra[j]) - static_cast<double>(rb[j]);
        acc += dv * dv;
    }
    return std::sqrt(acc);
}

}  // namespace

CoverageReport check_coverage_lemma(const TokenSet& ts, std::span<const std::size_t> retained,
                                    double epsilon, double delta) {
    if (!ts.normalized) throw error("embeddings must be unit-normalized");
    const std::size_t n = ts.token_count();
    std::vector<bool> kept(n, false);
    for (std::size_t i : retained) kept[i] = true;

    CoverageReport report;
    for (std::size_t j = 0; j < n; ++j) {
        if (kept[j]) continue;

        CoverageEntry entry;
        entry.pruned_index = j;

        double best = -2.0;
        for (std::size_t i : retained) {
            const double cos = dot_rows(ts.embeddings, i, j);
            if (cos > best) {
                best = cos;
                entry.matched_index = i;
            }
        }
        entry.cosine = best;

        const auto neighbors = grid_neighbors(j, ts.grid_h, ts.grid_w);
        if (!neighbors.empty()) {
            double mean = 0.0;
            std::vector<double> sims(neighbors.size());
            for (std::size_t k = 0; k < neighbors.size(); ++k) {
                sims[k] = dot_rows(ts.embeddings, entry.matched_index, neighbors[k]);
                mean += sims[k];
            }
            mean /= static_cast<double>(neighbors.size());
            double var = 0.0;
            for (double s : sims) var += (s - mean) * (s - mean);
            entry.context_variance = var / static_cast<double>(neighbors.size());
        }

        const double norm_j = std::sqrt(dot_rows(ts.embeddings, j, j));
        entry.distance = euclidean_distance(ts.embeddings, entry.matched_index, j);
        entry.bound = std::sqrt(2.0 * (1.0 - epsilon)) * norm_j + std::sqrt(delta);
        entry.premise_ok = entry.cosine >= epsilon && entry.context_variance <= delta;
        entry.violated = entry.premise_ok && entry.distance > entry.bound + 1e-5;

        if (entry.violated) ++report.violations;
        if (!entry.premise_ok) ++report.premise_failures;
        report.entries.push_back(entry);
    }
    return report;
}

namespace {

// Mean-pooled tanh(W x) over a subset of rows.
std::vector<double> pooled_transform(const Matrix& w, const Matrix& tokens,
                                     const std::vector<std::size_t>& subset) {
    const std::size_t d = tokens.cols;
    std::vector<double> pooled(d, 0.0);
    std::vector<double> out(d);
    for (std::size_t idx : subset) {
        const auto row = tokens.row(idx);
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t cidx = 0; cidx < d; ++cidx)
                acc += static_cast<double>(w.at(r, cidx)) * static_cast<double>(row[cidx]);
            out[r] = std::tanh(acc);
        }
        for (std::size_t r = 0; r < d; ++r) pooled[r] += out[r];
    }
    for (double& v : pooled) v /= static_cast<double>(subset.size());
    return pooled;
}

double spectral_norm(const Matrix& w, std::size_t iterations = 100) {
    const std::size_t d = w.cols;
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<double> wv(w.rows), wtwv(d);
    double sigma = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t r = 0; r < w.rows; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                acc += static_cast<double>(w.at(r, c)) * v[c];
            wv[r] = acc;
        }
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < w.rows; ++r)
                acc += static_cast<double>(w.at(r, c)) * wv[r];
            wtwv[c] = acc;
        }
        double norm = 0.0;
        for (double x : wtwv) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (std::size_t c = 0; c < d; ++c) v[c] = wtwv[c] / norm;
        double num = 0.0;
        for (double x : wv) num += x * x;
        sigma = std::sqrt(num);
    }
    return sigma;
}

}  // namespace

SemanticCheck check_semantic_preservation(const TokenSet& ts,
                                          std::span<const std::size_t> retained,
                                          double lipschitz_l, double epsilon, double delta,
                                          double gamma, double bound_b, double c_eta,
                                          std::uint64_t transform_seed) {
    if (retained.empty()) throw error("retained set must be non-empty");
    const std::size_t d = ts.dim();

    GaussianSource gauss(transform_seed);
    Matrix w(d, d);
    for (float& v : w.data)
        v = static_cast<float>(gauss.next() / std::sqrt(static_cast<double>(d)));

    double sigma = spectral_norm(w);
    if (sigma > lipschitz_l && sigma > 0.0) {
        const double scale = lipschitz_l / sigma;
        for (float& v : w.data) v = static_cast<float>(static_cast<double>(v) * scale);
        sigma = spectral_norm(w);
    }

    std::vector<std::size_t> all(ts.token_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> kept(retained.begin(), retained.end());

    const auto full = pooled_transform(w, ts.embeddings, all);
    const auto pruned = pooled_transform(w, ts.embeddings, kept);

    SemanticCheck check;
    check.lipschitz = sigma;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double dv = full[j] - pruned[j];
        acc += dv * dv;
    }
    check.lhs = std::sqrt(acc);
    check.rhs = lipschitz_l * (std::sqrt(2.0 * (1.0 - epsilon)) * bound_b + std::sqrt(delta)) +
                c_eta * bound_b * bound_b / gamma;
    check.holds = check.lhs <= check.rhs;
    return check;
}

}  // namespace holov
