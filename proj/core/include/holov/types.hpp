// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace holov {

/// Error type for all contract violations (bad shapes, degenerate inputs,
/// infeasible budgets). Messages are stable strings tested against.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major f32 matrix. Small and value-semantic; rows are the unit
/// of access everywhere (one row per token).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

    float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

/// Per-image visual tokens: one embedding row and one attention (saliency)
/// value per token, plus the patch-grid geometry the tokens came from.
struct TokenSet {
    Matrix embeddings;             // N_v x d
    std::vector<float> attention;  // length N_v, non-negative
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    bool normalized = false;  // true once rows are unit-L2

    std::size_t token_count() const { return embeddings.rows; }
    std::size_t dim() const { return embeddings.cols; }
};

enum class PartitionMode {
    grid_tiles,        // 2D rectangular tiles of the patch grid
    row_major_blocks,  // contiguous blocks in token order
};

/// Assignment of tokens to C spatial crops.
struct CropPartition {
    std::size_t crop_count = 0;
    std::vector<std::size_t> assignment;  // token index -> crop index
    std::vector<std::size_t> crop_sizes;  // length C, each >= 1
};

struct PruneConfig {
    std::size_t retain_count = 0;                  // tokens to keep
    float tau = 1.0f;                              // allocation sharpness
    std::optional<std::size_t> crop_count;         // default: round(1024/retain_count)
    PartitionMode partition_mode = PartitionMode::grid_tiles;
    float gamma_floor = 1e-12f;                    // variance magnitude treated as zero
    std::uint64_t seed = 0;                        // baselines / synthetic data only
};

/// Per-token scores for one token set: similarity variance V, attention A,
/// per-crop scale gamma, and the fused holistic score H = gamma*V + A.
struct ScoreSheet {
    std::vector<float> variance;   // length N_v
    std::vector<float> attention;  // length N_v, copied from the TokenSet
    std::vector<float> gamma;      // length C
    std::vector<float> holistic;   // length N_v

    bool operator==(const ScoreSheet&) const = default;
};

/// Per-crop retention budgets. quotas sum to the global retain count and
/// never exceed the crop sizes.
struct QuotaPlan {
    std::vector<std::size_t> quotas;  // length C
    std::vector<float> weights;       // length C, sums to 1

    bool operator==(const QuotaPlan&) const = default;
};

struct PruneResult {
    std::vector<std::size_t> retained;               // sorted global indices
    std::vector<std::vector<std::size_t>> per_crop;  // sorted indices per crop
    QuotaPlan quota_plan;
    ScoreSheet score_sheet;

    bool operator==(const PruneResult&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

}  // namespace holov
