#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vqc {

enum class Task { Regression, Classification, Toy };

/// Per-feature and target min/max recorded at normalization time so
/// predictions can be mapped back to original units.
struct ScalingRecord {
    std::vector<double> feat_min, feat_max;
    double target_min = 0.0, target_max = 0.0;
    bool targets_scaled = false;
};

struct Dataset {
    int n_features = 0;
    int n_outputs = 1;
    std::vector<double> features; // row-major n_samples x n_features
    std::vector<double> targets;  // row-major n_samples x n_outputs
    std::optional<ScalingRecord> scaling;

    int n_samples() const { return n_features == 0 ? 0 : static_cast<int>(features.size()) / n_features; }
    std::span<const double> row(int i) const { return {features.data() + std::size_t(i) * n_features, std::size_t(n_features)}; }
    std::span<const double> target(int i) const { return {targets.data() + std::size_t(i) * n_outputs, std::size_t(n_outputs)}; }
};

/// Friedman #1 benchmark: x1..x5 ~ U[0,1],
/// y = 10 sin(pi x1 x2) + 20 (x3 - 1/2)^2 + 10 x4 + 5 x5 + N(0, noise_std).
Dataset gen_friedman(int n, double noise_std, std::uint64_t seed);

/// Numeric CSV with a header row. Regression keeps the target column as-is;
/// classification one-hot encodes it over its sorted distinct values.
Dataset load_csv(const std::string& path, const std::string& target_column, Task task);

/// Min-max map of every feature onto [-pi, pi]; regression targets onto
/// [-1, 1]. Fits on the dataset itself. Constant features are rejected.
Dataset normalize(const Dataset& ds);

ScalingRecord fit_scaling(const Dataset& ds, bool scale_targets);
Dataset apply_scaling(const Dataset& ds, const ScalingRecord& rec);

/// Map normalized targets back to original units via the dataset's record.
std::vector<double> denormalize_targets(const ScalingRecord& rec, std::span<const double> values);

/// Affine remap of normalized features from [-pi, pi] onto [lo, hi]. Rotation
/// encodings alias at a full 2*pi span, so experiments usually feed the
/// encoders a narrower window.
Dataset rescale_features(const Dataset& ds, double lo, double hi);

struct SplitRatios {
    double train = 0.68;
    double val = 0.22;
    double test = 0.10;
};

struct SplitSet {
    Dataset train, val, test;
};

/// Seeded shuffle, contiguous slices sized floor(n*r) with the remainder in
/// test, then normalization fitted on the train slice and applied to all
/// three. Empty slices are a configuration error.
SplitSet split(const Dataset& ds, SplitRatios ratios, std::uint64_t seed);

} // namespace vqc
