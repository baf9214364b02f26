#include "vqc/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

#include "vqc/errors.hpp"
#include "vqc/io.hpp"
#include "vqc/rng.hpp"

namespace vqc {

Dataset gen_friedman(int n, double noise_std, std::uint64_t seed) {
    if (n < 1) {
        throw ConfigError("dataset size must be >= 1");
    }
    // separate noise stream, so the sampled points do not depend on noise_std
    RngStream rng = RngStream::derive(seed, kStreamDatagen, 0);
    RngStream noise = RngStream::derive(seed, kStreamDatagen, 1);
    Dataset ds;
    ds.n_features = 5;
    ds.n_outputs = 1;
    ds.features.reserve(std::size_t(n) * 5);
    ds.targets.reserve(n);
    for (int i = 0; i < n; ++i) {
        double x[5];
        for (double& xi : x) {
            xi = rng.next_double();
            ds.features.push_back(xi);
        }
        double y = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
                   20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
        if (noise_std > 0.0) {
            y += noise_std * noise.normal();
        }
        ds.targets.push_back(y);
    }
    return ds;
}

Dataset load_csv(const std::string& path, const std::string& target_column, Task task) {
    const CsvTable table = read_csv(path);
    const auto it = std::find(table.header.begin(), table.header.end(), target_column);
    if (it == table.header.end()) {
        throw IngestError("target column '" + target_column + "' not found in " + path);
    }
    const std::size_t target_idx = static_cast<std::size_t>(it - table.header.begin());

    Dataset ds;
    ds.n_features = static_cast<int>(table.header.size()) - 1;

    if (task == Task::Classification) {
        std::map<double, int> classes;
        for (const auto& row : table.rows) {
            classes.emplace(row[target_idx], 0);
        }
        int next = 0;
        for (auto& [value, index] : classes) {
            index = next++;
        }
        ds.n_outputs = static_cast<int>(classes.size());
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c != target_idx) {
                    ds.features.push_back(row[c]);
                }
            }
            std::vector<double> onehot(ds.n_outputs, 0.0);
            onehot[classes.at(row[target_idx])] = 1.0;
            ds.targets.insert(ds.targets.end(), onehot.begin(), onehot.end());
        }
    } else {
        ds.n_outputs = 1;
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c != target_idx) {
                    ds.features.push_back(row[c]);
                }
            }
            ds.targets.push_back(row[target_idx]);
        }
    }
    return ds;
}

ScalingRecord fit_scaling(const Dataset& ds, bool scale_targets) {
    const int n = ds.n_samples();
    if (n == 0) {
        throw ConfigError("cannot fit normalization on an empty dataset");
    }
    ScalingRecord rec;
    rec.feat_min.assign(ds.n_features, std::numeric_limits<double>::infinity());
    rec.feat_max.assign(ds.n_features, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        const auto row = ds.row(i);
        for (int f = 0; f < ds.n_features; ++f) {
            rec.feat_min[f] = std::min(rec.feat_min[f], row[f]);
            rec.feat_max[f] = std::max(rec.feat_max[f], row[f]);
        }
    }
    for (int f = 0; f < ds.n_features; ++f) {
        if (!(rec.feat_max[f] > rec.feat_min[f])) {
            throw ConfigError("feature column " + std::to_string(f) +
                              " is constant; cannot normalize");
        }
    }
    rec.targets_scaled = scale_targets;
    if (scale_targets) {
        rec.target_min = *std::min_element(ds.targets.begin(), ds.targets.end());
        rec.target_max = *std::max_element(ds.targets.begin(), ds.targets.end());
        if (!(rec.target_max > rec.target_min)) {
            throw ConfigError("target column is constant; cannot normalize");
        }
    }
    return rec;
}

Dataset apply_scaling(const Dataset& ds, const ScalingRecord& rec) {
    constexpr double pi = std::numbers::pi;
    Dataset out = ds;
    const int n = ds.n_samples();
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < ds.n_features; ++f) {
            const double v = ds.features[std::size_t(i) * ds.n_features + f];
            out.features[std::size_t(i) * ds.n_features + f] =
                -pi + 2.0 * pi * (v - rec.feat_min[f]) / (rec.feat_max[f] - rec.feat_min[f]);
        }
    }
    if (rec.targets_scaled) {
        for (auto& t : out.targets) {
            t = -1.0 + 2.0 * (t - rec.target_min) / (rec.target_max - rec.target_min);
        }
    }
    out.scaling = rec;
    return out;
}

Dataset normalize(const Dataset& ds) {
    return apply_scaling(ds, fit_scaling(ds, ds.n_outputs == 1));
}

std::vector<double> denormalize_targets(const ScalingRecord& rec, std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    if (rec.targets_scaled) {
        for (auto& v : out) {
            v = rec.target_min + (v + 1.0) * 0.5 * (rec.target_max - rec.target_min);
        }
    }
    return out;
}

Dataset rescale_features(const Dataset& ds, double lo, double hi) {
    constexpr double pi = std::numbers::pi;
    if (!(hi > lo)) {
        throw ConfigError("feature range must satisfy hi > lo");
    }
    Dataset out = ds;
    for (auto& v : out.features) {
        v = lo + (hi - lo) * (v + pi) / (2.0 * pi);
    }
    return out;
}

namespace {

Dataset take_rows(const Dataset& ds, std::span<const int> indices) {
    Dataset out;
    out.n_features = ds.n_features;
    out.n_outputs = ds.n_outputs;
    out.features.reserve(indices.size() * ds.n_features);
    out.targets.reserve(indices.size() * ds.n_outputs);
    for (int i : indices) {
        const auto row = ds.row(i);
        out.features.insert(out.features.end(), row.begin(), row.end());
        const auto tgt = ds.target(i);
        out.targets.insert(out.targets.end(), tgt.begin(), tgt.end());
    }
    return out;
}

} // namespace

SplitSet split(const Dataset& ds, SplitRatios ratios, std::uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }
    const int n = ds.n_samples();
    const int n_train = static_cast<int>(std::floor(n * ratios.train));
    const int n_val = static_cast<int>(std::floor(n * ratios.val));
    const int n_test = n - n_train - n_val;
    if (n_train < 1 || n_val < 1 || n_test < 1) {
        throw ConfigError("split produces an empty slice (" + std::to_string(n_train) + "/" +
                          std::to_string(n_val) + "/" + std::to_string(n_test) + ")");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    RngStream rng = RngStream::derive(seed, kStreamSplit, 0);
    shuffle(order, rng);

    SplitSet out;
    out.train = take_rows(ds, std::span(order).subspan(0, n_train));
    out.val = take_rows(ds, std::span(order).subspan(n_train, n_val));
    out.test = take_rows(ds, std::span(order).subspan(n_train + n_val, n_test));

    // Statistics come from the train slice only; val/test reuse them.
    const ScalingRecord rec = fit_scaling(out.train, ds.n_outputs == 1);
    out.train = apply_scaling(out.train, rec);
    out.val = apply_scaling(out.val, rec);
    out.test = apply_scaling(out.test, rec);
    return out;
}

} // namespace vqc
