#pragma once

#include <optional>
#include <string>

#include "vqc/config.hpp"
#include "vqc/train.hpp"

namespace vqc {

struct CliOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

/// Circuit evaluations a run will consume, computed without simulating.
struct CountPrediction {
    EvalCounters totals;
    std::uint64_t ps_baseline_gradient = 0; // same run differentiated by parameter shift
    double gradient_ratio = 1.0;            // totals.gradient / ps_baseline_gradient
};

/// Materialized run inputs shared by the commands and tests.
struct Experiment {
    RunConfig cfg;
    SplitSet data;
    ParamCircuit circuit;
    std::vector<PauliZObservable> observables;
};

Experiment prepare_experiment(const RunConfig& cfg);

CountPrediction predict_counts(const RunConfig& cfg);

// Exit codes: 0 success, 1 numeric fault or tolerance breach, 2 invalid config.
int cmd_train(const std::string& config_path, const CliOverrides& overrides = {});
int cmd_toy(const std::string& config_path, const CliOverrides& overrides = {});
int cmd_gradcheck(const std::string& config_path, const CliOverrides& overrides = {});
int cmd_count(const std::string& config_path, const CliOverrides& overrides = {});

} // namespace vqc
