#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vqc/circuit.hpp"
#include "vqc/data.hpp"
#include "vqc/train.hpp"

namespace vqc {

struct DatasetConfig {
    enum class Kind { Friedman, Csv, None };
    Kind kind = Kind::Friedman;
    int n = 500;
    double noise_std = 0.0;
    std::uint64_t seed = 7;
    std::string path;
    std::string target;
    // window the encoders see after [-pi, pi] normalization
    double feature_lo = -3.14159265358979323846;
    double feature_hi = 3.14159265358979323846;
};

/// Fully resolved run description; mirrors the JSON config documents.
struct RunConfig {
    TrainConfig train;
    AnsatzSpec ansatz;
    DatasetConfig dataset;
    SplitRatios split_ratios;
    std::string out_dir;
};

/// Parse and validate a config document. Unknown keys are rejected with a
/// field-level message; relative dataset paths resolve against `config_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::string& config_dir = ".");

RunConfig load_run_config(const std::string& path);

/// The fully-resolved document echoed into every summary; parses back through
/// parse_run_config unchanged.
nlohmann::json echo_config(const RunConfig& cfg);

} // namespace vqc
