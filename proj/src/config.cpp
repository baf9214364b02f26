#include "vqc/config.hpp"

#include <filesystem>
#include <numbers>
#include <fstream>
#include <set>

#include "vqc/errors.hpp"

namespace vqc {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& scope) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unknown key '" + scope + key + "'");
        }
    }
}

const json& require(const json& obj, const std::string& key, const std::string& scope) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError("missing key '" + scope + key + "'");
    }
    return *it;
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : it->get<T>();
}

Task parse_task(const std::string& s) {
    if (s == "regression") {
        return Task::Regression;
    }
    if (s == "classification") {
        return Task::Classification;
    }
    if (s == "toy") {
        return Task::Toy;
    }
    throw ConfigError("task must be regression|classification|toy, got '" + s + "'");
}

OptimKind parse_optimizer(const std::string& s) {
    if (s == "sgd") {
        return OptimKind::SGD;
    }
    if (s == "adam") {
        return OptimKind::Adam;
    }
    if (s == "amsgrad") {
        return OptimKind::AMSGrad;
    }
    if (s == "rmsprop") {
        return OptimKind::RMSProp;
    }
    throw ConfigError("optimizer must be sgd|adam|amsgrad|rmsprop, got '" + s + "'");
}

DatasetConfig parse_dataset(const json& obj, const std::string& config_dir) {
    reject_unknown_keys(obj, {"kind", "n", "noise_std", "seed", "path", "target", "feature_range"},
                        "dataset.");
    DatasetConfig ds;
    if (obj.contains("feature_range")) {
        const auto range = obj["feature_range"].get<std::vector<double>>();
        if (range.size() != 2 || !(range[1] > range[0])) {
            throw ConfigError("dataset.feature_range must be [lo, hi] with hi > lo");
        }
        ds.feature_lo = range[0];
        ds.feature_hi = range[1];
    }
    const std::string kind = require(obj, "kind", "dataset.").get<std::string>();
    if (kind == "friedman") {
        ds.kind = DatasetConfig::Kind::Friedman;
        ds.n = get_or(obj, "n", 500);
        ds.noise_std = get_or(obj, "noise_std", 0.0);
        ds.seed = get_or<std::uint64_t>(obj, "seed", 7);
        if (ds.n < 1) {
            throw ConfigError("dataset.n must be >= 1");
        }
    } else if (kind == "csv") {
        ds.kind = DatasetConfig::Kind::Csv;
        ds.path = require(obj, "path", "dataset.").get<std::string>();
        ds.target = require(obj, "target", "dataset.").get<std::string>();
        std::filesystem::path p(ds.path);
        if (p.is_relative()) {
            ds.path = (std::filesystem::path(config_dir) / p).lexically_normal().string();
        }
    } else if (kind == "none") {
        ds.kind = DatasetConfig::Kind::None;
    } else {
        throw ConfigError("dataset.kind must be friedman|csv|none, got '" + kind + "'");
    }
    return ds;
}

AnsatzSpec parse_ansatz(const json& obj) {
    reject_unknown_keys(obj, {"n_qubits", "n_layers", "encoding", "n_features", "entangle"},
                        "ansatz.");
    AnsatzSpec spec;
    spec.n_qubits = require(obj, "n_qubits", "ansatz.").get<int>();
    spec.n_layers = get_or(obj, "n_layers", 5);
    spec.entangle = get_or(obj, "entangle", true);
    const std::string enc = get_or<std::string>(obj, "encoding", "angle");
    if (enc == "none") {
        spec.encoding = NoEncoding{};
        if (obj.contains("n_features")) {
            throw ConfigError("ansatz.n_features is only valid with incremental encoding");
        }
    } else if (enc == "angle") {
        spec.encoding = AngleOnce{};
        if (obj.contains("n_features")) {
            throw ConfigError("ansatz.n_features is only valid with incremental encoding");
        }
    } else if (enc == "incremental") {
        spec.encoding = IncrementalUpload{require(obj, "n_features", "ansatz.").get<int>()};
    } else {
        throw ConfigError("ansatz.encoding must be none|angle|incremental, got '" + enc + "'");
    }
    return spec;
}

ExecutionMode parse_mode(const json& obj) {
    reject_unknown_keys(obj, {"kind", "shots", "p1", "p2", "p_readout"}, "mode.");
    const std::string kind = require(obj, "kind", "mode.").get<std::string>();
    if (kind == "ideal") {
        return Ideal{};
    }
    if (kind == "shots") {
        Shots s;
        s.n = get_or(obj, "shots", 1024);
        if (s.n < 1) {
            throw ConfigError("mode.shots must be >= 1");
        }
        return s;
    }
    if (kind == "noisy") {
        Noisy n;
        n.shots = get_or(obj, "shots", 1024);
        n.model.p1 = get_or(obj, "p1", 0.0);
        n.model.p2 = get_or(obj, "p2", 0.0);
        n.model.p_readout = get_or(obj, "p_readout", 0.0);
        if (n.shots < 1) {
            throw ConfigError("mode.shots must be >= 1");
        }
        for (const double p : {n.model.p1, n.model.p2, n.model.p_readout}) {
            if (p < 0.0 || p >= 1.0) {
                throw ConfigError("noise probabilities must lie in [0, 1)");
            }
        }
        return n;
    }
    throw ConfigError("mode.kind must be ideal|shots|noisy, got '" + kind + "'");
}

EstimatorConfig parse_estimator(const json& obj, const ExecutionMode& mode) {
    reject_unknown_keys(obj, {"kind", "k", "c", "tau", "epsilon", "share_directions"},
                        "estimator.");
    const std::string kind = require(obj, "kind", "estimator.").get<std::string>();
    if (kind == "param_shift") {
        return ParamShiftEstimator{};
    }
    if (kind == "spsa") {
        SpsaEstimator e;
        e.k = require(obj, "k", "estimator.").get<int>();
        e.c = get_or(obj, "c", 0.05);
        e.share_directions = get_or(obj, "share_directions", false);
        if (e.k < 1 || e.c <= 0.0) {
            throw ConfigError("estimator needs k >= 1 and c > 0");
        }
        return e;
    }
    if (kind == "guided") {
        GuidedEstimator e;
        e.tau = require(obj, "tau", "estimator.").get<double>();
        // Damping defaults to 1 on the exact simulator and 0.5 under sampling.
        e.epsilon = get_or(obj, "epsilon",
                           std::holds_alternative<Ideal>(mode) ? 1.0 : 0.5);
        e.c = get_or(obj, "c", 0.05);
        if (e.tau < 0.0 || e.tau > 1.0) {
            throw ConfigError("estimator.tau must lie in [0, 1]");
        }
        if (e.epsilon <= 0.0 || e.epsilon > 1.0) {
            throw ConfigError("estimator.epsilon must lie in (0, 1]");
        }
        if (e.c <= 0.0) {
            throw ConfigError("estimator.c must be > 0");
        }
        return e;
    }
    throw ConfigError("estimator.kind must be param_shift|spsa|guided, got '" + kind + "'");
}

InitConfig parse_init(const json& obj) {
    reject_unknown_keys(obj, {"kind", "seed", "lo", "hi"}, "init.");
    InitConfig init;
    const std::string kind = get_or<std::string>(obj, "kind", "uniform");
    if (kind == "uniform") {
        init.kind = InitKind::Uniform;
    } else if (kind == "zeros") {
        init.kind = InitKind::Zeros;
        if (obj.contains("lo") || obj.contains("hi")) {
            throw ConfigError("init.lo/init.hi only apply to uniform initialization");
        }
    } else {
        throw ConfigError("init.kind must be uniform|zeros, got '" + kind + "'");
    }
    init.lo = get_or(obj, "lo", 0.0);
    init.hi = get_or(obj, "hi", std::numbers::pi);
    if (!(init.hi > init.lo) && kind == "uniform") {
        throw ConfigError("init.hi must exceed init.lo");
    }
    if (obj.contains("seed")) {
        init.seed = obj["seed"].get<std::uint64_t>();
    }
    return init;
}

} // namespace

RunConfig parse_run_config(const json& doc, const std::string& config_dir) {
    if (!doc.is_object()) {
        throw ConfigError("config root must be an object");
    }
    reject_unknown_keys(doc,
                        {"task", "dataset", "ansatz", "estimator", "mode", "epochs", "batch_size",
                         "learning_rate", "optimizer", "init", "seed", "split",
                         "histogram_epochs", "out_dir", "workers"},
                        "");

    RunConfig cfg;
    cfg.train.task = parse_task(require(doc, "task", "").get<std::string>());
    cfg.dataset = doc.contains("dataset") ? parse_dataset(doc["dataset"], config_dir)
                                          : DatasetConfig{};
    if (cfg.train.task == Task::Toy) {
        cfg.dataset.kind = DatasetConfig::Kind::None;
    }
    cfg.ansatz = parse_ansatz(require(doc, "ansatz", ""));
    cfg.train.mode = doc.contains("mode") ? parse_mode(doc["mode"]) : ExecutionMode{Ideal{}};
    cfg.train.estimator = parse_estimator(require(doc, "estimator", ""), cfg.train.mode);
    cfg.train.epochs = get_or(doc, "epochs", 100);
    cfg.train.batch_size = get_or(doc, "batch_size", 32);
    cfg.train.learning_rate = get_or(doc, "learning_rate", 0.01);
    cfg.train.optimizer = parse_optimizer(get_or<std::string>(doc, "optimizer", "adam"));
    cfg.train.init = doc.contains("init") ? parse_init(doc["init"]) : InitConfig{};
    cfg.train.seed = get_or<std::uint64_t>(doc, "seed", 0);
    cfg.train.workers = get_or(doc, "workers", 1);
    if (doc.contains("histogram_epochs")) {
        cfg.train.histogram_epochs = doc["histogram_epochs"].get<std::vector<int>>();
    }
    if (doc.contains("split")) {
        const auto ratios = doc["split"].get<std::vector<double>>();
        if (ratios.size() != 3) {
            throw ConfigError("split must be [train, val, test]");
        }
        cfg.split_ratios = {ratios[0], ratios[1], ratios[2]};
    }
    cfg.out_dir = get_or<std::string>(doc, "out_dir", "");

    if (cfg.train.epochs < 1 || cfg.train.batch_size < 1) {
        throw ConfigError("epochs and batch_size must be >= 1");
    }
    if (cfg.train.workers < 1) {
        throw ConfigError("workers must be >= 1");
    }
    if (cfg.train.task == Task::Toy && !std::holds_alternative<NoEncoding>(cfg.ansatz.encoding)) {
        throw ConfigError("the toy task needs ansatz.encoding = none");
    }
    if (cfg.train.task != Task::Toy && cfg.dataset.kind == DatasetConfig::Kind::None) {
        throw ConfigError("regression/classification require a dataset");
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(doc, std::filesystem::path(path).parent_path().string());
}

nlohmann::json echo_config(const RunConfig& cfg) {
    json doc;
    switch (cfg.train.task) {
    case Task::Regression:
        doc["task"] = "regression";
        break;
    case Task::Classification:
        doc["task"] = "classification";
        break;
    case Task::Toy:
        doc["task"] = "toy";
        break;
    }

    json ds;
    switch (cfg.dataset.kind) {
    case DatasetConfig::Kind::Friedman:
        ds["kind"] = "friedman";
        ds["n"] = cfg.dataset.n;
        ds["noise_std"] = cfg.dataset.noise_std;
        ds["seed"] = cfg.dataset.seed;
        break;
    case DatasetConfig::Kind::Csv:
        ds["kind"] = "csv";
        ds["path"] = cfg.dataset.path;
        ds["target"] = cfg.dataset.target;
        break;
    case DatasetConfig::Kind::None:
        ds["kind"] = "none";
        break;
    }
    if (cfg.dataset.kind != DatasetConfig::Kind::None) {
        ds["feature_range"] = {cfg.dataset.feature_lo, cfg.dataset.feature_hi};
    }
    doc["dataset"] = ds;

    json ansatz;
    ansatz["n_qubits"] = cfg.ansatz.n_qubits;
    ansatz["n_layers"] = cfg.ansatz.n_layers;
    ansatz["entangle"] = cfg.ansatz.entangle;
    if (std::holds_alternative<NoEncoding>(cfg.ansatz.encoding)) {
        ansatz["encoding"] = "none";
    } else if (std::holds_alternative<AngleOnce>(cfg.ansatz.encoding)) {
        ansatz["encoding"] = "angle";
    } else {
        ansatz["encoding"] = "incremental";
        ansatz["n_features"] = std::get<IncrementalUpload>(cfg.ansatz.encoding).n_features;
    }
    doc["ansatz"] = ansatz;

    json est;
    if (std::holds_alternative<ParamShiftEstimator>(cfg.train.estimator)) {
        est["kind"] = "param_shift";
    } else if (const auto* spsa = std::get_if<SpsaEstimator>(&cfg.train.estimator)) {
        est["kind"] = "spsa";
        est["k"] = spsa->k;
        est["c"] = spsa->c;
        est["share_directions"] = spsa->share_directions;
    } else {
        const auto& g = std::get<GuidedEstimator>(cfg.train.estimator);
        est["kind"] = "guided";
        est["tau"] = g.tau;
        est["epsilon"] = g.epsilon;
        est["c"] = g.c;
    }
    doc["estimator"] = est;

    json mode;
    if (std::holds_alternative<Ideal>(cfg.train.mode)) {
        mode["kind"] = "ideal";
    } else if (const auto* shots = std::get_if<Shots>(&cfg.train.mode)) {
        mode["kind"] = "shots";
        mode["shots"] = shots->n;
    } else {
        const auto& noisy = std::get<Noisy>(cfg.train.mode);
        mode["kind"] = "noisy";
        mode["shots"] = noisy.shots;
        mode["p1"] = noisy.model.p1;
        mode["p2"] = noisy.model.p2;
        mode["p_readout"] = noisy.model.p_readout;
    }
    doc["mode"] = mode;

    doc["epochs"] = cfg.train.epochs;
    doc["batch_size"] = cfg.train.batch_size;
    doc["learning_rate"] = cfg.train.learning_rate;
    switch (cfg.train.optimizer) {
    case OptimKind::SGD:
        doc["optimizer"] = "sgd";
        break;
    case OptimKind::Adam:
        doc["optimizer"] = "adam";
        break;
    case OptimKind::AMSGrad:
        doc["optimizer"] = "amsgrad";
        break;
    case OptimKind::RMSProp:
        doc["optimizer"] = "rmsprop";
        break;
    }

    json init;
    init["kind"] = cfg.train.init.kind == InitKind::Zeros ? "zeros" : "uniform";
    if (cfg.train.init.kind == InitKind::Uniform) {
        init["lo"] = cfg.train.init.lo;
        init["hi"] = cfg.train.init.hi;
    }
    if (cfg.train.init.seed) {
        init["seed"] = *cfg.train.init.seed;
    }
    doc["init"] = init;

    doc["seed"] = cfg.train.seed;
    doc["split"] = {cfg.split_ratios.train, cfg.split_ratios.val, cfg.split_ratios.test};
    if (!cfg.train.histogram_epochs.empty()) {
        doc["histogram_epochs"] = cfg.train.histogram_epochs;
    }
    if (!cfg.out_dir.empty()) {
        doc["out_dir"] = cfg.out_dir;
    }
    doc["workers"] = cfg.train.workers;
    return doc;
}

} // namespace vqc
