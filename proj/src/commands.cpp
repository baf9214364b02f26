#include "vqc/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "vqc/errors.hpp"
#include "vqc/io.hpp"

namespace vqc {

namespace {

namespace fs = std::filesystem;

RunConfig load_with_overrides(const std::string& config_path, const CliOverrides& overrides) {
    RunConfig cfg = load_run_config(config_path);
    if (overrides.seed) {
        cfg.train.seed = *overrides.seed;
    }
    if (overrides.workers) {
        cfg.train.workers = *overrides.workers;
    }
    if (overrides.out_dir) {
        cfg.out_dir = *overrides.out_dir;
    }
    if (cfg.out_dir.empty()) {
        cfg.out_dir = (fs::path("runs") / fs::path(config_path).stem()).string();
    }
    return cfg;
}

Dataset build_dataset(const DatasetConfig& ds, Task task) {
    switch (ds.kind) {
    case DatasetConfig::Kind::Friedman:
        return gen_friedman(ds.n, ds.noise_std, ds.seed);
    case DatasetConfig::Kind::Csv:
        return load_csv(ds.path, ds.target, task);
    case DatasetConfig::Kind::None:
        throw ConfigError("this command needs a dataset");
    }
    throw ConfigError("unreachable dataset kind");
}

std::vector<PauliZObservable> build_observables(Task task, int n_qubits, int n_outputs) {
    if (task == Task::Classification) {
        if (n_outputs > n_qubits) {
            throw ConfigError("need at least one qubit per class");
        }
        std::vector<PauliZObservable> obs;
        for (int c = 0; c < n_outputs; ++c) {
            obs.push_back({1ULL << c});
        }
        return obs;
    }
    return {PauliZObservable::all(n_qubits)};
}

std::string counters_json(const EvalCounters& c) {
    std::ostringstream out;
    out << "{\"gradient\": " << c.gradient << ", \"forward\": " << c.forward
        << ", \"validation\": " << c.validation << ", \"total\": " << c.total() << "}";
    return out.str();
}

void write_epoch_csv(const std::string& path, const TrainReport& report) {
    std::ostringstream out;
    out << "epoch,train_loss,val_metric,grad_evals,forward_evals,val_evals,k_epoch\n";
    for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
        out << e << ',' << format_real(report.train_loss[e]) << ','
            << format_real(report.val_metric[e]) << ',' << report.counters[e].gradient << ','
            << report.counters[e].forward << ',' << report.counters[e].validation << ','
            << report.k_epoch[e] << '\n';
    }
    write_text_file(path, out.str());
}

void write_histogram_csv(const std::string& path, const GradientHistogram& hist) {
    std::ostringstream out;
    out << "bin_left,bin_right,count\n";
    out << "-inf," << format_real(GradientHistogram::kLo) << ',' << hist.counts[0] << '\n';
    for (int b = 0; b < GradientHistogram::kBins; ++b) {
        out << format_real(hist.bin_left(b)) << ',' << format_real(hist.bin_right(b)) << ','
            << hist.counts[1 + b] << '\n';
    }
    out << format_real(GradientHistogram::kHi) << ",inf,"
        << hist.counts[GradientHistogram::kBins + 1] << '\n';
    write_text_file(path, out.str());
}

void write_summary_json(const std::string& path, const RunConfig& cfg,
                        const TrainReport& report) {
    nlohmann::json doc;
    doc["config"] = echo_config(cfg);
    doc["convergence_epoch"] = report.convergence_epoch;
    doc["best_val_metric"] = report.val_metric[report.convergence_epoch];
    doc["final_train_loss"] = report.train_loss.back();
    doc["test_metric"] = report.test_metric;
    doc["counters"] = nlohmann::json::parse(counters_json(report.totals));
    write_text_file(path, doc.dump(2) + "\n");
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const NumericFault& e) {
        std::cerr << "numeric fault: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "ingest error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

Experiment prepare_experiment(const RunConfig& cfg) {
    Experiment ex;
    ex.cfg = cfg;
    if (cfg.train.task == Task::Toy) {
        ex.circuit = build_layered(cfg.ansatz);
        ex.observables = {PauliZObservable::all(cfg.ansatz.n_qubits)};
        return ex;
    }

    const Dataset raw = build_dataset(cfg.dataset, cfg.train.task);
    AnsatzSpec spec = cfg.ansatz;
    if (std::holds_alternative<AngleOnce>(spec.encoding) && raw.n_features != spec.n_qubits) {
        throw ConfigError("angle encoding maps one feature per qubit; dataset has " +
                          std::to_string(raw.n_features) + " features for " +
                          std::to_string(spec.n_qubits) + " qubits");
    }
    if (const auto* inc = std::get_if<IncrementalUpload>(&spec.encoding)) {
        if (inc->n_features != raw.n_features) {
            throw ConfigError("ansatz.n_features (" + std::to_string(inc->n_features) +
                              ") does not match the dataset (" +
                              std::to_string(raw.n_features) + ")");
        }
    }
    ex.circuit = build_layered(spec);
    ex.data = split(raw, cfg.split_ratios, cfg.train.seed);
    constexpr double pi = 3.14159265358979323846;
    if (cfg.dataset.feature_lo != -pi || cfg.dataset.feature_hi != pi) {
        ex.data.train = rescale_features(ex.data.train, cfg.dataset.feature_lo, cfg.dataset.feature_hi);
        ex.data.val = rescale_features(ex.data.val, cfg.dataset.feature_lo, cfg.dataset.feature_hi);
        ex.data.test = rescale_features(ex.data.test, cfg.dataset.feature_lo, cfg.dataset.feature_hi);
    }
    ex.observables =
        build_observables(cfg.train.task, cfg.ansatz.n_qubits, ex.data.train.n_outputs);
    return ex;
}

CountPrediction predict_counts(const RunConfig& cfg) {
    CountPrediction pred;
    const Experiment ex = prepare_experiment(cfg);
    const int n_params = ex.circuit.n_params;
    const auto& train_cfg = cfg.train;

    if (train_cfg.task == Task::Toy) {
        pred.totals.forward = static_cast<std::uint64_t>(train_cfg.epochs) + 1;
        for (int step = 0; step < train_cfg.epochs; ++step) {
            if (const auto* g = std::get_if<GuidedEstimator>(&train_cfg.estimator)) {
                const auto schedule = make_schedule(n_params, g->tau, train_cfg.epochs, g->epsilon);
                pred.totals.gradient += 2ULL * n_params + 2ULL * schedule.k_at(step);
            } else if (const auto* s = std::get_if<SpsaEstimator>(&train_cfg.estimator)) {
                pred.totals.gradient += 2ULL * s->k;
            } else {
                pred.totals.gradient += 2ULL * n_params;
            }
        }
        pred.ps_baseline_gradient = 2ULL * n_params * train_cfg.epochs;
        pred.gradient_ratio =
            static_cast<double>(pred.totals.gradient) / pred.ps_baseline_gradient;
        return pred;
    }

    const int n_train = ex.data.train.n_samples();
    const int n_val = ex.data.val.n_samples();
    const int n_test = ex.data.test.n_samples();

    GuidedSpsaSchedule schedule;
    const auto* guided = std::get_if<GuidedEstimator>(&train_cfg.estimator);
    if (guided) {
        schedule = make_schedule(n_params, guided->tau, train_cfg.epochs, guided->epsilon);
    }

    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        for (int start = 0; start < n_train; start += train_cfg.batch_size) {
            const int batch = std::min(train_cfg.batch_size, n_train - start);
            if (guided) {
                const int n_ps = ps_partition_size(guided->tau, batch);
                pred.totals.gradient += static_cast<std::uint64_t>(n_ps) * 2 * n_params +
                                        static_cast<std::uint64_t>(batch - n_ps) * 2 *
                                            schedule.k_at(epoch);
            } else if (const auto* s = std::get_if<SpsaEstimator>(&train_cfg.estimator)) {
                pred.totals.gradient += static_cast<std::uint64_t>(batch) * 2 * s->k;
            } else {
                pred.totals.gradient += static_cast<std::uint64_t>(batch) * 2 * n_params;
            }
        }
        pred.totals.forward += n_train;
        pred.totals.validation += n_val;
    }
    pred.totals.validation += n_test; // final held-out pass

    pred.ps_baseline_gradient =
        static_cast<std::uint64_t>(train_cfg.epochs) * n_train * 2 * n_params;
    pred.gradient_ratio = static_cast<double>(pred.totals.gradient) / pred.ps_baseline_gradient;
    return pred;
}

int cmd_train(const std::string& config_path, const CliOverrides& overrides) {
    return run_guarded([&] {
        const RunConfig cfg = load_with_overrides(config_path, overrides);
        if (cfg.train.task == Task::Toy) {
            throw ConfigError("use the toy command for toy configs");
        }
        const Experiment ex = prepare_experiment(cfg);
        const TrainReport report = train(cfg.train, ex.data, ex.circuit, ex.observables);

        fs::create_directories(cfg.out_dir);
        write_epoch_csv((fs::path(cfg.out_dir) / "epoch_metrics.csv").string(), report);
        write_summary_json((fs::path(cfg.out_dir) / "summary.json").string(), cfg, report);
        for (const auto& [epoch, hist] : report.histograms) {
            write_histogram_csv(
                (fs::path(cfg.out_dir) / ("hist_epoch_" + std::to_string(epoch) + ".csv"))
                    .string(),
                hist);
        }
        std::cout << "epochs: " << report.train_loss.size()
                  << "  best val: " << format_real(report.val_metric[report.convergence_epoch])
                  << " @ epoch " << report.convergence_epoch
                  << "  test: " << format_real(report.test_metric)
                  << "  circuits: " << counters_json(report.totals) << "\n";
        return 0;
    });
}

int cmd_toy(const std::string& config_path, const CliOverrides& overrides) {
    return run_guarded([&] {
        const RunConfig cfg = load_with_overrides(config_path, overrides);
        if (cfg.train.task != Task::Toy) {
            throw ConfigError("the toy command needs task = toy");
        }
        const Experiment ex = prepare_experiment(cfg);
        const ToyResult result = toy_minimize(cfg.train, ex.circuit);

        fs::create_directories(cfg.out_dir);
        std::ostringstream out;
        out << "step,x,loss\n";
        for (const auto& row : result.trajectory) {
            out << row.step << ',' << format_real(row.x) << ',' << format_real(row.loss) << '\n';
        }
        write_text_file((fs::path(cfg.out_dir) / "trajectory.csv").string(), out.str());

        nlohmann::json doc;
        doc["config"] = echo_config(cfg);
        doc["final_x"] = result.trajectory.back().x;
        doc["final_loss"] = result.trajectory.back().loss;
        doc["counters"] = nlohmann::json::parse(counters_json(result.totals));
        write_text_file((fs::path(cfg.out_dir) / "summary.json").string(), doc.dump(2) + "\n");

        std::cout << "steps: " << result.trajectory.size() - 1
                  << "  final x: " << format_real(result.trajectory.back().x)
                  << "  final loss: " << format_real(result.trajectory.back().loss) << "\n";
        return 0;
    });
}

int cmd_gradcheck(const std::string& config_path, const CliOverrides& overrides) {
    return run_guarded([&] {
        const RunConfig cfg = load_with_overrides(config_path, overrides);
        if (!std::holds_alternative<Ideal>(cfg.train.mode)) {
            std::cout << "gradcheck skipped: estimates are stochastic under a sampled mode\n";
            return 0;
        }
        const Experiment ex = prepare_experiment(cfg);
        const int n_params = ex.circuit.n_params;

        RngStream rng = RngStream::derive(cfg.train.seed, kStreamInit, 1);
        std::vector<double> params(n_params);
        for (auto& p : params) {
            p = rng.uniform(0.0, std::numbers::pi);
        }
        std::vector<double> inputs(ex.circuit.n_inputs);
        for (auto& x : inputs) {
            x = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }

        Evaluator ev(ex.circuit, ex.observables, cfg.train.mode, cfg.train.seed);
        const Jacobian ps = param_shift_jacobian(ev, inputs, params).jacobian;
        const Jacobian fd =
            finite_diff_jacobian(ex.circuit, inputs, params, ex.observables, 1e-4);

        double max_dev = 0.0;
        for (std::size_t i = 0; i < ps.data.size(); ++i) {
            max_dev = std::max(max_dev, std::abs(ps.data[i] - fd.data[i]));
        }

        // SPSA sanity: relative Frobenius error of the k-sample mean.
        RngStream dir = RngStream::derive(cfg.train.seed, kStreamSpsaDirections, 0);
        const double ps_norm = ps.frobenius_norm();
        std::cout << "max |shift - finite difference|: " << format_real(max_dev) << "\n";
        for (const int k : {100, 1000}) {
            const Jacobian spsa =
                spsa_jacobian(ev, inputs, params, SpsaConfig{k, 0.01, false}, dir).jacobian;
            double err = 0.0;
            for (std::size_t i = 0; i < spsa.data.size(); ++i) {
                const double d = spsa.data[i] - ps.data[i];
                err += d * d;
            }
            std::cout << "spsa k=" << k
                      << " relative error: " << format_real(std::sqrt(err) / ps_norm) << "\n";
        }

        constexpr double tolerance = 1e-6;
        if (max_dev >= tolerance) {
            std::cerr << "gradcheck failed: deviation " << format_real(max_dev)
                      << " >= " << format_real(tolerance) << "\n";
            return 1;
        }
        return 0;
    });
}

int cmd_count(const std::string& config_path, const CliOverrides& overrides) {
    return run_guarded([&] {
        const RunConfig cfg = load_with_overrides(config_path, overrides);
        const CountPrediction pred = predict_counts(cfg);
        std::cout << "predicted circuit evaluations\n"
                  << "  gradient:    " << pred.totals.gradient << "\n"
                  << "  forward:     " << pred.totals.forward << "\n"
                  << "  validation:  " << pred.totals.validation << "\n"
                  << "  total:       " << pred.totals.total() << "\n"
                  << "parameter-shift baseline gradient: " << pred.ps_baseline_gradient << "\n"
                  << "gradient ratio vs parameter shift: " << format_real(pred.gradient_ratio)
                  << "\n";
        return 0;
    });
}

} // namespace vqc
