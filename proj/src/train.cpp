#include "vqc/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "vqc/errors.hpp"

namespace vqc {

namespace {

/// Index-sharded parallel loop. Results must be written to caller-owned slots;
/// the first worker exception is rethrown after join.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const int n_threads = std::min(workers, n);
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += n_threads) {
                    fn(i);
                }
            } catch (...) {
                const std::scoped_lock lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        });
    }
    pool.clear(); // join
    if (error) {
        std::rethrow_exception(error);
    }
}

std::vector<double> initial_params(const TrainConfig& cfg, int n_params) {
    std::vector<double> params(n_params, 0.0);
    if (cfg.init.kind == InitKind::Uniform) {
        const std::uint64_t seed = cfg.init.seed.value_or(cfg.seed);
        RngStream rng = RngStream::derive(seed, kStreamInit, 0);
        for (auto& p : params) {
            p = rng.uniform(cfg.init.lo, cfg.init.hi);
        }
    }
    return params;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct MetricAccessor {
    Task task;

    double operator()(std::span<const double> pred, std::span<const double> target) const {
        if (task == Task::Classification) {
            const auto pred_max = std::max_element(pred.begin(), pred.end());
            const auto target_max = std::max_element(target.begin(), target.end());
            const bool correct = (pred_max - pred.begin()) == (target_max - target.begin());
            return correct ? 0.0 : 1.0;
        }
        return std::abs(pred[0] - target[0]);
    }
};

/// Mean absolute error (regression) or misclassification rate on a dataset.
double evaluate_metric(Evaluator& ev, const Dataset& ds, std::span<const double> params,
                       Task task, int workers) {
    const int n = ds.n_samples();
    const std::uint64_t base = ev.reserve(static_cast<std::uint64_t>(n));
    std::vector<double> per_sample(n, 0.0);
    const MetricAccessor metric{task};
    parallel_for(n, workers, [&](int i) {
        const auto pred = ev.eval_at(base + i, ds.row(i), params);
        per_sample[i] = metric(pred, ds.target(i));
    });
    return std::accumulate(per_sample.begin(), per_sample.end(), 0.0) / n;
}

struct BatchPlan {
    int n_ps = 0;            // leading samples differentiated by parameter shift
    int k = 0;               // SPSA samples per remaining data point
    double c = 0.05;
    double epsilon = 1.0;
    bool suppress = false;   // rescale SPSA rows to epsilon * sigma
    bool share_directions = false;
};

BatchPlan plan_batch(const EstimatorConfig& estimator, int batch, int k_epoch) {
    BatchPlan plan;
    if (std::holds_alternative<ParamShiftEstimator>(estimator)) {
        plan.n_ps = batch;
    } else if (const auto* spsa = std::get_if<SpsaEstimator>(&estimator)) {
        plan.n_ps = 0;
        plan.k = spsa->k;
        plan.c = spsa->c;
        plan.share_directions = spsa->share_directions;
    } else {
        const auto& guided = std::get<GuidedEstimator>(estimator);
        plan.n_ps = ps_partition_size(guided.tau, batch);
        plan.k = k_epoch;
        plan.c = guided.c;
        plan.epsilon = guided.epsilon;
        plan.suppress = plan.n_ps > 0; // tau = 0 degenerates to plain SPSA
    }
    return plan;
}

} // namespace

void GradientHistogram::add(double g) {
    ++total;
    if (g < kLo) {
        ++counts[0];
    } else if (g >= kHi) {
        ++counts[kBins + 1];
    } else {
        const int bin = static_cast<int>((g - kLo) / (kHi - kLo) * kBins);
        ++counts[1 + std::min(bin, kBins - 1)];
    }
}

void GradientHistogram::add_all(std::span<const double> values) {
    for (double v : values) {
        add(v);
    }
}

double GradientHistogram::bin_left(int bin) const {
    return kLo + (kHi - kLo) * bin / kBins;
}

double GradientHistogram::bin_right(int bin) const {
    return kLo + (kHi - kLo) * (bin + 1) / kBins;
}

double GradientHistogram::central_fraction() const {
    if (total == 0) {
        return 0.0;
    }
    return static_cast<double>(counts[1 + kBins / 2]) / static_cast<double>(total);
}

LossResult loss_and_error(Task task, const std::vector<std::vector<double>>& predictions,
                          const Dataset& ds, std::span<const int> indices) {
    const int batch = static_cast<int>(predictions.size());
    if (batch == 0) {
        throw ConfigError("empty batch");
    }
    LossResult result;
    result.errors.resize(batch);

    switch (task) {
    case Task::Regression: {
        for (int m = 0; m < batch; ++m) {
            const double yhat = predictions[m][0];
            const double y = ds.target(indices[m])[0];
            result.loss += (yhat - y) * (yhat - y);
            result.errors[m] = {2.0 * (yhat - y) / batch};
        }
        result.loss /= batch;
        break;
    }
    case Task::Classification: {
        for (int m = 0; m < batch; ++m) {
            const auto target = ds.target(indices[m]);
            const int n_classes = static_cast<int>(target.size());
            result.errors[m].resize(n_classes);
            for (int c = 0; c < n_classes; ++c) {
                const double p = sigmoid(predictions[m][c]);
                const double y = target[c];
                // per-class binary cross-entropy, clipped away from log(0)
                constexpr double tiny = 1e-12;
                result.loss -= y * std::log(std::max(p, tiny)) +
                               (1.0 - y) * std::log(std::max(1.0 - p, tiny));
                result.errors[m][c] = (p - y) / batch;
            }
        }
        result.loss /= batch;
        break;
    }
    case Task::Toy: {
        for (int m = 0; m < batch; ++m) {
            const double x = std::numbers::pi * predictions[m][0];
            result.loss += toy_loss(x);
            result.errors[m] = {std::numbers::pi * toy_loss_grad(x) / batch};
        }
        result.loss /= batch;
        break;
    }
    }
    return result;
}

namespace {

TrainReport run_training(const TrainConfig& cfg, const SplitSet& data,
                         const ParamCircuit& circuit,
                         std::span<const PauliZObservable> observables) {
    if (cfg.epochs < 1 || cfg.batch_size < 1) {
        throw ConfigError("epochs and batch_size must be >= 1");
    }
    const int n_train = data.train.n_samples();
    if (n_train == 0) {
        throw ConfigError("training set is empty");
    }
    if (static_cast<int>(observables.size()) != data.train.n_outputs) {
        throw ConfigError("observable count must match the target dimension");
    }

    const int n_params = circuit.n_params;
    std::vector<double> params = initial_params(cfg, n_params);
    Optimizer optimizer(cfg.optimizer, cfg.learning_rate, n_params, cfg.hyper);
    Evaluator ev(circuit, {observables.begin(), observables.end()}, cfg.mode, cfg.seed);

    const auto* guided = std::get_if<GuidedEstimator>(&cfg.estimator);
    GuidedSpsaSchedule schedule;
    if (guided) {
        schedule = make_schedule(n_params, guided->tau, cfg.epochs, guided->epsilon);
    }

    TrainReport report;
    EvalCounters counters;
    std::uint64_t spsa_draw_ordinal = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const int k_epoch = guided ? schedule.k_at(epoch)
                            : std::holds_alternative<SpsaEstimator>(cfg.estimator)
                                ? std::get<SpsaEstimator>(cfg.estimator).k
                                : 0;

        std::vector<int> order(n_train);
        std::iota(order.begin(), order.end(), 0);
        RngStream shuffle_rng = RngStream::derive(cfg.seed, kStreamShuffle, epoch);
        shuffle(order, shuffle_rng);

        const bool capture = std::find(cfg.histogram_epochs.begin(), cfg.histogram_epochs.end(),
                                       epoch) != cfg.histogram_epochs.end();
        GradientHistogram* hist = capture ? &report.histograms[epoch] : nullptr;

        double loss_acc = 0.0;
        for (int start = 0; start < n_train; start += cfg.batch_size) {
            const int batch = std::min(cfg.batch_size, n_train - start);
            const std::span<const int> indices(order.data() + start, batch);

            // Forward pass: one evaluation per data point.
            const std::uint64_t forward_base = ev.reserve(batch);
            std::vector<std::vector<double>> predictions(batch);
            parallel_for(batch, cfg.workers, [&](int m) {
                predictions[m] = ev.eval_at(forward_base + m, data.train.row(indices[m]), params);
            });
            const LossResult loss = loss_and_error(cfg.task, predictions, data.train, indices);
            loss_acc += loss.loss * batch;
            counters.forward += batch;

            // Backward pass: reserve evaluation ordinals and direction draws
            // serially, then fill the Jacobians in parallel.
            const BatchPlan plan = plan_batch(cfg.estimator, batch, k_epoch);
            const int n_spsa = batch - plan.n_ps;
            struct Job {
                std::uint64_t base = 0;
                std::vector<double> deltas; // empty for parameter shift
            };
            std::vector<Job> jobs(batch);
            std::vector<double> shared_deltas;
            if (plan.share_directions && n_spsa > 0) {
                RngStream dir = RngStream::derive(cfg.seed, kStreamSpsaDirections,
                                                  spsa_draw_ordinal++);
                shared_deltas = draw_spsa_directions(plan.k, n_params, dir);
            }
            for (int m = 0; m < batch; ++m) {
                if (m < plan.n_ps) {
                    jobs[m].base = ev.reserve(2 * static_cast<std::uint64_t>(n_params));
                } else {
                    jobs[m].base = ev.reserve(2 * static_cast<std::uint64_t>(plan.k));
                    if (plan.share_directions) {
                        jobs[m].deltas = shared_deltas;
                    } else {
                        RngStream dir = RngStream::derive(cfg.seed, kStreamSpsaDirections,
                                                          spsa_draw_ordinal++);
                        jobs[m].deltas = draw_spsa_directions(plan.k, n_params, dir);
                    }
                }
            }
            std::vector<Jacobian> jacobians(batch);
            parallel_for(batch, cfg.workers, [&](int m) {
                const auto row = data.train.row(indices[m]);
                if (m < plan.n_ps) {
                    jacobians[m] = param_shift_jacobian_at(ev, jobs[m].base, row, params).jacobian;
                } else {
                    jacobians[m] = spsa_jacobian_at(ev, jobs[m].base, row, params, plan.c,
                                                    jobs[m].deltas, plan.k)
                                       .jacobian;
                }
            });
            counters.gradient += static_cast<std::uint64_t>(plan.n_ps) * 2 * n_params +
                                 static_cast<std::uint64_t>(n_spsa) * 2 * plan.k;

            if (plan.suppress && n_spsa > 0) {
                const std::span<const Jacobian> ps_part(jacobians.data(), plan.n_ps);
                const std::vector<double> sigma = avg_ps_norm(ps_part);
                for (int m = plan.n_ps; m < batch; ++m) {
                    jacobians[m] = suppress(jacobians[m], sigma, plan.epsilon);
                }
            }

            if (hist) {
                for (const auto& jac : jacobians) {
                    hist->add_all(jac.data);
                }
            }

            // Chain rule: g = sum_m J_m^T e_m (the 1/B lives in the error terms).
            std::vector<double> grad(n_params, 0.0);
            for (int m = 0; m < batch; ++m) {
                const auto& jac = jacobians[m];
                for (int o = 0; o < jac.n_obs; ++o) {
                    const double e = loss.errors[m][o];
                    for (int i = 0; i < n_params; ++i) {
                        grad[i] += jac.at(o, i) * e;
                    }
                }
            }
            optimizer.step(params, grad);
            if (cfg.record_step_params) {
                report.step_params.push_back(params);
            }
        }

        report.train_loss.push_back(loss_acc / n_train);
        report.k_epoch.push_back(std::holds_alternative<ParamShiftEstimator>(cfg.estimator) ? 0
                                                                                            : k_epoch);

        const std::uint64_t before_val = ev.count();
        report.val_metric.push_back(
            evaluate_metric(ev, data.val, params, cfg.task, cfg.workers));
        counters.validation += ev.count() - before_val;
        report.counters.push_back(counters);
    }

    const std::uint64_t before_test = ev.count();
    report.test_metric = evaluate_metric(ev, data.test, params, cfg.task, cfg.workers);
    counters.validation += ev.count() - before_test; // final held-out pass, same tally

    report.totals = counters;
    report.final_params = params;
    report.convergence_epoch = static_cast<int>(
        std::min_element(report.val_metric.begin(), report.val_metric.end()) -
        report.val_metric.begin());
    return report;
}

} // namespace

TrainReport train_baseline(const TrainConfig& cfg, const SplitSet& data,
                           const ParamCircuit& circuit,
                           std::span<const PauliZObservable> observables) {
    if (std::holds_alternative<GuidedEstimator>(cfg.estimator)) {
        throw ConfigError("train_baseline expects a parameter-shift or SPSA estimator");
    }
    return run_training(cfg, data, circuit, observables);
}

TrainReport train_guided(const TrainConfig& cfg, const SplitSet& data,
                         const ParamCircuit& circuit,
                         std::span<const PauliZObservable> observables) {
    if (!std::holds_alternative<GuidedEstimator>(cfg.estimator)) {
        throw ConfigError("train_guided expects the guided estimator");
    }
    return run_training(cfg, data, circuit, observables);
}

TrainReport train(const TrainConfig& cfg, const SplitSet& data, const ParamCircuit& circuit,
                  std::span<const PauliZObservable> observables) {
    return run_training(cfg, data, circuit, observables);
}

const GradientHistogram& gradient_histogram(const TrainReport& report, int epoch) {
    const auto it = report.histograms.find(epoch);
    if (it == report.histograms.end()) {
        throw std::out_of_range("no histogram captured for epoch " + std::to_string(epoch));
    }
    return it->second;
}

int ps_partition_size(double tau, int batch) {
    if (tau >= 1.0) {
        return batch;
    }
    if (tau <= 0.0) {
        return 0;
    }
    const int n = static_cast<int>(std::llround(tau * batch));
    return std::clamp(n, 1, batch);
}

double toy_loss(double x) {
    return std::sin(x / 2.0) + std::sin(2.25 * std::sin(4.0 * x));
}

double toy_loss_grad(double x) {
    return 0.5 * std::cos(x / 2.0) + 9.0 * std::cos(2.25 * std::sin(4.0 * x)) * std::cos(4.0 * x);
}

ToyResult toy_minimize(const TrainConfig& cfg, const ParamCircuit& circuit) {
    if (circuit.n_inputs != 0) {
        throw ConfigError("the toy problem uses an ansatz without an encoding layer");
    }
    const int n_params = circuit.n_params;
    const std::vector<PauliZObservable> observables{PauliZObservable::all(circuit.n_qubits)};

    std::vector<double> params = initial_params(cfg, n_params);
    Optimizer optimizer(cfg.optimizer, cfg.learning_rate, n_params, cfg.hyper);
    Evaluator ev(circuit, observables, cfg.mode, cfg.seed);

    const auto* guided = std::get_if<GuidedEstimator>(&cfg.estimator);
    GuidedSpsaSchedule schedule;
    if (guided) {
        schedule = make_schedule(n_params, guided->tau, cfg.epochs, guided->epsilon);
    }

    ToyResult result;
    EvalCounters counters;
    std::uint64_t spsa_draw_ordinal = 0;
    const Dataset empty;

    for (int step = 0; step < cfg.epochs; ++step) {
        const double f = ev.eval({}, params)[0];
        counters.forward += 1;
        const double x = std::numbers::pi * f;
        result.trajectory.push_back({step, x, toy_loss(x)});

        std::vector<double> grad(n_params, 0.0);
        if (guided) {
            // One shift-rule estimate and one suppressed SPSA estimate per
            // step, averaged; there is no data batch to split.
            const int k = schedule.k_at(step);
            const auto ps = param_shift_jacobian(ev, {}, params);
            RngStream dir = RngStream::derive(cfg.seed, kStreamSpsaDirections, spsa_draw_ordinal++);
            SpsaConfig spsa_cfg{k, guided->c, false};
            auto spsa = spsa_jacobian(ev, {}, params, spsa_cfg, dir);
            const std::vector<double> sigma = avg_ps_norm(std::span(&ps.jacobian, 1));
            spsa.jacobian = suppress(spsa.jacobian, sigma, guided->epsilon);
            counters.gradient += ps.evals + spsa.evals;

            const LossResult loss = loss_and_error(
                Task::Toy, {{f}, {f}}, empty, std::array<int, 2>{0, 1});
            for (int i = 0; i < n_params; ++i) {
                grad[i] = ps.jacobian.at(0, i) * loss.errors[0][0] +
                          spsa.jacobian.at(0, i) * loss.errors[1][0];
            }
        } else {
            const LossResult loss =
                loss_and_error(Task::Toy, {{f}}, empty, std::array<int, 1>{0});
            JacobianResult jac;
            if (std::holds_alternative<ParamShiftEstimator>(cfg.estimator)) {
                jac = param_shift_jacobian(ev, {}, params);
            } else {
                const auto& spsa = std::get<SpsaEstimator>(cfg.estimator);
                RngStream dir =
                    RngStream::derive(cfg.seed, kStreamSpsaDirections, spsa_draw_ordinal++);
                SpsaConfig spsa_cfg{spsa.k, spsa.c, spsa.share_directions};
                jac = spsa_jacobian(ev, {}, params, spsa_cfg, dir);
            }
            counters.gradient += jac.evals;
            for (int i = 0; i < n_params; ++i) {
                grad[i] = jac.jacobian.at(0, i) * loss.errors[0][0];
            }
        }
        optimizer.step(params, grad);
    }

    const double f = ev.eval({}, params)[0];
    counters.forward += 1;
    const double x = std::numbers::pi * f;
    result.trajectory.push_back({cfg.epochs, x, toy_loss(x)});

    result.totals = counters;
    result.final_params = params;
    return result;
}

} // namespace vqc
