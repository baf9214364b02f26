#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vqc/data.hpp"
#include "vqc/grad.hpp"
#include "vqc/optim.hpp"
#include "vqc/sim.hpp"

namespace vqc {

struct ParamShiftEstimator {};
struct SpsaEstimator {
    int k = 10;
    double c = 0.05;
    bool share_directions = false;
};
struct GuidedEstimator {
    double tau = 0.5;
    double epsilon = 1.0;
    double c = 0.05;
};
using EstimatorConfig = std::variant<ParamShiftEstimator, SpsaEstimator, GuidedEstimator>;

enum class InitKind { Uniform, Zeros };
struct InitConfig {
    InitKind kind = InitKind::Uniform;
    std::optional<std::uint64_t> seed; // defaults to a stream derived from the master seed
    double lo = 0.0;                   // uniform range, [0, pi] unless configured
    double hi = 3.14159265358979323846;
};

struct TrainConfig {
    Task task = Task::Regression;
    EstimatorConfig estimator{ParamShiftEstimator{}};
    int epochs = 100;
    int batch_size = 32;
    double learning_rate = 0.01;
    OptimKind optimizer = OptimKind::Adam;
    OptimHyper hyper{};
    ExecutionMode mode{Ideal{}};
    InitConfig init{};
    std::uint64_t seed = 0;
    std::vector<int> histogram_epochs{};
    int workers = 1;
    bool record_step_params = false; // per-update parameter snapshots (tests)
};

/// Fixed binning of raw gradient entries over [-0.5, 0.5]: 101 interior bins
/// plus one underflow and one overflow bin.
struct GradientHistogram {
    static constexpr int kBins = 101;
    static constexpr double kLo = -0.5;
    static constexpr double kHi = 0.5;

    std::array<std::uint64_t, kBins + 2> counts{}; // [0] underflow, [kBins+1] overflow
    std::uint64_t total = 0;

    void add(double g);
    void add_all(std::span<const double> values);
    double bin_left(int bin) const;  // bin in [0, kBins), interior bins only
    double bin_right(int bin) const;
    /// Fraction of entries in the central interior bin (|g| < 0.5/101 ~ 0.005).
    double central_fraction() const;
};

/// Circuit evaluations by purpose, in the same unit the estimators report.
struct EvalCounters {
    std::uint64_t gradient = 0;
    std::uint64_t forward = 0;
    std::uint64_t validation = 0;

    std::uint64_t total() const { return gradient + forward + validation; }
    bool operator==(const EvalCounters&) const = default;
};

struct TrainReport {
    std::vector<double> train_loss;        // per epoch
    std::vector<double> val_metric;        // per epoch: MAE or error rate
    std::vector<EvalCounters> counters;    // cumulative, per epoch
    std::vector<int> k_epoch;              // SPSA samples per estimate (0 = parameter shift)
    int convergence_epoch = 0;             // argmin of val_metric
    double test_metric = 0.0;
    EvalCounters totals;
    std::map<int, GradientHistogram> histograms;
    std::vector<double> final_params;
    std::vector<std::vector<double>> step_params; // only when record_step_params
};

struct LossResult {
    double loss = 0.0;
    std::vector<std::vector<double>> errors; // per sample, per observable: dLoss/df
};

/// Batch loss and its derivative with respect to each raw circuit output.
/// Regression: MSE, e_m = 2 (yhat_m - y_m) / B. Classification: per-class
/// sigmoid + binary cross-entropy, e_mc = (sigma(f_mc) - y_mc) / B.
LossResult loss_and_error(Task task, const std::vector<std::vector<double>>& predictions,
                          const Dataset& ds, std::span<const int> indices);

/// Single-estimator loop: forward pass, per-sample Jacobians, chain-rule
/// gradient g = sum_m J_m^T e_m, optimizer step; seeded shuffle per epoch.
TrainReport train_baseline(const TrainConfig& cfg, const SplitSet& data,
                           const ParamCircuit& circuit,
                           std::span<const PauliZObservable> observables);

/// Batch-splitting loop: round(tau B) samples differentiated by parameter
/// shift, the rest by SPSA with the scheduled k, each SPSA Jacobian row
/// rescaled to epsilon times the batch's mean parameter-shift row norm.
/// With tau = 1 this follows the parameter-shift code path exactly.
TrainReport train_guided(const TrainConfig& cfg, const SplitSet& data,
                         const ParamCircuit& circuit,
                         std::span<const PauliZObservable> observables);

/// Dispatch on cfg.estimator.
TrainReport train(const TrainConfig& cfg, const SplitSet& data, const ParamCircuit& circuit,
                  std::span<const PauliZObservable> observables);

/// Histogram for a captured epoch; throws std::out_of_range otherwise.
const GradientHistogram& gradient_histogram(const TrainReport& report, int epoch);

/// Samples of a batch routed to the parameter-shift rule under the guided
/// estimator: round(tau * B), clamped to [1, B] strictly between the pure
/// cases so the guiding norm is always defined.
int ps_partition_size(double tau, int batch);

// --- Toy problem -----------------------------------------------------------

/// L(x) = sin(x/2) + sin(2.25 sin(4x)), minimized over x = pi * <Z...Z>.
double toy_loss(double x);
double toy_loss_grad(double x);

struct ToyStep {
    int step = 0;
    double x = 0.0;
    double loss = 0.0;
};

struct ToyResult {
    std::vector<ToyStep> trajectory; // one row per step plus a final row
    EvalCounters totals;
    std::vector<double> final_params;
};

/// Gradient descent on the toy loss through an encoding-free ansatz. One step
/// per configured epoch. Guided mode averages a parameter-shift estimate with
/// a suppressed SPSA estimate each step.
ToyResult toy_minimize(const TrainConfig& cfg, const ParamCircuit& circuit);

} // namespace vqc
