#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vqc/sim.hpp"

namespace vqc {

/// Derivatives of each observable's circuit output with respect to each
/// trainable parameter, row-major (observable, parameter).
struct Jacobian {
    int n_obs = 0;
    int n_params = 0;
    std::vector<double> data;

    Jacobian() = default;
    Jacobian(int obs, int params) : n_obs(obs), n_params(params), data(std::size_t(obs) * params, 0.0) {}

    double& at(int o, int i) { return data[std::size_t(o) * n_params + i]; }
    double at(int o, int i) const { return data[std::size_t(o) * n_params + i]; }
    std::span<const double> row(int o) const { return {data.data() + std::size_t(o) * n_params, std::size_t(n_params)}; }
    double row_norm(int o) const;
    double frobenius_norm() const;
};

struct SpsaConfig {
    int k = 1;
    double c = 0.05;
    bool share_directions = false; // one direction set per batch instead of per sample
};

/// SPSA sample-count schedule: k grows linearly from k_min to k_max over the
/// run, floor-discretized per epoch.
struct GuidedSpsaSchedule {
    double tau = 0.5;
    double epsilon = 1.0;
    int k_min = 1;
    int k_max = 1;
    double gamma = 0.0;
    int n_epochs = 1;

    int k_at(int epoch) const;
};

/// k_min = max(1, floor(0.1 M)), k_max = floor(M min(1, 1.5 - tau)) clamped to
/// at least k_min, gamma = (k_max - k_min) / n_epochs.
GuidedSpsaSchedule make_schedule(int n_params, double tau, int n_epochs, double epsilon = 1.0);

struct JacobianResult {
    Jacobian jacobian;
    std::uint64_t evals = 0;
};

/// Exact Jacobian from 2M shifted evaluations: entry (o,i) =
/// [f_o(theta + pi/2 e_i) - f_o(theta - pi/2 e_i)] / 2. A parameter used by
/// several gates shifts every occurrence together (total derivative).
JacobianResult param_shift_jacobian(Evaluator& ev, std::span<const double> inputs,
                                    std::span<const double> params);
JacobianResult param_shift_jacobian_at(const Evaluator& ev, std::uint64_t ordinal_base,
                                       std::span<const double> inputs,
                                       std::span<const double> params);

/// k +/-1 direction vectors of length n_params, flattened row-major.
std::vector<double> draw_spsa_directions(int k, int n_params, RngStream& rng);

/// Averages k rank-one estimates: draw delta in {-1,+1}^M, evaluate
/// f(theta +/- c delta), entry (o,i) = [f_o(+) - f_o(-)] / (2 c delta_i).
/// Estimates the Jacobian of the raw circuit output; loss chain rule is
/// applied by the caller.
JacobianResult spsa_jacobian(Evaluator& ev, std::span<const double> inputs,
                             std::span<const double> params, const SpsaConfig& cfg,
                             RngStream& directions);
JacobianResult spsa_jacobian_at(const Evaluator& ev, std::uint64_t ordinal_base,
                                std::span<const double> inputs, std::span<const double> params,
                                double c, std::span<const double> deltas, int k);

/// Per-observable mean L2 norm of the parameter-shift Jacobian rows.
/// Throws ConfigError on an empty list (the caller decides what an empty
/// parameter-shift partition means).
std::vector<double> avg_ps_norm(std::span<const Jacobian> ps_jacobians);

/// Rescale each row r to epsilon * sigma_o * r / ||r||, so the output row norm
/// is exactly epsilon * sigma_o. All-zero rows pass through unchanged.
Jacobian suppress(const Jacobian& spsa_jac, std::span<const double> sigma, double epsilon);

/// Central-difference oracle on the ideal simulator; test/diagnostic path.
Jacobian finite_diff_jacobian(const ParamCircuit& circuit, std::span<const double> inputs,
                              std::span<const double> params,
                              std::span<const PauliZObservable> observables, double h);

} // namespace vqc
