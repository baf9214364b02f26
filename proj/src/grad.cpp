#include "vqc/grad.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vqc/errors.hpp"

namespace vqc {

namespace {

void check_trainable_gates(const ParamCircuit& circuit) {
    for (const auto& op : circuit.ops) {
        if (std::holds_alternative<Param>(op.angle) && !op.is_rotation()) {
            throw BindingError("trainable gate is not a Pauli rotation; no shift rule applies");
        }
    }
}

} // namespace

double Jacobian::row_norm(int o) const {
    double acc = 0.0;
    for (int i = 0; i < n_params; ++i) {
        acc += at(o, i) * at(o, i);
    }
    return std::sqrt(acc);
}

double Jacobian::frobenius_norm() const {
    double acc = 0.0;
    for (double v : data) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

int GuidedSpsaSchedule::k_at(int epoch) const {
    const int k = static_cast<int>(std::floor(k_min + epoch * gamma));
    return std::min(std::max(k, k_min), k_max);
}

GuidedSpsaSchedule make_schedule(int n_params, double tau, int n_epochs, double epsilon) {
    if (tau < 0.0 || tau > 1.0) {
        throw ConfigError("tau must lie in [0, 1]");
    }
    if (epsilon <= 0.0 || epsilon > 1.0) {
        throw ConfigError("epsilon must lie in (0, 1]");
    }
    if (n_params < 1 || n_epochs < 1) {
        throw ConfigError("schedule needs n_params >= 1 and n_epochs >= 1");
    }
    GuidedSpsaSchedule s;
    s.tau = tau;
    s.epsilon = epsilon;
    s.n_epochs = n_epochs;
    s.k_min = std::max(1, static_cast<int>(std::floor(n_params * 0.1)));
    s.k_max = static_cast<int>(std::floor(n_params * std::min(1.0, 1.5 - tau)));
    s.k_max = std::max(s.k_max, s.k_min); // degenerate for very small circuits
    s.gamma = static_cast<double>(s.k_max - s.k_min) / n_epochs;
    return s;
}

JacobianResult param_shift_jacobian(Evaluator& ev, std::span<const double> inputs,
                                    std::span<const double> params) {
    const auto base = ev.reserve(2 * static_cast<std::uint64_t>(params.size()));
    return param_shift_jacobian_at(ev, base, inputs, params);
}

JacobianResult param_shift_jacobian_at(const Evaluator& ev, std::uint64_t ordinal_base,
                                       std::span<const double> inputs,
                                       std::span<const double> params) {
    check_trainable_gates(ev.circuit());
    const int n_params = static_cast<int>(params.size());
    const int n_obs = static_cast<int>(ev.observables().size());
    constexpr double shift = std::numbers::pi / 2.0;

    Jacobian jac(n_obs, n_params);
    std::vector<double> shifted(params.begin(), params.end());
    for (int i = 0; i < n_params; ++i) {
        shifted[i] = params[i] + shift;
        const auto plus = ev.eval_at(ordinal_base + 2 * i, inputs, shifted);
        shifted[i] = params[i] - shift;
        const auto minus = ev.eval_at(ordinal_base + 2 * i + 1, inputs, shifted);
        shifted[i] = params[i];
        for (int o = 0; o < n_obs; ++o) {
            jac.at(o, i) = 0.5 * (plus[o] - minus[o]);
        }
    }
    return {std::move(jac), 2 * static_cast<std::uint64_t>(n_params)};
}

std::vector<double> draw_spsa_directions(int k, int n_params, RngStream& rng) {
    std::vector<double> deltas(static_cast<std::size_t>(k) * n_params);
    for (auto& d : deltas) {
        d = rng.sign();
    }
    return deltas;
}

JacobianResult spsa_jacobian(Evaluator& ev, std::span<const double> inputs,
                             std::span<const double> params, const SpsaConfig& cfg,
                             RngStream& directions) {
    if (cfg.k < 1 || cfg.c <= 0.0) {
        throw ConfigError("SPSA needs k >= 1 and c > 0");
    }
    const auto deltas = draw_spsa_directions(cfg.k, static_cast<int>(params.size()), directions);
    const auto base = ev.reserve(2 * static_cast<std::uint64_t>(cfg.k));
    return spsa_jacobian_at(ev, base, inputs, params, cfg.c, deltas, cfg.k);
}

JacobianResult spsa_jacobian_at(const Evaluator& ev, std::uint64_t ordinal_base,
                                std::span<const double> inputs, std::span<const double> params,
                                double c, std::span<const double> deltas, int k) {
    const int n_params = static_cast<int>(params.size());
    const int n_obs = static_cast<int>(ev.observables().size());

    Jacobian jac(n_obs, n_params);
    std::vector<double> shifted(n_params);
    for (int sample = 0; sample < k; ++sample) {
        const double* delta = deltas.data() + static_cast<std::size_t>(sample) * n_params;
        for (int i = 0; i < n_params; ++i) {
            shifted[i] = params[i] + c * delta[i];
        }
        const auto plus = ev.eval_at(ordinal_base + 2 * sample, inputs, shifted);
        for (int i = 0; i < n_params; ++i) {
            shifted[i] = params[i] - c * delta[i];
        }
        const auto minus = ev.eval_at(ordinal_base + 2 * sample + 1, inputs, shifted);
        for (int o = 0; o < n_obs; ++o) {
            const double df = (plus[o] - minus[o]) / (2.0 * c);
            for (int i = 0; i < n_params; ++i) {
                jac.at(o, i) += df * delta[i]; // delta_i in {-1,+1}, so 1/delta_i = delta_i
            }
        }
    }
    for (auto& v : jac.data) {
        v /= k;
    }
    return {std::move(jac), 2 * static_cast<std::uint64_t>(k)};
}

std::vector<double> avg_ps_norm(std::span<const Jacobian> ps_jacobians) {
    if (ps_jacobians.empty()) {
        throw ConfigError("average parameter-shift norm is undefined for an empty partition");
    }
    const int n_obs = ps_jacobians.front().n_obs;
    std::vector<double> sigma(n_obs, 0.0);
    for (const auto& jac : ps_jacobians) {
        for (int o = 0; o < n_obs; ++o) {
            sigma[o] += jac.row_norm(o);
        }
    }
    for (auto& s : sigma) {
        s /= static_cast<double>(ps_jacobians.size());
    }
    return sigma;
}

Jacobian suppress(const Jacobian& spsa_jac, std::span<const double> sigma, double epsilon) {
    if (epsilon <= 0.0 || epsilon > 1.0) {
        throw ConfigError("epsilon must lie in (0, 1]");
    }
    Jacobian out = spsa_jac;
    for (int o = 0; o < out.n_obs; ++o) {
        const double norm = out.row_norm(o);
        if (norm == 0.0) {
            continue;
        }
        const double scale = sigma[o] / norm * epsilon;
        for (int i = 0; i < out.n_params; ++i) {
            out.at(o, i) *= scale;
        }
    }
    return out;
}

Jacobian finite_diff_jacobian(const ParamCircuit& circuit, std::span<const double> inputs,
                              std::span<const double> params,
                              std::span<const PauliZObservable> observables, double h) {
    if (h <= 0.0) {
        throw ConfigError("finite-difference step must be positive");
    }
    const int n_params = static_cast<int>(params.size());
    const int n_obs = static_cast<int>(observables.size());
    const ExecutionMode ideal{Ideal{}};

    Jacobian jac(n_obs, n_params);
    std::vector<double> shifted(params.begin(), params.end());
    for (int i = 0; i < n_params; ++i) {
        shifted[i] = params[i] + h;
        const auto plus = run_circuit(circuit, inputs, shifted, observables, ideal, RngStream(0));
        shifted[i] = params[i] - h;
        const auto minus = run_circuit(circuit, inputs, shifted, observables, ideal, RngStream(0));
        shifted[i] = params[i];
        for (int o = 0; o < n_obs; ++o) {
            jac.at(o, i) = (plus[o] - minus[o]) / (2.0 * h);
        }
    }
    return jac;
}

} // namespace vqc
