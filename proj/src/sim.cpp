#include "vqc/sim.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "vqc/errors.hpp"

namespace vqc {

namespace {

using c64 = std::complex<double>;

void apply_1q(StateVector& sv, int q, c64 u00, c64 u01, c64 u10, c64 u11) {
    const std::uint64_t mask = 1ULL << q;
    const std::uint64_t lo_mask = mask - 1;
    const std::uint64_t hi_mask = ~lo_mask;
    const std::uint64_t half = 1ULL << (sv.n_qubits - 1);
    auto* amps = sv.amps.data();
    for (std::uint64_t i = 0; i < half; ++i) {
        const std::uint64_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        const std::uint64_t i1 = i0 | mask;
        const c64 a0 = amps[i0];
        const c64 a1 = amps[i1];
        amps[i0] = u00 * a0 + u01 * a1;
        amps[i1] = u10 * a0 + u11 * a1;
    }
}

void apply_cnot(StateVector& sv, int control, int target) {
    const std::uint64_t cmask = 1ULL << control;
    const std::uint64_t tmask = 1ULL << target;
    const std::uint64_t dim = 1ULL << sv.n_qubits;
    auto* amps = sv.amps.data();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & cmask) && !(i & tmask)) {
            std::swap(amps[i], amps[i | tmask]);
        }
    }
}

void apply_pauli(StateVector& sv, int q, int pauli) { // 1 = X, 2 = Y, 3 = Z
    const c64 im(0.0, 1.0);
    switch (pauli) {
    case 1:
        apply_1q(sv, q, 0.0, 1.0, 1.0, 0.0);
        break;
    case 2:
        apply_1q(sv, q, 0.0, -im, im, 0.0);
        break;
    case 3:
        apply_1q(sv, q, 1.0, 0.0, 0.0, -1.0);
        break;
    default:
        break;
    }
}

std::vector<double> cumulative_probs(const StateVector& sv) {
    std::vector<double> cum(sv.amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < sv.amps.size(); ++i) {
        acc += std::norm(sv.amps[i]);
        cum[i] = acc;
    }
    return cum;
}

std::uint64_t flip_readout_bits(std::uint64_t bits, int n_qubits, double p, RngStream& rng) {
    for (int q = 0; q < n_qubits; ++q) {
        if (rng.bernoulli(p)) {
            bits ^= 1ULL << q;
        }
    }
    return bits;
}

StateVector evolve(int n_qubits, std::span<const BoundGate> gates) {
    StateVector sv = init_state(n_qubits);
    for (const auto& g : gates) {
        apply_gate(sv, g);
    }
    return sv;
}

// One stochastic Pauli trajectory. `flags` marks the gates followed by an
// error insertion; error types are drawn from `rng` in gate order.
StateVector evolve_trajectory(int n_qubits, std::span<const BoundGate> gates,
                              std::span<const std::uint8_t> flags, RngStream& rng) {
    StateVector sv = init_state(n_qubits);
    for (std::size_t g = 0; g < gates.size(); ++g) {
        apply_gate(sv, gates[g]);
        if (!flags[g]) {
            continue;
        }
        if (gates[g].kind == GateKind::CNOT) {
            const int which = rng.uniform_int(1, 15); // two-qubit Paulis, II excluded
            apply_pauli(sv, gates[g].control, which / 4);
            apply_pauli(sv, gates[g].target, which % 4);
        } else {
            apply_pauli(sv, gates[g].target, rng.uniform_int(1, 3));
        }
    }
    return sv;
}

} // namespace

double StateVector::norm() const {
    double acc = 0.0;
    for (const auto& a : amps) {
        acc += std::norm(a);
    }
    return std::sqrt(acc);
}

PauliZObservable PauliZObservable::on(std::span<const int> qubits) {
    PauliZObservable obs;
    for (int q : qubits) {
        obs.mask |= 1ULL << q;
    }
    return obs;
}

StateVector init_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 20) {
        throw CapacityError("n_qubits must be in [1, 20], got " + std::to_string(n_qubits));
    }
    StateVector sv;
    sv.n_qubits = n_qubits;
    sv.amps.assign(1ULL << n_qubits, c64(0.0, 0.0));
    sv.amps[0] = c64(1.0, 0.0);
    return sv;
}

void apply_gate(StateVector& state, const BoundGate& gate) {
    const double half = gate.angle / 2.0;
    const double c = std::cos(half);
    const double s = std::sin(half);
    const c64 im(0.0, 1.0);
    switch (gate.kind) {
    case GateKind::RX:
        apply_1q(state, gate.target, c, -im * s, -im * s, c);
        break;
    case GateKind::RY:
        apply_1q(state, gate.target, c, -s, s, c);
        break;
    case GateKind::RZ:
        apply_1q(state, gate.target, c64(c, -s), 0.0, 0.0, c64(c, s));
        break;
    case GateKind::CNOT:
        apply_cnot(state, gate.control, gate.target);
        break;
    }
}

double expectation(const StateVector& state, PauliZObservable obs) {
    double acc = 0.0;
    for (std::size_t b = 0; b < state.amps.size(); ++b) {
        acc += std::norm(state.amps[b]) * parity(b, obs.mask);
    }
    return acc;
}

std::vector<std::uint64_t> sample_basis_states(const StateVector& state, int shots,
                                               RngStream& rng) {
    const auto cum = cumulative_probs(state);
    std::vector<std::uint64_t> out(shots);
    for (int s = 0; s < shots; ++s) {
        out[s] = sample_cdf(cum, rng.next_double() * cum.back());
    }
    return out;
}

double sample_expectation(const StateVector& state, PauliZObservable obs, int shots,
                          RngStream& rng, double p_readout) {
    if (shots < 1) {
        throw ConfigError("shots must be >= 1");
    }
    const auto cum = cumulative_probs(state);
    double acc = 0.0;
    for (int s = 0; s < shots; ++s) {
        std::uint64_t bits = sample_cdf(cum, rng.next_double() * cum.back());
        if (p_readout > 0.0) {
            bits = flip_readout_bits(bits, state.n_qubits, p_readout, rng);
        }
        acc += parity(bits, obs.mask);
    }
    return acc / shots;
}

std::vector<double> run_circuit(const ParamCircuit& circuit, std::span<const double> inputs,
                                std::span<const double> params,
                                std::span<const PauliZObservable> observables,
                                const ExecutionMode& mode, RngStream rng) {
    const auto gates = bind_gates(circuit, inputs, params);
    std::vector<double> values(observables.size(), 0.0);

    if (std::holds_alternative<Ideal>(mode)) {
        const StateVector sv = evolve(circuit.n_qubits, gates);
        for (std::size_t o = 0; o < observables.size(); ++o) {
            values[o] = expectation(sv, observables[o]);
        }
        return values;
    }

    if (const auto* shots = std::get_if<Shots>(&mode)) {
        if (shots->n < 1) {
            throw ConfigError("shots must be >= 1");
        }
        const StateVector sv = evolve(circuit.n_qubits, gates);
        const auto samples = sample_basis_states(sv, shots->n, rng);
        for (std::size_t o = 0; o < observables.size(); ++o) {
            double acc = 0.0;
            for (const auto bits : samples) {
                acc += parity(bits, observables[o].mask);
            }
            values[o] = acc / shots->n;
        }
        return values;
    }

    const auto& noisy = std::get<Noisy>(mode);
    if (noisy.shots < 1) {
        throw ConfigError("shots must be >= 1");
    }
    const NoiseModel& nm = noisy.model;

    // Error-free trajectories all share one final state; cache it and its CDF.
    StateVector clean;
    std::vector<double> clean_cum;
    std::vector<std::uint8_t> flags(gates.size());

    for (int shot = 0; shot < noisy.shots; ++shot) {
        bool any_error = false;
        for (std::size_t g = 0; g < gates.size(); ++g) {
            const double p = gates[g].kind == GateKind::CNOT ? nm.p2 : nm.p1;
            flags[g] = (p > 0.0 && rng.bernoulli(p)) ? 1 : 0;
            any_error = any_error || flags[g] != 0;
        }

        std::uint64_t bits;
        if (any_error) {
            const StateVector traj = evolve_trajectory(circuit.n_qubits, gates, flags, rng);
            const auto cum = cumulative_probs(traj);
            bits = sample_cdf(cum, rng.next_double() * cum.back());
        } else {
            if (clean_cum.empty()) {
                clean = evolve(circuit.n_qubits, gates);
                clean_cum = cumulative_probs(clean);
            }
            bits = sample_cdf(clean_cum, rng.next_double() * clean_cum.back());
        }
        if (nm.p_readout > 0.0) {
            bits = flip_readout_bits(bits, circuit.n_qubits, nm.p_readout, rng);
        }
        for (std::size_t o = 0; o < observables.size(); ++o) {
            values[o] += parity(bits, observables[o].mask);
        }
    }
    for (auto& v : values) {
        v /= noisy.shots;
    }
    return values;
}

Evaluator::Evaluator(const ParamCircuit& circuit, std::vector<PauliZObservable> observables,
                     ExecutionMode mode, std::uint64_t master_seed)
    : circuit_(circuit), observables_(std::move(observables)), mode_(std::move(mode)),
      master_seed_(master_seed) {}

std::vector<double> Evaluator::eval(std::span<const double> inputs,
                                    std::span<const double> params) {
    return eval_at(reserve(1), inputs, params);
}

std::vector<double> Evaluator::eval_at(std::uint64_t ordinal, std::span<const double> inputs,
                                       std::span<const double> params) const {
    return run_circuit(circuit_, inputs, params, observables_, mode_,
                       RngStream::derive(master_seed_, kStreamEval, ordinal));
}

std::uint64_t Evaluator::reserve(std::uint64_t n) {
    const std::uint64_t base = count_;
    count_ += n;
    return base;
}

} // namespace vqc
