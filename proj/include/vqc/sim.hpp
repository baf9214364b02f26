#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "vqc/circuit.hpp"
#include "vqc/rng.hpp"

namespace vqc {

// Basis ordering is little-endian: qubit 0 is the least significant bit of the
// amplitude index. Rotations are R_P(phi) = exp(-i phi P / 2).

struct StateVector {
    int n_qubits = 0;
    std::vector<std::complex<double>> amps;

    double norm() const;
};

/// Tensor product of Z on the masked qubits and identity elsewhere.
struct PauliZObservable {
    std::uint64_t mask = 0;

    static PauliZObservable on(std::span<const int> qubits);
    static PauliZObservable all(int n_qubits) { return {(1ULL << n_qubits) - 1}; }
};

/// Stochastic Pauli noise: p1 inserts a uniformly random X/Y/Z after each
/// single-qubit gate, p2 a uniformly random non-identity two-qubit Pauli after
/// each CNOT, p_readout flips each measured bit independently.
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;
    double p_readout = 0.0;
};

struct Ideal {};
struct Shots {
    int n = 1024;
};
struct Noisy {
    NoiseModel model;
    int shots = 1024;
};
using ExecutionMode = std::variant<Ideal, Shots, Noisy>;

/// |0...0> on n qubits. 1 <= n_qubits <= 20.
StateVector init_state(int n_qubits);

void apply_gate(StateVector& state, const BoundGate& gate);

/// Exact <Z-string>: sum over basis states of |amp|^2 * parity(b & mask).
double expectation(const StateVector& state, PauliZObservable obs);

/// Draw `shots` basis states from |amp|^2; optional readout flips; returns the
/// mean parity. Unbiased for `expectation` when p_readout = 0.
double sample_expectation(const StateVector& state, PauliZObservable obs, int shots,
                          RngStream& rng, double p_readout = 0.0);

/// `shots` projective samples from |amp|^2 (shared across observables).
std::vector<std::uint64_t> sample_basis_states(const StateVector& state, int shots,
                                               RngStream& rng);

inline double parity(std::uint64_t bits, std::uint64_t mask) {
    return (std::popcount(bits & mask) & 1) ? -1.0 : 1.0;
}

/// One circuit evaluation: bind, evolve per mode, and read every observable.
/// This is the unit of cost accounting regardless of shot or observable count.
std::vector<double> run_circuit(const ParamCircuit& circuit, std::span<const double> inputs,
                                std::span<const double> params,
                                std::span<const PauliZObservable> observables,
                                const ExecutionMode& mode, RngStream rng);

/// Counts circuit evaluations and derives each evaluation's random stream from
/// (master seed, ordinal), so results never depend on scheduling or worker
/// count. `reserve` hands out a contiguous ordinal block for parallel callers;
/// `eval_at` is const and safe to invoke concurrently.
class Evaluator {
public:
    Evaluator(const ParamCircuit& circuit, std::vector<PauliZObservable> observables,
              ExecutionMode mode, std::uint64_t master_seed);

    std::vector<double> eval(std::span<const double> inputs, std::span<const double> params);
    std::vector<double> eval_at(std::uint64_t ordinal, std::span<const double> inputs,
                                std::span<const double> params) const;

    std::uint64_t reserve(std::uint64_t n);
    std::uint64_t count() const { return count_; }

    const ParamCircuit& circuit() const { return circuit_; }
    std::span<const PauliZObservable> observables() const { return observables_; }
    const ExecutionMode& mode() const { return mode_; }
    std::uint64_t master_seed() const { return master_seed_; }

private:
    const ParamCircuit& circuit_;
    std::vector<PauliZObservable> observables_;
    ExecutionMode mode_;
    std::uint64_t master_seed_ = 0;
    std::uint64_t count_ = 0;
};

} // namespace vqc
