#pragma once

#include <span>
#include <variant>
#include <vector>

#include "vqc/gates.hpp"

namespace vqc {

/// Ordered gate list with declared input/parameter counts. Input indices
/// 0..n_inputs-1 and Param indices 0..n_params-1 must each appear at least
/// once; `finalize()` derives the counts and enforces density.
struct ParamCircuit {
    int n_qubits = 0;
    std::vector<GateOp> ops;
    int n_inputs = 0;
    int n_params = 0;

    void finalize();
};

struct NoEncoding {};
/// One RX(feature q) on qubit q ahead of the first variational layer.
struct AngleOnce {};
/// Feature vector wider than the qubit count: RX encoders are spread across
/// successive layers in feature-index order, n_qubits per layer.
struct IncrementalUpload {
    int n_features = 0;
};
using Encoding = std::variant<NoEncoding, AngleOnce, IncrementalUpload>;

struct AnsatzSpec {
    int n_qubits = 0;
    int n_layers = 1;
    Encoding encoding{AngleOnce{}};
    bool entangle = true; // nearest-neighbour CNOT chain after each layer
};

/// Layered ansatz: encoding per spec, then per layer RY(param) on every qubit,
/// RZ(param) on every qubit, and a CNOT chain control q+1 -> target q emitted
/// from the top pair down. Parameters are numbered layer-major, RY before RZ,
/// qubit-ascending.
ParamCircuit build_layered(const AnsatzSpec& spec);

/// The 4-qubit incremental-upload regression ansatz for a 13-feature vector.
ParamCircuit build_boston(int n_layers = 5, int n_qubits = 4, int n_features = 13);

/// Resolve every angle source against concrete input/parameter vectors.
std::vector<BoundGate> bind_gates(const ParamCircuit& circuit, std::span<const double> inputs,
                            std::span<const double> params);

} // namespace vqc
