#include "vqc/circuit.hpp"

#include <algorithm>
#include <string>

#include "vqc/errors.hpp"

namespace vqc {

namespace {

void check_index_density(const std::vector<bool>& seen, const char* what) {
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw BindingError(std::string(what) + " index " + std::to_string(i) +
                               " is declared but never used");
        }
    }
}

void append_variational_layer(ParamCircuit& qc, int layer, bool entangle) {
    const int n = qc.n_qubits;
    for (int q = 0; q < n; ++q) {
        qc.ops.push_back(GateOp::ry(q, Param{layer * 2 * n + q}));
    }
    for (int q = 0; q < n; ++q) {
        qc.ops.push_back(GateOp::rz(q, Param{layer * 2 * n + n + q}));
    }
    if (entangle) {
        for (int q = n - 2; q >= 0; --q) {
            qc.ops.push_back(GateOp::cnot(q + 1, q));
        }
    }
}

} // namespace

void ParamCircuit::finalize() {
    int max_input = -1;
    int max_param = -1;
    for (const auto& op : ops) {
        if (op.target < 0 || op.target >= n_qubits ||
            (op.kind == GateKind::CNOT &&
             (op.control < 0 || op.control >= n_qubits || op.control == op.target))) {
            throw BindingError("gate qubit indices out of range");
        }
        if (const auto* in = std::get_if<Input>(&op.angle)) {
            max_input = std::max(max_input, in->index);
        } else if (const auto* p = std::get_if<Param>(&op.angle)) {
            max_param = std::max(max_param, p->index);
        }
    }
    n_inputs = max_input + 1;
    n_params = max_param + 1;

    std::vector<bool> input_seen(n_inputs, false);
    std::vector<bool> param_seen(n_params, false);
    for (const auto& op : ops) {
        if (const auto* in = std::get_if<Input>(&op.angle)) {
            input_seen[in->index] = true;
        } else if (const auto* p = std::get_if<Param>(&op.angle)) {
            param_seen[p->index] = true;
        }
    }
    check_index_density(input_seen, "input");
    check_index_density(param_seen, "parameter");
}

ParamCircuit build_layered(const AnsatzSpec& spec) {
    if (spec.n_qubits < 1) {
        throw ConfigError("ansatz needs at least one qubit");
    }
    if (spec.n_layers < 1) {
        throw ConfigError("ansatz needs at least one layer");
    }

    ParamCircuit qc;
    qc.n_qubits = spec.n_qubits;

    if (std::holds_alternative<AngleOnce>(spec.encoding)) {
        for (int q = 0; q < spec.n_qubits; ++q) {
            qc.ops.push_back(GateOp::rx(q, Input{q}));
        }
        for (int layer = 0; layer < spec.n_layers; ++layer) {
            append_variational_layer(qc, layer, spec.entangle);
        }
    } else if (const auto* inc = std::get_if<IncrementalUpload>(&spec.encoding)) {
        const int capacity = spec.n_layers * spec.n_qubits;
        if (inc->n_features > capacity) {
            throw CapacityError("incremental upload: " + std::to_string(inc->n_features) +
                                " features exceed " + std::to_string(capacity) +
                                " encoding slots");
        }
        int feature = 0;
        for (int layer = 0; layer < spec.n_layers; ++layer) {
            for (int q = 0; q < spec.n_qubits && feature < inc->n_features; ++q, ++feature) {
                qc.ops.push_back(GateOp::rx(q, Input{feature}));
            }
            append_variational_layer(qc, layer, spec.entangle);
        }
    } else {
        for (int layer = 0; layer < spec.n_layers; ++layer) {
            append_variational_layer(qc, layer, spec.entangle);
        }
    }

    qc.finalize();
    return qc;
}

ParamCircuit build_boston(int n_layers, int n_qubits, int n_features) {
    AnsatzSpec spec;
    spec.n_qubits = n_qubits;
    spec.n_layers = n_layers;
    spec.encoding = IncrementalUpload{n_features};
    return build_layered(spec);
}

std::vector<BoundGate> bind_gates(const ParamCircuit& circuit, std::span<const double> inputs,
                            std::span<const double> params) {
    if (static_cast<int>(inputs.size()) != circuit.n_inputs) {
        throw BindingError("expected " + std::to_string(circuit.n_inputs) + " inputs, got " +
                           std::to_string(inputs.size()));
    }
    if (static_cast<int>(params.size()) != circuit.n_params) {
        throw BindingError("expected " + std::to_string(circuit.n_params) + " parameters, got " +
                           std::to_string(params.size()));
    }

    std::vector<BoundGate> bound;
    bound.reserve(circuit.ops.size());
    for (const auto& op : circuit.ops) {
        double angle = 0.0;
        if (op.is_rotation()) {
            if (const auto* c = std::get_if<Constant>(&op.angle)) {
                angle = c->radians;
            } else if (const auto* in = std::get_if<Input>(&op.angle)) {
                angle = inputs[in->index];
            } else {
                angle = params[std::get<Param>(op.angle).index];
            }
        }
        bound.push_back({op.kind, op.target, op.control, angle});
    }
    return bound;
}

} // namespace vqc
