#pragma once

// Shared generators for randomized tests.

#include <vector>

#include "vqc/circuit.hpp"
#include "vqc/rng.hpp"

namespace testutil {

/// Random layered ansatz on up to `max_qubits` qubits with a random encoding.
inline vqc::ParamCircuit random_ansatz(vqc::RngStream& rng, int max_qubits = 3,
                                       int max_layers = 3) {
    vqc::AnsatzSpec spec;
    spec.n_qubits = rng.uniform_int(1, max_qubits);
    spec.n_layers = rng.uniform_int(1, max_layers);
    spec.entangle = spec.n_qubits > 1 && rng.bernoulli(0.8);
    switch (rng.uniform_int(0, 2)) {
    case 0:
        spec.encoding = vqc::NoEncoding{};
        break;
    case 1:
        spec.encoding = vqc::AngleOnce{};
        break;
    default:
        spec.encoding = vqc::IncrementalUpload{
            rng.uniform_int(1, spec.n_qubits * spec.n_layers)};
        break;
    }
    return vqc::build_layered(spec);
}

inline std::vector<double> random_vector(vqc::RngStream& rng, int n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(lo, hi);
    }
    return v;
}

} // namespace testutil
