#pragma once

#include <variant>

namespace vqc {

enum class GateKind { RX, RY, RZ, CNOT };

/// Where a rotation angle comes from when the circuit is bound.
struct Constant {
    double radians = 0.0;
    bool operator==(const Constant&) const = default;
};
struct Input {
    int index = 0;
    bool operator==(const Input&) const = default;
};
struct Param {
    int index = 0;
    bool operator==(const Param&) const = default;
};
using AngleSource = std::variant<Constant, Input, Param>;

/// One gate in a parameterized circuit. Rotations follow the convention
/// R_P(phi) = exp(-i phi P / 2); CNOT stores control in `control`.
struct GateOp {
    GateKind kind = GateKind::RX;
    int target = 0;
    int control = -1;
    AngleSource angle{Constant{}};

    bool is_rotation() const { return kind != GateKind::CNOT; }

    static GateOp rx(int qubit, AngleSource a) { return {GateKind::RX, qubit, -1, a}; }
    static GateOp ry(int qubit, AngleSource a) { return {GateKind::RY, qubit, -1, a}; }
    static GateOp rz(int qubit, AngleSource a) { return {GateKind::RZ, qubit, -1, a}; }
    static GateOp cnot(int control, int target) {
        return {GateKind::CNOT, target, control, Constant{0.0}};
    }
};

/// A gate whose angle has been resolved to a number.
struct BoundGate {
    GateKind kind = GateKind::RX;
    int target = 0;
    int control = -1;
    double angle = 0.0;
};

} // namespace vqc
