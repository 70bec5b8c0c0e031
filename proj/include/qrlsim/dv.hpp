// Brute-force discrete-variable statevector oracle (N <= 6 qubits).
// Reference side of every logical-level check: calibration targets, RB
// reference states, Grover success probabilities.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qrlsim/tensor.hpp"

namespace qrlsim {

enum class GateLabel { I, H, P, Pdg, CZ, SWAP, CX, T, Tdg, X, Y, Z, CCZ };

inline const char* to_string(GateLabel g) {
  switch (g) {
    case GateLabel::I: return "I";
    case GateLabel::H: return "H";
    case GateLabel::P: return "P";
    case GateLabel::Pdg: return "Pdg";
    case GateLabel::CZ: return "CZ";
    case GateLabel::SWAP: return "SWAP";
    case GateLabel::CX: return "CX";
    case GateLabel::T: return "T";
    case GateLabel::Tdg: return "Tdg";
    case GateLabel::X: return "X";
    case GateLabel::Y: return "Y";
    case GateLabel::Z: return "Z";
    case GateLabel::CCZ: return "CCZ";
  }
  return "?";
}

inline GateLabel gate_from_string(const std::string& s) {
  for (GateLabel g : {GateLabel::I, GateLabel::H, GateLabel::P, GateLabel::Pdg, GateLabel::CZ,
                      GateLabel::SWAP, GateLabel::CX, GateLabel::T, GateLabel::Tdg, GateLabel::X,
                      GateLabel::Y, GateLabel::Z, GateLabel::CCZ}) {
    if (s == to_string(g)) return g;
  }
  throw std::invalid_argument("unknown gate: " + s);
}

inline int gate_arity(GateLabel g) {
  switch (g) {
    case GateLabel::CZ:
    case GateLabel::SWAP:
    case GateLabel::CX: return 2;
    case GateLabel::CCZ: return 3;
    default: return 1;
  }
}

struct Gate {
  GateLabel label;
  std::array<int, 3> w{-1, -1, -1};

  Gate(GateLabel l, int a) : label(l), w{a, -1, -1} {}
  Gate(GateLabel l, int a, int b) : label(l), w{a, b, -1} {}
  Gate(GateLabel l, int a, int b, int c) : label(l), w{a, b, c} {}
  int arity() const { return gate_arity(label); }
};

using Circuit = std::vector<Gate>;

struct DvState {
  VectorC amp;
  int n_qubits = 0;

  static DvState zero(int n) {
    if (n < 1 || n > 6) throw std::invalid_argument("DvState: 1..6 qubits");
    DvState s;
    s.n_qubits = n;
    s.amp = VectorC::Zero(1 << n);
    s.amp(0) = 1.0;
    return s;
  }
  // bit of qubit k in basis index b, qubit 0 leftmost: |q0 q1 ... >
  int bit(std::uint32_t b, int k) const { return (b >> (n_qubits - 1 - k)) & 1; }
};

inline Eigen::Matrix2cd gate_matrix_1q(GateLabel g) {
  using M = Eigen::Matrix2cd;
  const cplx i01(0.0, 1.0);
  M m;
  switch (g) {
    case GateLabel::I: m << 1, 0, 0, 1; break;
    case GateLabel::H: m << 1, 1, 1, -1; m /= std::sqrt(2.0); break;
    case GateLabel::P: m << 1, 0, 0, i01; break;
    case GateLabel::Pdg: m << 1, 0, 0, -i01; break;
    case GateLabel::T: m << 1, 0, 0, std::polar(1.0, kPi / 4); break;
    case GateLabel::Tdg: m << 1, 0, 0, std::polar(1.0, -kPi / 4); break;
    case GateLabel::X: m << 0, 1, 1, 0; break;
    case GateLabel::Y: m << 0, -i01, i01, 0; break;
    case GateLabel::Z: m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("gate_matrix_1q: not single-qubit");
  }
  return m;
}

inline void dv_apply(DvState& s, const Gate& g) {
  const int n = s.n_qubits;
  const std::uint32_t dim = 1u << n;
  auto check = [&](int q) {
    if (q < 0 || q >= n) throw std::invalid_argument("dv_apply: wire out of range");
  };
  switch (g.label) {
    case GateLabel::CZ: {
      check(g.w[0]); check(g.w[1]);
      for (std::uint32_t b = 0; b < dim; ++b)
        if (s.bit(b, g.w[0]) && s.bit(b, g.w[1])) s.amp(b) = -s.amp(b);
      return;
    }
    case GateLabel::CCZ: {
      check(g.w[0]); check(g.w[1]); check(g.w[2]);
      for (std::uint32_t b = 0; b < dim; ++b)
        if (s.bit(b, g.w[0]) && s.bit(b, g.w[1]) && s.bit(b, g.w[2])) s.amp(b) = -s.amp(b);
      return;
    }
    case GateLabel::SWAP: {
      check(g.w[0]); check(g.w[1]);
      const std::uint32_t m0 = 1u << (n - 1 - g.w[0]), m1 = 1u << (n - 1 - g.w[1]);
      for (std::uint32_t b = 0; b < dim; ++b) {
        const bool b0 = b & m0, b1 = b & m1;
        if (b0 && !b1) {
          const std::uint32_t b2 = (b & ~m0) | m1;
          std::swap(s.amp(b), s.amp(b2));
        }
      }
      return;
    }
    case GateLabel::CX: {
      check(g.w[0]); check(g.w[1]);
      const std::uint32_t mc = 1u << (n - 1 - g.w[0]), mt = 1u << (n - 1 - g.w[1]);
      for (std::uint32_t b = 0; b < dim; ++b) {
        if ((b & mc) && !(b & mt)) std::swap(s.amp(b), s.amp(b | mt));
      }
      return;
    }
    default: {
      check(g.w[0]);
      const auto m = gate_matrix_1q(g.label);
      const std::uint32_t mq = 1u << (n - 1 - g.w[0]);
      for (std::uint32_t b = 0; b < dim; ++b) {
        if (b & mq) continue;
        const cplx a0 = s.amp(b), a1 = s.amp(b | mq);
        s.amp(b) = m(0, 0) * a0 + m(0, 1) * a1;
        s.amp(b | mq) = m(1, 0) * a0 + m(1, 1) * a1;
      }
      return;
    }
  }
}

// Exact statevector simulation from |0...0>; Paulis applied explicitly.
inline DvState dv_simulate(const Circuit& circuit, int n_qubits) {
  DvState s = DvState::zero(n_qubits);
  for (const auto& g : circuit) dv_apply(s, g);
  return s;
}

// Full unitary of a circuit (for matrix-comparison oracles).
inline MatrixC dv_unitary(const Circuit& circuit, int n_qubits) {
  const int dim = 1 << n_qubits;
  MatrixC u(dim, dim);
  for (int col = 0; col < dim; ++col) {
    DvState s;
    s.n_qubits = n_qubits;
    s.amp = VectorC::Zero(dim);
    s.amp(col) = 1.0;
    for (const auto& g : circuit) dv_apply(s, g);
    u.col(col) = s.amp;
  }
  return u;
}

}  // namespace qrlsim
