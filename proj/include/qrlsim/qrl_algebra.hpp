// Symplectic calculus for teleportation gadgets in the ideal-EPR limit.
//
// Modes carry quadrature symbols (q_1..q_M, p_1..p_M). Passive elements act
// as symplectic matrices on the symbols; an ideal Bell pair contributes the
// nullifiers q_i - q_j and p_i + p_j; a homodyne measurement pins the
// measured combination to a c-number. Expanding the output-mode symbols in
// the basis {input symbols, nullifiers, measured symbols} yields the induced
// symplectic map V on the logical wires and the outcome-to-displacement
// decode coefficients. V with integer entries is a GKP Clifford whose class
// is V mod 2; calibration uses this to shortlist angle programs before
// verifying them on the full simulator.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qrlsim/fmps.hpp"

namespace qrlsim {

class GadgetAlgebra {
 public:
  // mode_count modes; inputs = wire modes (in logical order); pairs = EPR
  // pairs (i, j); outputs = modes carrying the wires afterwards.
  GadgetAlgebra(int mode_count, std::vector<int> inputs, std::vector<std::pair<int, int>> pairs,
                std::vector<int> outputs)
      : m_(mode_count),
        inputs_(std::move(inputs)),
        pairs_(std::move(pairs)),
        outputs_(std::move(outputs)) {
    sym_ = Eigen::MatrixXd::Identity(2 * m_, 2 * m_);
  }

  // R(theta) = exp(i theta n): q -> q cos - p sin, p -> q sin + p cos.
  void rotate(int mode, double theta) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2 * m_, 2 * m_);
    const double c = std::cos(theta), s = std::sin(theta);
    h(qi(mode), qi(mode)) = c;
    h(qi(mode), pi(mode)) = -s;
    h(pi(mode), qi(mode)) = s;
    h(pi(mode), pi(mode)) = c;
    sym_ = h * sym_;
  }

  // Matches bs_rotate: plus means q_i' = (q_i - q_j)/sqrt2, q_j' = (q_i + q_j)/sqrt2
  // in the Heisenberg picture (and identically for p).
  void beamsplitter(int i, int j, BsConvention conv) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2 * m_, 2 * m_);
    const double r = 1.0 / std::sqrt(2.0);
    const double sgn = (conv == BsConvention::plus) ? 1.0 : -1.0;
    for (auto [a, b] : {std::pair<int, int>{qi(i), qi(j)}, std::pair<int, int>{pi(i), pi(j)}}) {
      h(a, a) = r;
      h(a, b) = -sgn * r;
      h(b, a) = sgn * r;
      h(b, b) = r;
    }
    sym_ = h * sym_;
  }

  // Homodyne of mode at angle theta: record cos(theta) q + sin(theta) p.
  void measure(int mode, double theta) {
    Eigen::VectorXd v =
        std::cos(theta) * sym_.row(qi(mode)).transpose() +
        std::sin(theta) * sym_.row(pi(mode)).transpose();
    measured_.push_back(v);
  }

  struct Result {
    Eigen::MatrixXd v;       // 2W x 2W symplectic on (q_1, p_1, q_2, p_2, ...)
    Eigen::MatrixXd decode;  // 2W x n_meas displacement coefficients
    bool well_posed = false;
  };

  Result solve() const {
    const int w = static_cast<int>(inputs_.size());
    const int np = static_cast<int>(pairs_.size());
    const int nm = static_cast<int>(measured_.size());
    Result res;
    if (2 * w + 2 * np + nm != 2 * m_) return res;

    Eigen::MatrixXd basis(2 * m_, 2 * m_);
    int col = 0;
    for (int k = 0; k < w; ++k) {
      basis.col(col++) = unit(qi(inputs_[k]));
      basis.col(col++) = unit(pi(inputs_[k]));
    }
    for (const auto& [a, b] : pairs_) {
      basis.col(col++) = unit(qi(a)) - unit(qi(b));
      basis.col(col++) = unit(pi(a)) + unit(pi(b));
    }
    for (const auto& v : measured_) basis.col(col++) = v;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) return res;

    res.v.resize(2 * w, 2 * w);
    res.decode.resize(2 * w, nm);
    for (int k = 0; k < w; ++k) {
      for (int qp = 0; qp < 2; ++qp) {
        const int row = (qp == 0) ? qi(outputs_[k]) : pi(outputs_[k]);
        Eigen::VectorXd c = lu.solve(sym_.row(row).transpose());
        for (int t = 0; t < 2 * w; ++t) res.v(2 * k + qp, t) = c(t);
        for (int t = 0; t < nm; ++t) res.decode(2 * k + qp, t) = c(2 * w + 2 * np + t);
      }
    }
    res.well_posed = true;
    return res;
  }

 private:
  int qi(int mode) const { return mode; }
  int pi(int mode) const { return m_ + mode; }
  Eigen::VectorXd unit(int k) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * m_);
    v(k) = 1.0;
    return v;
  }

  int m_;
  std::vector<int> inputs_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> outputs_;
  Eigen::MatrixXd sym_;
  std::vector<Eigen::VectorXd> measured_;
};

// Integer test and mod-2 reduction of an induced symplectic map.
inline std::optional<Eigen::MatrixXi> symplectic_mod2(const Eigen::MatrixXd& v,
                                                      double tol = 1e-8) {
  Eigen::MatrixXi out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const double r = std::round(v(i, j));
      if (std::abs(v(i, j) - r) > tol) return std::nullopt;
      out(i, j) = static_cast<int>(std::llabs(static_cast<long long>(r))) % 2;
    }
  }
  return out;
}

// Symplectic mod-2 class of the target gates, basis (q1, p1[, q2, p2]).
inline Eigen::MatrixXi gate_symplectic_mod2(GateLabel g) {
  auto id = [](int n) { return Eigen::MatrixXi::Identity(n, n).eval(); };
  switch (g) {
    case GateLabel::I: return id(2);
    case GateLabel::H: {
      Eigen::MatrixXi m(2, 2);
      m << 0, 1, 1, 0;
      return m;
    }
    case GateLabel::P:
    case GateLabel::Pdg: {
      Eigen::MatrixXi m(2, 2);
      m << 1, 0, 1, 1;
      return m;
    }
    case GateLabel::CZ: {
      Eigen::MatrixXi m = id(4);
      m(1, 2) = 1;  // p1 += q2
      m(3, 0) = 1;  // p2 += q1
      return m;
    }
    case GateLabel::CX: {  // control = wire 1, target = wire 2 (SUM gate)
      Eigen::MatrixXi m = id(4);
      m(2, 0) = 1;  // q2 += q1
      m(1, 3) = 1;  // p1 -= p2
      return m;
    }
    case GateLabel::SWAP: {
      Eigen::MatrixXi m = Eigen::MatrixXi::Zero(4, 4);
      m(0, 2) = m(1, 3) = m(2, 0) = m(3, 1) = 1;
      return m;
    }
    default: throw std::invalid_argument("gate_symplectic_mod2: not a gadget Clifford");
  }
}

}  // namespace qrlsim
