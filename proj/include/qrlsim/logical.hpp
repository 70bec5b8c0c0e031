// Logical decoding of CV states into density matrices.
//
// rho_L = (1/2^N) sum_sigma <sigma_CV> sigma over all Pauli strings, where
// the GKP Pauli operators are the displacements X_CV = D(sqrt(pi/2)),
// Z_CV = D(i sqrt(pi/2)) and Y_CV = i X_CV Z_CV = D(sqrt(pi/2)(1+i)).
// The decoded matrix is hermitized, trace normalized, and small negative
// eigenvalues from finite-energy decoding are clipped (warning above 1e-3).

#pragma once

#include <Eigen/Eigenvalues>

#include "qrlsim/dv.hpp"
#include "qrlsim/fmps.hpp"

namespace qrlsim {

struct LogicalDensityMatrix {
  MatrixC rho;
  int n_qubits = 0;
  double clipped_negativity = 0.0;  // most negative eigenvalue before clipping
  bool negativity_warning = false;  // set when it exceeded 1e-3
};

namespace detail {

inline const std::array<Eigen::Matrix2cd, 4>& pauli_matrices() {
  static const std::array<Eigen::Matrix2cd, 4> p = {
      gate_matrix_1q(GateLabel::I), gate_matrix_1q(GateLabel::X),
      gate_matrix_1q(GateLabel::Y), gate_matrix_1q(GateLabel::Z)};
  return p;
}

inline cplx pauli_displacement(int which) {
  const double r = std::sqrt(kPi / 2.0);
  switch (which) {
    case 0: return cplx(0.0, 0.0);
    case 1: return cplx(r, 0.0);    // X_CV
    case 2: return cplx(r, r);      // Y_CV = i X_CV Z_CV
    case 3: return cplx(0.0, r);    // Z_CV
  }
  return {};
}

}  // namespace detail

// Decode the logical content of the given modes (one mode per qubit).
inline LogicalDensityMatrix logical_dm(const FmpsState& state,
                                       const std::vector<int>& qubit_modes) {
  const int n = static_cast<int>(qubit_modes.size());
  if (n < 1 || n > 4) throw std::invalid_argument("logical_dm: 1..4 qubits");
  for (int m : qubit_modes) {
    if (m < 0 || m >= state.mode_count()) throw std::invalid_argument("logical_dm: bad mode");
  }
  const int dim = 1 << n;
  const int strings = 1 << (2 * n);
  MatrixC rho = MatrixC::Zero(dim, dim);
  std::vector<cplx> alphas(state.mode_count(), cplx(0, 0));
  for (int code = 0; code < strings; ++code) {
    std::fill(alphas.begin(), alphas.end(), cplx(0, 0));
    int c = code;
    std::vector<int> which(n);
    for (int k = n - 1; k >= 0; --k) {
      which[k] = c & 3;
      c >>= 2;
      alphas[qubit_modes[k]] = detail::pauli_displacement(which[k]);
    }
    const cplx e = expect_displacement(state, alphas);
    // assemble sigma with qubit 0 as the most significant factor
    MatrixC sigma = MatrixC::Ones(1, 1);
    for (int k = n - 1; k >= 0; --k) {
      MatrixC next(sigma.rows() * 2, sigma.cols() * 2);
      const auto& p = detail::pauli_matrices()[which[k]];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          next.block(a * sigma.rows(), b * sigma.cols(), sigma.rows(), sigma.cols()) =
              p(a, b) * sigma;
      sigma = std::move(next);
    }
    rho += e * sigma;
  }
  rho /= static_cast<double>(dim);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();

  LogicalDensityMatrix out;
  out.n_qubits = n;
  Eigen::SelfAdjointEigenSolver<MatrixC> es(rho);
  VectorR ev = es.eigenvalues();
  out.clipped_negativity = std::max(0.0, -ev.minCoeff());
  out.negativity_warning = out.clipped_negativity > 1e-3;
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::max(0.0, ev(i));
  ev /= ev.sum();
  out.rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

inline double purity(const LogicalDensityMatrix& r) {
  return (r.rho * r.rho).trace().real();
}

// Pure-target fidelity <psi| rho |psi>.
inline double fidelity(const LogicalDensityMatrix& r, const DvState& target) {
  if (r.rho.rows() != target.amp.size()) throw std::invalid_argument("fidelity: dim mismatch");
  const cplx val = (target.amp.adjoint() * r.rho * target.amp)(0, 0);
  return std::real(val);
}

// Conjugate rho by the Pauli correction X^{x} Z^{z} per qubit (bit k of the
// masks refers to qubit k): returns C rho C^H with C = prod_k X_k^{xk} Z_k^{zk}.
inline LogicalDensityMatrix apply_pauli_correction(const LogicalDensityMatrix& r,
                                                   std::uint32_t x_mask, std::uint32_t z_mask) {
  const int n = r.n_qubits;
  MatrixC c = MatrixC::Ones(1, 1);
  for (int k = n - 1; k >= 0; --k) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    if ((z_mask >> k) & 1) m = gate_matrix_1q(GateLabel::Z) * m;
    if ((x_mask >> k) & 1) m = gate_matrix_1q(GateLabel::X) * m;
    MatrixC next(c.rows() * 2, c.cols() * 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        next.block(a * c.rows(), b * c.cols(), c.rows(), c.cols()) = m(a, b) * c;
    c = std::move(next);
  }
  LogicalDensityMatrix out = r;
  out.rho = c * r.rho * c.adjoint();
  return out;
}

inline double trace_distance(const MatrixC& a, const MatrixC& b) {
  Eigen::SelfAdjointEigenSolver<MatrixC> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qrlsim
