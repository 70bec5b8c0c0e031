// Truncated SVD via randomized range finding.
//
// Matrices produced by two-mode kernels are numerically low rank (bond
// dimensions stay near the logical content), so a Gaussian sketch of
// chi_max + oversampling columns followed by a small dense SVD recovers the
// leading subspace. Power iterations sharpen the spectrum for slowly decaying
// tails. Small matrices fall back to an exact dense SVD.

#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <random>
#include <stdexcept>

#include "qrlsim/tensor.hpp"

namespace qrlsim {

struct SvdPolicy {
  double rel_tolerance = 1e-7;  // discard singular values below rel_tol * s_max
  int chi_max = 64;
  int oversampling = 8;
  int power_iterations = 2;

  void validate() const {
    if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0)) {
      throw std::invalid_argument("SvdPolicy: rel_tolerance must be in (0,1)");
    }
    if (chi_max < 2) throw std::invalid_argument("SvdPolicy: chi_max must be >= 2");
    if (oversampling < 0 || power_iterations < 0) {
      throw std::invalid_argument("SvdPolicy: negative oversampling/power_iterations");
    }
  }
};

struct SvdResult {
  MatrixC U;        // m x r, orthonormal columns
  VectorR S;        // r, descending
  MatrixC V;        // k x r, orthonormal columns; M ~ U * diag(S) * V^H
  double discarded_weight = 0.0;  // ||M||_F^2 - sum(kept S^2)
};

template <typename Derived>
SvdResult truncated_rsvd(const Eigen::MatrixBase<Derived>& M_in, const SvdPolicy& policy,
                         std::mt19937_64& rng) {
  policy.validate();
  MatrixC M = M_in;
  if (!M.allFinite()) throw std::invalid_argument("truncated_rsvd: non-finite entries");

  const Eigen::Index m = M.rows(), k = M.cols();
  const Eigen::Index minmk = std::min(m, k);
  const Eigen::Index sketch = std::min<Eigen::Index>(policy.chi_max + policy.oversampling, minmk);
  const double fro2 = M.squaredNorm();

  MatrixC U_full;
  VectorR S_full;
  MatrixC V_full;

  if (sketch >= minmk) {
    Eigen::BDCSVD<MatrixC> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_full = svd.matrixU();
    S_full = svd.singularValues();
    V_full = svd.matrixV();
  } else {
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixC omega(k, sketch);
    for (Eigen::Index j = 0; j < sketch; ++j) {
      for (Eigen::Index i = 0; i < k; ++i) omega(i, j) = cplx(gauss(rng), gauss(rng));
    }
    MatrixC Y = M * omega;
    Eigen::HouseholderQR<MatrixC> qr(Y);
    MatrixC Q = qr.householderQ() * MatrixC::Identity(m, sketch);
    for (int it = 0; it < policy.power_iterations; ++it) {
      MatrixC Z = M.adjoint() * Q;
      Eigen::HouseholderQR<MatrixC> qrz(Z);
      MatrixC Qz = qrz.householderQ() * MatrixC::Identity(k, sketch);
      Y = M * Qz;
      Eigen::HouseholderQR<MatrixC> qry(Y);
      Q = qry.householderQ() * MatrixC::Identity(m, sketch);
    }
    MatrixC B = Q.adjoint() * M;  // sketch x k
    Eigen::BDCSVD<MatrixC> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_full = Q * svd.matrixU();
    S_full = svd.singularValues();
    V_full = svd.matrixV();
  }

  const double s_max = S_full.size() ? S_full(0) : 0.0;
  Eigen::Index rank = 0;
  if (s_max > 0.0) {
    for (Eigen::Index i = 0; i < S_full.size(); ++i) {
      if (i >= policy.chi_max) break;
      if (S_full(i) < policy.rel_tolerance * s_max) break;
      ++rank;
    }
  }
  if (rank == 0) rank = 1;  // zero matrix: keep a rank-1 slot with S = [0]

  SvdResult out;
  out.U = U_full.leftCols(rank);
  out.S = S_full.head(rank);
  out.V = V_full.leftCols(rank);
  double kept = out.S.squaredNorm();
  out.discarded_weight = std::max(0.0, fro2 - kept);
  return out;
}

}  // namespace qrlsim
