#pragma once

#include <random>

#include "qrlsim/fmps.hpp"

namespace qrlsim::testing {

inline double vec_fidelity(const VectorC& a, const VectorC& b) {
  const cplx ov = (a.conjugate().cwiseProduct(b)).sum();
  return std::norm(ov) / (a.squaredNorm() * b.squaredNorm());
}

// Gaussian of given position variance, centered, unit l2 norm.
inline VectorC gaussian_wavefunction(const GridSpec& g, double variance, double center = 0.0) {
  VectorC psi(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double x = g.q(j) - center;
    psi(j) = std::exp(-0.25 * x * x / variance);
  }
  return psi / psi.norm();
}

// n-th harmonic oscillator eigenfunction sampled on the grid, unit norm.
inline VectorC hermite_mode(const GridSpec& g, int n) {
  VectorC prev = VectorC::Zero(g.n), cur(g.n);
  const double c0 = std::pow(kPi, -0.25);
  for (int j = 0; j < g.n; ++j) cur(j) = c0 * std::exp(-0.5 * g.q(j) * g.q(j));
  for (int m = 1; m <= n; ++m) {
    VectorC next(g.n);
    const double a = std::sqrt(2.0 / m), b = (m >= 2) ? std::sqrt((m - 1.0) / m) : 0.0;
    for (int j = 0; j < g.n; ++j) next(j) = a * g.q(j) * cur(j) - b * prev(j);
    prev = cur;
    cur = next;
  }
  return cur / cur.norm();
}

}  // namespace qrlsim::testing
