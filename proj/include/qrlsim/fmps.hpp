// Functional matrix-product-state engine on the shared self-dual grid.
//
// A state is a chain of rank-3 tensors with boundary bonds of dimension 1.
// Stored amplitudes are c_j = psi(q_j) sqrt(dq), so the chain contraction is
// a plain inner product and all spectral kernels are unitary matrices on the
// flat index. Two-mode kernels contract neighbours into a rank-4 tensor,
// act on the two physical axes, and restore the chain with a truncated
// randomized SVD (or a measurement collapse, which needs no SVD).

#pragma once

#include <cstdint>
#include <random>

#include "qrlsim/rsvd.hpp"
#include "qrlsim/states.hpp"

namespace qrlsim {

enum class BsConvention : int {
  plus = +1,   // psi'(x,y) = psi((x+y)/sqrt2, (y-x)/sqrt2)
  minus = -1,  // inverse of plus
};

struct FmpsState {
  GridSpec grid;
  SvdPolicy svd;
  std::vector<Tensor3> tensors;
  double norm_log = 0.0;           // accumulated log of factored-out norms
  double truncation_weight = 0.0;  // accumulated discarded SVD weight (unit-norm states)
  std::uint64_t rng_seed = 0;
  std::mt19937_64 rng;

  FmpsState() : rng(0) {}

  static FmpsState from_wavefunctions(const GridSpec& g, const std::vector<VectorC>& modes,
                                      std::uint64_t seed, SvdPolicy policy = {}) {
    FmpsState s;
    s.grid = g;
    s.svd = policy;
    s.rng_seed = seed;
    s.rng.seed(seed);
    for (const auto& w : modes) {
      if (w.size() != g.n) throw std::invalid_argument("from_wavefunctions: size mismatch");
      Tensor3 t(1, g.n, 1);
      for (int j = 0; j < g.n; ++j) t.at(0, j, 0) = w(j);
      s.tensors.push_back(std::move(t));
    }
    return s;
  }

  int mode_count() const { return static_cast<int>(tensors.size()); }

  std::vector<int> bond_dims() const {
    std::vector<int> b;
    for (const auto& t : tensors) b.push_back(t.br);
    if (!b.empty()) b.pop_back();
    return b;
  }
  int max_bond() const {
    int m = 1;
    for (int b : bond_dims()) m = std::max(m, b);
    return m;
  }
};

namespace env {

// Strided bl x br slice of a rank-3 tensor at fixed physical index.
using SliceMap = Eigen::Map<const RowMatC, 0, Eigen::OuterStride<>>;

inline SliceMap slice(const Tensor3& t, int x) {
  return SliceMap(t.v.data() + static_cast<size_t>(x) * t.br, t.bl, t.br,
                  Eigen::OuterStride<>(static_cast<Eigen::Index>(t.nx) * t.br));
}

// Gram of the chain segment [0, j): E(ket alpha, bra alpha').
inline MatrixC left_of(const FmpsState& s, int j) {
  MatrixC e = MatrixC::Ones(1, 1);
  for (int m = 0; m < j; ++m) {
    const Tensor3& t = s.tensors[m];
    MatrixC next = MatrixC::Zero(t.br, t.br);
    for (int x = 0; x < t.nx; ++x) {
      auto a = slice(t, x);
      next.noalias() += a.transpose() * e * a.conjugate();
    }
    e = std::move(next);
  }
  return e;
}

// Gram of the chain segment (j, end]: R(ket beta, bra beta').
inline MatrixC right_of(const FmpsState& s, int j) {
  MatrixC e = MatrixC::Ones(1, 1);
  for (int m = s.mode_count() - 1; m > j; --m) {
    const Tensor3& t = s.tensors[m];
    MatrixC next = MatrixC::Zero(t.bl, t.bl);
    for (int x = 0; x < t.nx; ++x) {
      auto a = slice(t, x);
      next.noalias() += a * e * a.adjoint();
    }
    e = std::move(next);
  }
  return e;
}

}  // namespace env

inline double norm_squared(const FmpsState& s) {
  if (s.tensors.empty()) return 1.0;
  return std::real(env::left_of(s, s.mode_count())(0, 0));
}

// <a|b> for equal-geometry chains.
inline cplx mps_overlap(const FmpsState& a, const FmpsState& b) {
  if (a.mode_count() != b.mode_count()) throw std::invalid_argument("mps_overlap: mode mismatch");
  MatrixC e = MatrixC::Ones(1, 1);  // E(ket beta_b, bra beta_a)
  for (int m = 0; m < a.mode_count(); ++m) {
    const Tensor3& ta = a.tensors[m];
    const Tensor3& tb = b.tensors[m];
    if (ta.nx != tb.nx) throw std::invalid_argument("mps_overlap: grid mismatch");
    MatrixC next = MatrixC::Zero(tb.br, ta.br);
    for (int x = 0; x < ta.nx; ++x) {
      next.noalias() += env::slice(tb, x).transpose() * e * env::slice(ta, x).conjugate();
    }
    e = std::move(next);
  }
  return e(0, 0);
}

inline double fidelity_states(const FmpsState& a, const FmpsState& b) {
  return std::norm(mps_overlap(a, b));
}

// Scale the chain to unit norm; returns the factored-out norm.
inline double renormalize(FmpsState& s) {
  const double nrm = std::sqrt(norm_squared(s));
  if (!(nrm > 0.0)) throw std::runtime_error("renormalize: vanished state");
  if (!s.tensors.empty()) {
    const double inv = 1.0 / nrm;
    for (auto& z : s.tensors[0].v) z *= inv;
  }
  s.norm_log += std::log(nrm);
  return nrm;
}

// ---------------------------------------------------------------------------
// Single-mode kernels

inline void apply_rotation(FmpsState& s, int mode, double theta) {
  if (mode < 0 || mode >= s.mode_count()) throw std::out_of_range("apply_rotation: mode");
  axis_rotate(s.grid, s.tensors[mode].physical_span(), theta);
}

// ---------------------------------------------------------------------------
// Beam splitter: 50:50 coordinate rotation of two adjacent physical axes,
// realized as three spectral shears (exact unitary on the torus).

namespace detail {

// psi'(x, y) = psi(x + a*q_y, y) for every fiber along x.
inline void shear_x(const GridSpec& g, Tensor4& t, double a) {
  axis_centered_dft(g, t.x_span(), false);
  thread_local std::vector<cplx> table;
  const int n = g.n;
  table.resize(static_cast<size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    for (int y = 0; y < n; ++y) {
      table[static_cast<size_t>(k) * n + y] = std::polar(1.0, a * g.q(k) * g.q(y));
    }
  }
  for (int b = 0; b < t.bl; ++b) {
    for (int k = 0; k < n; ++k) {
      const cplx* row = &table[static_cast<size_t>(k) * n];
      for (int y = 0; y < n; ++y) {
        cplx* p = &t.at(b, k, y, 0);
        const cplx f = row[y];
        for (int c = 0; c < t.br; ++c) p[c] *= f;
      }
    }
  }
  axis_centered_dft(g, t.x_span(), true);
}

// psi'(x, y) = psi(x, y + b*q_x) for every fiber along y.
inline void shear_y(const GridSpec& g, Tensor4& t, double bcoef) {
  axis_centered_dft(g, t.y_span(), false);
  const int n = g.n;
  for (int b = 0; b < t.bl; ++b) {
    for (int x = 0; x < n; ++x) {
      const double qx = g.q(x);
      for (int k = 0; k < n; ++k) {
        const cplx f = std::polar(1.0, bcoef * g.q(k) * qx);
        cplx* p = &t.at(b, x, k, 0);
        for (int c = 0; c < t.br; ++c) p[c] *= f;
      }
    }
  }
  axis_centered_dft(g, t.y_span(), true);
}

// Coordinate rotation psi'(z) = psi(R(phi) z) with R(phi) = [[c,-s],[s,c]].
inline void rotate_coords_t4(const GridSpec& g, Tensor4& t, double phi) {
  const double a = -std::tan(0.5 * phi);
  const double b = std::sin(phi);
  shear_x(g, t, a);
  shear_y(g, t, b);
  shear_x(g, t, a);
}

}  // namespace detail

// In-place 50:50 beam-splitter action on a contracted rank-4 tensor.
// plus: psi'(x,y) = psi((x+y)/sqrt2, (y-x)/sqrt2), i.e. R(-pi/4) coordinates.
inline void bs_rotate(const GridSpec& g, Tensor4& t, BsConvention conv) {
  detail::rotate_coords_t4(g, t, conv == BsConvention::plus ? -kPi / 4.0 : kPi / 4.0);
}

inline void apply_beamsplitter(FmpsState& s, int i, BsConvention conv) {
  if (i < 0 || i + 1 >= s.mode_count()) {
    throw std::out_of_range("apply_beamsplitter: needs adjacent modes (i, i+1)");
  }
  Tensor4 t4 = contract_pair(s.tensors[i], s.tensors[i + 1]);
  bs_rotate(s.grid, t4, conv);
  SvdResult res = truncated_rsvd(t4.as_split_matrix(), s.svd, s.rng);
  const int r = static_cast<int>(res.S.size());
  Tensor3 left(t4.bl, t4.nx, r), right(r, t4.ny, t4.br);
  Eigen::Map<RowMatC>(left.v.data(), static_cast<Eigen::Index>(t4.bl) * t4.nx, r) = res.U;
  Eigen::Map<RowMatC>(right.v.data(), r, static_cast<Eigen::Index>(t4.ny) * t4.br) =
      res.S.asDiagonal() * res.V.adjoint();
  s.tensors[i] = std::move(left);
  s.tensors[i + 1] = std::move(right);
  s.truncation_weight += res.discarded_weight;
  renormalize(s);
}

// ---------------------------------------------------------------------------
// Homodyne measurement

// Probability weight per grid cell of mode j (state assumed already rotated).
inline VectorR mode_cell_weights(const FmpsState& s, int j) {
  const Tensor3& t = s.tensors[j];
  MatrixC el = env::left_of(s, j);
  MatrixC er = env::right_of(s, j);
  VectorR d(t.nx);
  for (int x = 0; x < t.nx; ++x) {
    auto a = env::slice(t, x);
    MatrixC tmp = a.transpose() * el * a.conjugate();
    d(x) = std::max(0.0, std::real(tmp.cwiseProduct(er).sum()));
  }
  return d;
}

// Marginal cell weights of the quadrature at angle theta (non-destructive).
inline VectorR marginal_distribution(const FmpsState& s, int mode, double theta) {
  FmpsState copy = s;
  apply_rotation(copy, mode, -theta);
  return mode_cell_weights(copy, mode);
}

namespace detail {

// Remove mode j, evaluating its physical index at x_idx and absorbing the
// residual matrix into the right neighbour (left if j is the last mode).
inline void collapse_mode_at_index(FmpsState& s, int j, int x_idx) {
  const Tensor3& t = s.tensors[j];
  MatrixC cut = env::slice(t, x_idx);  // bl x br
  if (j + 1 < s.mode_count()) {
    Tensor3& r = s.tensors[j + 1];
    Tensor3 merged(static_cast<int>(cut.rows()), r.nx, r.br);
    merged.as_right_matrix().noalias() = cut * r.as_right_matrix();
    s.tensors[j + 1] = std::move(merged);
  } else if (j > 0) {
    Tensor3& l = s.tensors[j - 1];
    Tensor3 merged(l.bl, l.nx, static_cast<int>(cut.cols()));
    merged.as_left_matrix().noalias() = l.as_left_matrix() * cut;
    s.tensors[j - 1] = std::move(merged);
  } else {
    s.norm_log += std::log(std::abs(cut(0, 0)));
  }
  s.tensors.erase(s.tensors.begin() + j);
}

// Inverse-CDF sample over cell weights; returns (index, continuous value).
inline std::pair<int, double> sample_cells(const GridSpec& g, const VectorR& w,
                                           std::mt19937_64& rng) {
  const double total = w.sum();
  if (!(total > 1e-12)) throw std::runtime_error("measure_homodyne: state lost domain");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng) * total;
  double acc = 0.0;
  int idx = g.n - 1;
  double frac = 0.5;
  for (int j = 0; j < g.n; ++j) {
    if (u < acc + w(j)) {
      idx = j;
      frac = (u - acc) / w(j);
      break;
    }
    acc += w(j);
  }
  return {idx, g.q(idx) + (frac - 0.5) * g.dq};
}

}  // namespace detail

struct HomodyneResult {
  double m = 0.0;   // continuous outcome
  int index = 0;    // collapsed grid index
  double mass = 0;  // total marginal mass before sampling
};

// Measure quadrature at angle theta on one mode; collapses and removes it.
inline HomodyneResult measure_homodyne(FmpsState& s, int mode, double theta) {
  if (mode < 0 || mode >= s.mode_count()) throw std::out_of_range("measure_homodyne: mode");
  apply_rotation(s, mode, -theta);
  VectorR w = mode_cell_weights(s, mode);
  auto [idx, m] = detail::sample_cells(s.grid, w, s.rng);
  detail::collapse_mode_at_index(s, mode, idx);
  renormalize(s);
  return HomodyneResult{m, idx, w.sum()};
}

// Deterministic variant: collapse at the grid point nearest to m_forced.
inline HomodyneResult homodyne_at(FmpsState& s, int mode, double theta, double m_forced) {
  apply_rotation(s, mode, -theta);
  VectorR w = mode_cell_weights(s, mode);
  const int idx = s.grid.index_of(m_forced);
  detail::collapse_mode_at_index(s, mode, idx);
  renormalize(s);
  return HomodyneResult{m_forced, idx, w.sum()};
}

// ---------------------------------------------------------------------------
// Fused gadget kernels: beam splitter + homodyne collapse on the contracted
// pair, with no intermediate SVD. Bond dimensions cannot grow here, so the
// chain stays exact up to the spectral kernels themselves.

namespace detail {

// Marginal over the x (axis=0) or y (axis=1) physical axis of a working
// rank-4 tensor, with explicit left/right Gram environments.
inline VectorR t4_axis_weights(const Tensor4& t, int axis, const MatrixC& el,
                               const MatrixC& er) {
  const int n = (axis == 0) ? t.nx : t.ny;
  const int other = (axis == 0) ? t.ny : t.nx;
  VectorR d = VectorR::Zero(n);
  MatrixC a(t.bl, t.br);
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int y = 0; y < other; ++y) {
      for (int b = 0; b < t.bl; ++b)
        for (int c = 0; c < t.br; ++c)
          a(b, c) = (axis == 0) ? t.at(b, x, y, c) : t.at(b, y, x, c);
      MatrixC tmp = a.transpose() * el * a.conjugate();
      acc += std::real(tmp.cwiseProduct(er).sum());
    }
    d(x) = std::max(0.0, acc);
  }
  return d;
}

inline Tensor3 t4_collapse(const Tensor4& t, int axis, int idx) {
  if (axis == 0) return t.collapse_x(idx);
  Tensor3 out(t.bl, t.nx, t.br);
  for (int b = 0; b < t.bl; ++b)
    for (int x = 0; x < t.nx; ++x)
      for (int c = 0; c < t.br; ++c) out.at(b, x, c) = t.at(b, x, idx, c);
  return out;
}

inline VectorR t3_weights(const Tensor3& t, const MatrixC& el, const MatrixC& er) {
  VectorR d(t.nx);
  for (int x = 0; x < t.nx; ++x) {
    auto a = env::slice(t, x);
    MatrixC tmp = a.transpose() * el * a.conjugate();
    d(x) = std::max(0.0, std::real(tmp.cwiseProduct(er).sum()));
  }
  return d;
}

// Replace modes (i, i+1) by a single working tensor.
inline void splice_in(FmpsState& s, int i, Tensor3&& t) {
  s.tensors.erase(s.tensors.begin() + i);
  s.tensors[i] = std::move(t);
}

// Remove mode i entirely, absorbing the residual bl x br matrix.
inline void splice_out(FmpsState& s, int i, const MatrixC& cut) {
  if (i + 1 < s.mode_count()) {
    Tensor3& r = s.tensors[i + 1];
    Tensor3 merged(static_cast<int>(cut.rows()), r.nx, r.br);
    merged.as_right_matrix().noalias() = cut * r.as_right_matrix();
    s.tensors[i + 1] = std::move(merged);
  } else if (i > 0) {
    Tensor3& l = s.tensors[i - 1];
    Tensor3 merged(l.bl, l.nx, static_cast<int>(cut.cols()));
    merged.as_left_matrix().noalias() = l.as_left_matrix() * cut;
    s.tensors[i - 1] = std::move(merged);
  } else {
    s.norm_log += std::log(std::max(1e-300, std::abs(cut(0, 0))));
  }
  s.tensors.erase(s.tensors.begin() + i);
}

}  // namespace detail

// Beam-split modes (i, i+1) and homodyne one of the two outputs (axis 0 is
// mode i, axis 1 is mode i+1) at angle theta. The measured mode disappears;
// the survivor keeps both bonds. Returns the outcome.
inline HomodyneResult bs_then_measure_one(FmpsState& s, int i, BsConvention conv, int axis,
                                          double theta) {
  Tensor4 t4 = contract_pair(s.tensors[i], s.tensors[i + 1]);
  bs_rotate(s.grid, t4, conv);
  axis_rotate(s.grid, axis == 0 ? t4.x_span() : t4.y_span(), -theta);
  MatrixC el = env::left_of(s, i);
  MatrixC er = env::right_of(s, i + 1);
  VectorR w = detail::t4_axis_weights(t4, axis, el, er);
  auto [idx, m] = detail::sample_cells(s.grid, w, s.rng);
  detail::splice_in(s, i, detail::t4_collapse(t4, axis, idx));
  renormalize(s);
  return HomodyneResult{m, idx, w.sum()};
}

// Beam-split modes (i, i+1) and homodyne both outputs (mode i at theta_x,
// mode i+1 at theta_y). Both modes disappear; the residual matrix is absorbed
// into a neighbour. Returns both outcomes.
inline std::pair<HomodyneResult, HomodyneResult> bs_then_measure_both(FmpsState& s, int i,
                                                                      BsConvention conv,
                                                                      double theta_x,
                                                                      double theta_y) {
  Tensor4 t4 = contract_pair(s.tensors[i], s.tensors[i + 1]);
  bs_rotate(s.grid, t4, conv);
  axis_rotate(s.grid, t4.x_span(), -theta_x);
  MatrixC el = env::left_of(s, i);
  MatrixC er = env::right_of(s, i + 1);
  VectorR wx = detail::t4_axis_weights(t4, 0, el, er);
  auto [ix, mx] = detail::sample_cells(s.grid, wx, s.rng);
  Tensor3 t3 = detail::t4_collapse(t4, 0, ix);

  axis_rotate(s.grid, t3.physical_span(), -theta_y);
  VectorR wy = detail::t3_weights(t3, el, er);
  auto [iy, my] = detail::sample_cells(s.grid, wy, s.rng);
  MatrixC cut = env::slice(t3, iy);

  s.tensors.erase(s.tensors.begin() + i);  // drop mode i placeholder
  detail::splice_out(s, i, cut);           // drop mode i+1, absorb residual
  renormalize(s);
  return {HomodyneResult{mx, ix, wx.sum()}, HomodyneResult{my, iy, wy.sum()}};
}

// ---------------------------------------------------------------------------
// Two-mode state injection

// Insert a bond-2 pair at bond position pos (0..mode_count). The host bond
// chi passes through both pair tensors; the pair bond multiplies it, so the
// inserted bond is 2*chi. No SVD unless the cap is exceeded.
inline void insert_two_mode(FmpsState& s, int pos, const BellPairMps& pair) {
  if (pair.grid_n != s.grid.n) throw std::invalid_argument("insert_two_mode: grid mismatch");
  if (pos < 0 || pos > s.mode_count()) throw std::out_of_range("insert_two_mode: pos");
  if (s.tensors.empty()) {
    s.tensors = {pair.a, pair.b};
    return;
  }
  const int chi = (pos == 0) ? 1 : s.tensors[pos - 1].br;
  const int n = s.grid.n;
  Tensor3 pa(chi, n, 2 * chi), pb(2 * chi, n, chi);
  for (int c = 0; c < chi; ++c) {
    for (int x = 0; x < n; ++x) {
      pa.at(c, x, 2 * c + 0) = pair.a.at(0, x, 0);
      pa.at(c, x, 2 * c + 1) = pair.a.at(0, x, 1);
      pb.at(2 * c + 0, x, c) = pair.b.at(0, x, 0);
      pb.at(2 * c + 1, x, c) = pair.b.at(1, x, 0);
    }
  }
  s.tensors.insert(s.tensors.begin() + pos, std::move(pb));
  s.tensors.insert(s.tensors.begin() + pos, std::move(pa));
  if (2 * chi > s.svd.chi_max) {
    Tensor4 t4 = contract_pair(s.tensors[pos], s.tensors[pos + 1]);
    SvdResult res = truncated_rsvd(t4.as_split_matrix(), s.svd, s.rng);
    const int r = static_cast<int>(res.S.size());
    Tensor3 left(t4.bl, t4.nx, r), right(r, t4.ny, t4.br);
    Eigen::Map<RowMatC>(left.v.data(), static_cast<Eigen::Index>(t4.bl) * t4.nx, r) = res.U;
    Eigen::Map<RowMatC>(right.v.data(), r, static_cast<Eigen::Index>(t4.ny) * t4.br) =
        res.S.asDiagonal() * res.V.adjoint();
    s.tensors[pos] = std::move(left);
    s.tensors[pos + 1] = std::move(right);
    s.truncation_weight += res.discarded_weight;
    renormalize(s);
  }
}

// ---------------------------------------------------------------------------
// Displacement expectation values

inline void axis_displace(const GridSpec& g, const AxisSpan& span, double q0, double p0) {
  const std::int64_t block = static_cast<std::int64_t>(g.n) * span.inner;
  thread_local std::vector<cplx> fiber;
  fiber.resize(g.n);
  for (std::int64_t o = 0; o < span.outer; ++o) {
    for (std::int64_t i = 0; i < span.inner; ++i) {
      cplx* base = span.data + o * block + i;
      for (int x = 0; x < g.n; ++x) fiber[x] = base[static_cast<std::int64_t>(x) * span.inner];
      displace_fiber(g, fiber.data(), q0, p0);
      for (int x = 0; x < g.n; ++x) base[static_cast<std::int64_t>(x) * span.inner] = fiber[x];
    }
  }
}

// <psi| prod_i D(alpha_i) |psi> with q0 = sqrt2 Re(alpha), p0 = sqrt2 Im(alpha).
inline cplx expect_displacement(const FmpsState& s, const std::vector<cplx>& alphas) {
  if (static_cast<int>(alphas.size()) != s.mode_count()) {
    throw std::invalid_argument("expect_displacement: one alpha per mode");
  }
  FmpsState shifted = s;
  for (int m = 0; m < s.mode_count(); ++m) {
    const double q0 = std::sqrt(2.0) * std::real(alphas[m]);
    const double p0 = std::sqrt(2.0) * std::imag(alphas[m]);
    if (q0 == 0.0 && p0 == 0.0) continue;
    axis_displace(s.grid, shifted.tensors[m].physical_span(), q0, p0);
  }
  return mps_overlap(s, shifted);  // <s| D |s>
}

}  // namespace qrlsim
