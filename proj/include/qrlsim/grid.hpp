// Self-dual quadrature grid and single-axis spectral kernels.
//
// All modes in a simulation share one GridSpec with spacing dq = sqrt(2*pi/n),
// so the centered DFT maps the position grid onto the momentum grid exactly.
// Rotations R(theta) = exp(i*theta*n_hat) are realized as quarter-turn DFTs
// composed with a chirp / p-chirp / chirp shear decomposition of the residual
// angle; every step is a diagonal phase or a unitary DFT, so the discrete
// kernel is exactly norm preserving.
//
// Transforms operate on "axis spans": row-major blocks laid out as
// (outer, n, inner), covering both MPS tensors and dense oracle arrays.
// FFTs are batched through FFTW with cached plans. Plan creation is not
// thread safe; guarded by a mutex since planning is rare.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace qrlsim {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline const double kSqrtPi = std::sqrt(kPi);

struct GridSpec {
  int n = 0;                // number of points, power of two
  double dq = 0.0;          // spacing, sqrt(2*pi/n)
  double half_width = 0.0;  // L = n/2 * dq

  static GridSpec make(int n_points) {
    if (n_points < 8 || (n_points & (n_points - 1)) != 0) {
      throw std::invalid_argument("GridSpec: n_points must be a power of two >= 8");
    }
    GridSpec g;
    g.n = n_points;
    g.dq = std::sqrt(2.0 * kPi / n_points);
    g.half_width = 0.5 * n_points * g.dq;
    return g;
  }

  double q(int j) const { return (j - n / 2) * dq; }

  // Nearest grid index for coordinate x, clamped to the domain.
  int index_of(double x) const {
    int j = static_cast<int>(std::lround(x / dq)) + n / 2;
    return std::clamp(j, 0, n - 1);
  }

  bool operator==(const GridSpec& o) const { return n == o.n; }
  bool operator!=(const GridSpec& o) const { return n != o.n; }
};

// A batch of equal-length fibers along one axis of a row-major block:
// element (o, x, i) sits at data[(o * n + x) * inner + i].
struct AxisSpan {
  cplx* data = nullptr;
  std::int64_t outer = 1;
  std::int64_t inner = 1;
};

namespace detail {

struct PlanKey {
  int n;
  int inner;
  int sign;
  bool operator<(const PlanKey& o) const {
    return std::tie(n, inner, sign) < std::tie(o.n, o.inner, o.sign);
  }
};

class FftwPlanCache {
 public:
  static FftwPlanCache& instance() {
    static FftwPlanCache cache;
    return cache;
  }

  // Unnormalized FFT along the axis of one outer block: inner fibers of
  // length n, stride inner, consecutive fibers offset by one.
  fftw_plan get(int n, int inner, int sign) {
    std::scoped_lock lock(mu_);
    PlanKey key{n, inner, sign};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    int dims[1] = {n};
    fftw_plan p = fftw_plan_many_dft(1, dims, inner, nullptr, nullptr, inner, 1, nullptr,
                                     nullptr, inner, 1, sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw_plan_many_dft failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  FftwPlanCache() = default;
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

inline void raw_fft_span(const AxisSpan& s, int n, bool inverse) {
  fftw_plan p = FftwPlanCache::instance().get(n, static_cast<int>(s.inner),
                                              inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  const std::int64_t block = static_cast<std::int64_t>(n) * s.inner;
  for (std::int64_t o = 0; o < s.outer; ++o) {
    auto* ptr = reinterpret_cast<fftw_complex*>(s.data + o * block);
    fftw_execute_dft(p, ptr, ptr);
  }
}

}  // namespace detail

// Centered unitary DFT on the self-dual grid:
//   out_k = (1/sqrt(n)) sum_j exp(-i p_k q_j) in_j,  p_k = (k - n/2) dq.
// inverse=true applies the adjoint. exp(-i p_k q_j) factors as
// (-1)^(n/2) (-1)^k (-1)^j e^{-2 pi i k j / n}.
inline void axis_centered_dft(const GridSpec& g, const AxisSpan& s, bool inverse) {
  const int n = g.n;
  const std::int64_t inner = s.inner;
  const std::int64_t block = static_cast<std::int64_t>(n) * inner;
  for (std::int64_t o = 0; o < s.outer; ++o) {
    cplx* base = s.data + o * block;
    for (int j = 1; j < n; j += 2) {
      cplx* row = base + static_cast<std::int64_t>(j) * inner;
      for (std::int64_t i = 0; i < inner; ++i) row[i] = -row[i];
    }
  }
  detail::raw_fft_span(s, n, inverse);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double corner = ((n / 2) & 1) ? -1.0 : 1.0;
  for (std::int64_t o = 0; o < s.outer; ++o) {
    cplx* base = o * block + s.data;
    for (int k = 0; k < n; ++k) {
      const double f = corner * ((k & 1) ? -scale : scale);
      cplx* row = base + static_cast<std::int64_t>(k) * inner;
      for (std::int64_t i = 0; i < inner; ++i) row[i] *= f;
    }
  }
}

// Multiply by exp(i c q^2 / 2) along the axis.
inline void axis_chirp(const GridSpec& g, const AxisSpan& s, double c) {
  const int n = g.n;
  thread_local std::vector<cplx> phase;
  phase.resize(n);
  for (int j = 0; j < n; ++j) {
    const double q = g.q(j);
    phase[j] = std::polar(1.0, 0.5 * c * q * q);
  }
  const std::int64_t block = static_cast<std::int64_t>(n) * s.inner;
  for (std::int64_t o = 0; o < s.outer; ++o) {
    cplx* base = s.data + o * block;
    for (int j = 0; j < n; ++j) {
      cplx* row = base + static_cast<std::int64_t>(j) * s.inner;
      for (std::int64_t i = 0; i < s.inner; ++i) row[i] *= phase[j];
    }
  }
}

// psi(q) -> psi(-q): index reversal modulo n along the axis.
inline void axis_parity(const GridSpec& g, const AxisSpan& s) {
  const int n = g.n;
  const std::int64_t block = static_cast<std::int64_t>(n) * s.inner;
  for (std::int64_t o = 0; o < s.outer; ++o) {
    cplx* base = s.data + o * block;
    for (int j = 1, k = n - 1; j < k; ++j, --k) {
      cplx* rj = base + static_cast<std::int64_t>(j) * s.inner;
      cplx* rk = base + static_cast<std::int64_t>(k) * s.inner;
      for (std::int64_t i = 0; i < s.inner; ++i) std::swap(rj[i], rk[i]);
    }
  }
}

inline void axis_scale(const GridSpec& g, const AxisSpan& s, cplx factor) {
  const std::int64_t total = s.outer * g.n * s.inner;
  for (std::int64_t i = 0; i < total; ++i) s.data[i] *= factor;
}

// R(theta) = exp(i theta n_hat) along the axis.
//
// theta reduces to k*(pi/2) + r with |r| <= pi/4; quarter turns are exact
// DFTs / parity, the residual uses
//   R(r) = e^{-ir/2} chirp(tan(r/2)) F^-1 pchirp(sin r) F chirp(tan(r/2)).
inline void axis_rotate(const GridSpec& g, const AxisSpan& s, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("axis_rotate: non-finite angle");
  const long k = std::lround(theta / (kPi / 2.0));
  const double r = theta - static_cast<double>(k) * (kPi / 2.0);

  if (std::abs(r) > 1e-14) {
    const double a = std::tan(0.5 * r);
    const double b = std::sin(r);
    axis_chirp(g, s, a);
    axis_centered_dft(g, s, false);
    axis_chirp(g, s, b);  // p-grid equals q-grid on the self-dual lattice
    axis_centered_dft(g, s, true);
    axis_chirp(g, s, a);
    axis_scale(g, s, std::polar(1.0, -0.5 * r));
  }

  switch (static_cast<int>(((k % 4) + 4) % 4)) {
    case 0: break;
    case 1: axis_centered_dft(g, s, true); break;   // R(pi/2) = F^-1
    case 2: axis_parity(g, s); break;               // R(pi)   = parity
    case 3: axis_centered_dft(g, s, false); break;  // R(3pi/2) = F
  }
}

// Single contiguous fiber helpers.
inline void rotate_fiber(const GridSpec& g, cplx* data, double theta) {
  axis_rotate(g, AxisSpan{data, 1, 1}, theta);
}

inline void centered_dft(const GridSpec& g, cplx* data, bool inverse) {
  axis_centered_dft(g, AxisSpan{data, 1, 1}, inverse);
}

// Exact spectral translation psi(q) -> psi(q - shift) via a momentum ramp.
inline void translate_fiber_spectral(const GridSpec& g, cplx* data, double shift) {
  centered_dft(g, data, false);
  for (int k = 0; k < g.n; ++k) data[k] *= std::polar(1.0, -g.q(k) * shift);
  centered_dft(g, data, true);
}

// Displacement D(alpha) with q0 = sqrt(2) Re(alpha), p0 = sqrt(2) Im(alpha):
//   (D psi)(q) = e^{-i q0 p0 / 2} e^{i p0 q} psi(q - q0),
// position shift by linear interpolation (zero outside the domain), momentum
// kick as a phase ramp.
inline void displace_fiber(const GridSpec& g, cplx* data, double q0, double p0) {
  if (!std::isfinite(q0) || !std::isfinite(p0)) {
    throw std::invalid_argument("displace_fiber: non-finite displacement");
  }
  const int n = g.n;
  if (q0 != 0.0) {
    thread_local std::vector<cplx> shifted;
    shifted.assign(n, cplx(0.0, 0.0));
    const double off = q0 / g.dq;
    for (int j = 0; j < n; ++j) {
      const double src = j - off;
      const double fl = std::floor(src);
      const int j0 = static_cast<int>(fl);
      const double w = src - fl;
      cplx val(0.0, 0.0);
      if (j0 >= 0 && j0 < n) val += (1.0 - w) * data[j0];
      if (j0 + 1 >= 0 && j0 + 1 < n) val += w * data[j0 + 1];
      shifted[j] = val;
    }
    std::copy(shifted.begin(), shifted.end(), data);
  }
  const cplx c0 = std::polar(1.0, -0.5 * q0 * p0);
  for (int j = 0; j < n; ++j) data[j] *= c0 * std::polar(1.0, p0 * g.q(j));
}

}  // namespace qrlsim
