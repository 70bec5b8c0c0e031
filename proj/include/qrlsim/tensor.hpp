// Minimal dense rank-3/rank-4 tensors used by the FMPS chain.
//
// Layout is row-major over (left bond, physical..., right bond); physical
// axes are exposed as AxisSpan batches for the spectral kernels, and bond
// reshapes as Eigen maps for contractions and SVD splits.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "qrlsim/grid.hpp"

namespace qrlsim {

using MatrixC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using RowMatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorC = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using VectorR = Eigen::VectorXd;

struct Tensor3 {
  int bl = 1, nx = 1, br = 1;
  std::vector<cplx> v;  // index ((b*nx + x)*br + c)

  Tensor3() = default;
  Tensor3(int bl_, int nx_, int br_) : bl(bl_), nx(nx_), br(br_) {
    v.assign(static_cast<size_t>(bl) * nx * br, cplx(0.0, 0.0));
  }

  cplx& at(int b, int x, int c) { return v[(static_cast<size_t>(b) * nx + x) * br + c]; }
  const cplx& at(int b, int x, int c) const {
    return v[(static_cast<size_t>(b) * nx + x) * br + c];
  }

  AxisSpan physical_span() { return AxisSpan{v.data(), bl, br}; }

  // (bl*nx) x br view
  Eigen::Map<RowMatC> as_left_matrix() {
    return Eigen::Map<RowMatC>(v.data(), static_cast<Eigen::Index>(bl) * nx, br);
  }
  Eigen::Map<const RowMatC> as_left_matrix() const {
    return Eigen::Map<const RowMatC>(v.data(), static_cast<Eigen::Index>(bl) * nx, br);
  }
  // bl x (nx*br) view
  Eigen::Map<RowMatC> as_right_matrix() {
    return Eigen::Map<RowMatC>(v.data(), bl, static_cast<Eigen::Index>(nx) * br);
  }
  Eigen::Map<const RowMatC> as_right_matrix() const {
    return Eigen::Map<const RowMatC>(v.data(), bl, static_cast<Eigen::Index>(nx) * br);
  }

  // bl x br slice at fixed physical index
  MatrixC slice(int x) const {
    MatrixC m(bl, br);
    for (int b = 0; b < bl; ++b)
      for (int c = 0; c < br; ++c) m(b, c) = at(b, x, c);
    return m;
  }
};

struct Tensor4 {
  int bl = 1, nx = 1, ny = 1, br = 1;
  std::vector<cplx> v;  // index (((b*nx + x)*ny + y)*br + c)

  Tensor4() = default;
  Tensor4(int bl_, int nx_, int ny_, int br_) : bl(bl_), nx(nx_), ny(ny_), br(br_) {
    v.assign(static_cast<size_t>(bl) * nx * ny * br, cplx(0.0, 0.0));
  }

  cplx& at(int b, int x, int y, int c) {
    return v[((static_cast<size_t>(b) * nx + x) * ny + y) * br + c];
  }
  const cplx& at(int b, int x, int y, int c) const {
    return v[((static_cast<size_t>(b) * nx + x) * ny + y) * br + c];
  }

  AxisSpan x_span() {
    return AxisSpan{v.data(), bl, static_cast<std::int64_t>(ny) * br};
  }
  AxisSpan y_span() {
    return AxisSpan{v.data(), static_cast<std::int64_t>(bl) * nx, br};
  }

  // (bl*nx) x (ny*br) view, the split matrix for restoring MPS form
  Eigen::Map<RowMatC> as_split_matrix() {
    return Eigen::Map<RowMatC>(v.data(), static_cast<Eigen::Index>(bl) * nx,
                               static_cast<Eigen::Index>(ny) * br);
  }

  // Fix the x index, yielding the (bl, ny, br) tensor.
  Tensor3 collapse_x(int x) const {
    Tensor3 t(bl, ny, br);
    for (int b = 0; b < bl; ++b)
      for (int y = 0; y < ny; ++y)
        for (int c = 0; c < br; ++c) t.at(b, y, c) = at(b, x, y, c);
    return t;
  }
};

// Contract the shared bond of two chain tensors into a rank-4 tensor.
inline Tensor4 contract_pair(const Tensor3& a, const Tensor3& b) {
  if (a.br != b.bl) throw std::invalid_argument("contract_pair: bond mismatch");
  Tensor4 t(a.bl, a.nx, b.nx, b.br);
  Eigen::Map<RowMatC> out(t.v.data(), static_cast<Eigen::Index>(a.bl) * a.nx,
                          static_cast<Eigen::Index>(b.nx) * b.br);
  out.noalias() = a.as_left_matrix() * b.as_right_matrix();
  return t;
}

}  // namespace qrlsim
