#include "homog/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homog {

Lattice Lattice::from_basis(const MatrixXd& basis) {
  if (basis.rows() != basis.cols() || basis.rows() < 1)
    throw Error("lattice: basis must be a square d x d matrix, d >= 1");
  const int d = static_cast<int>(basis.rows());
  double det = basis.determinant();
  if (std::abs(det) < 1e-12 * std::pow(basis.norm() + 1.0, d))
    throw Error("lattice: degenerate basis (vectors are linearly dependent)");

  Lattice lat;
  lat.dim_ = d;
  lat.basis_ = basis;
  // <b_l, a_j> = 2*pi*delta_jl  =>  B = 2*pi * A^{-T} with rows as vectors.
  lat.dual_ = 2.0 * M_PI * basis.inverse().transpose();
  lat.cell_volume_ = std::abs(det);
  lat.dual_cell_volume_ = std::abs(lat.dual_.determinant());

  double min_norm = std::numeric_limits<double>::infinity();
  for (const VectorXd& b : lat.enumerate_dual(3)) min_norm = std::min(min_norm, b.norm());
  lat.r0_ = 0.5 * min_norm;
  return lat;
}

Lattice Lattice::cubic(int dim, double side) {
  return from_basis(MatrixXd::Identity(dim, dim) * side);
}

VectorXd Lattice::dual_vector(const FreqVec& f) const {
  VectorXd v = VectorXd::Zero(dim_);
  for (int i = 0; i < dim_; ++i) v += static_cast<double>(f[i]) * dual_.row(i).transpose();
  return v;
}

std::vector<VectorXd> Lattice::enumerate_dual(int range) const {
  std::vector<VectorXd> out;
  FreqVec f(dim_, -range);
  while (true) {
    if (!is_zero(f)) out.push_back(dual_vector(f));
    int axis = 0;
    while (axis < dim_ && ++f[axis] > range) f[axis++] = -range;
    if (axis == dim_) break;
  }
  return out;
}

bool Lattice::in_brillouin(const VectorXd& k, double tol) const {
  double kn = k.norm();
  for (const VectorXd& b : enumerate_dual(3))
    if (kn > (k - b).norm() + tol) return false;
  return true;
}

VectorXd Lattice::fold(const VectorXd& k) const {
  VectorXd best = k;
  double best_norm = k.norm();
  // One nearest-vector pass is enough for the coefficient ranges produced by
  // brillouin_grid; iterate to be safe for callers handing in distant points.
  for (int iter = 0; iter < 8; ++iter) {
    bool improved = false;
    for (const VectorXd& b : enumerate_dual(3)) {
      double n = (best - b).norm();
      if (n < best_norm - 1e-14) {
        best = best - b;
        best_norm = n;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return best;
}

KGrid brillouin_grid(const Lattice& lat, int resolution) {
  if (resolution < 1) throw Error("brillouin_grid: resolution must be >= 1");
  if (resolution % 2 == 0) ++resolution;  // keep k = 0 on the grid

  const int d = lat.dim();
  std::vector<double> coeffs;
  if (resolution == 1) {
    coeffs = {0.0, 0.5};  // still cover the zone boundary
  } else {
    for (int j = 0; j < resolution; ++j)
      coeffs.push_back(-0.5 + static_cast<double>(j) / (resolution - 1));
  }

  KGrid grid;
  std::vector<size_t> idx(d, 0);
  while (true) {
    VectorXd k = VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) k += coeffs[idx[i]] * lat.dual_basis().row(i).transpose();
    k = lat.fold(k);
    grid.points.push_back(k);
    if (k.norm() < 1e-14) grid.includes_zero = true;
    int axis = 0;
    while (axis < d && ++idx[axis] >= coeffs.size()) idx[axis++] = 0;
    if (axis == d) break;
  }
  return grid;
}

std::vector<VectorXd> radial_samples(const Lattice& lat, const VectorXd& theta,
                                     double t_max, int count) {
  if (std::abs(theta.norm() - 1.0) > 1e-12)
    throw Error("radial_samples: direction must be a unit vector");
  if (t_max <= 0 || count < 1) throw Error("radial_samples: need t_max > 0 and count >= 1");
  if (t_max > lat.r0() + 1e-12)
    throw Error("radial_samples: t_max exceeds the Brillouin radius r0");
  std::vector<VectorXd> out;
  out.reserve(count);
  for (int j = 1; j <= count; ++j) out.push_back((t_max * j / count) * theta);
  return out;
}

}  // namespace homog
