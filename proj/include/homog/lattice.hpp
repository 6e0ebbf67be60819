#pragma once

#include "homog/common.hpp"

namespace homog {

// Lattice geometry: generating basis, dual basis, cell volumes and the
// Brillouin radius r0 (half the shortest nonzero dual vector).
class Lattice {
 public:
  // basis rows are the generating vectors a_1..a_d.
  static Lattice from_basis(const MatrixXd& basis);

  // Standard cubic lattice with cell side 2*pi; its dual is the integer
  // lattice, which is what all the shipped examples use.
  static Lattice cubic(int dim, double side = 2.0 * M_PI);

  int dim() const { return dim_; }
  const MatrixXd& basis() const { return basis_; }
  const MatrixXd& dual_basis() const { return dual_; }
  double cell_volume() const { return cell_volume_; }
  double dual_cell_volume() const { return dual_cell_volume_; }
  double r0() const { return r0_; }

  // Real-space vector of an integer dual-lattice coordinate.
  VectorXd dual_vector(const FreqVec& f) const;

  // Nonzero dual vectors with integer coordinates in [-range, range]^d.
  std::vector<VectorXd> enumerate_dual(int range = 3) const;

  // Membership of k in the closed Brillouin zone: |k| <= |k - b| for all
  // enumerated nonzero dual vectors.
  bool in_brillouin(const VectorXd& k, double tol = 1e-12) const;

  // Translate k by a dual vector into the closed zone.
  VectorXd fold(const VectorXd& k) const;

 private:
  int dim_ = 0;
  MatrixXd basis_, dual_;
  double cell_volume_ = 0, dual_cell_volume_ = 0, r0_ = 0;
};

struct KGrid {
  std::vector<VectorXd> points;
  bool includes_zero = false;
};

// Uniform sampling of the closed Brillouin zone: a resolution^d coefficient
// grid on the dual cell, folded into clos(Omega~).  Even resolutions are
// bumped to the next odd value so the grid contains k = 0.
KGrid brillouin_grid(const Lattice& lat, int resolution);

// Radial samples k = t*theta with t = t_max*j/count, j = 1..count.
// t = 0 is excluded; the germ module owns that limit.
std::vector<VectorXd> radial_samples(const Lattice& lat, const VectorXd& theta,
                                     double t_max, int count);

}  // namespace homog
