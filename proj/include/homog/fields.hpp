#pragma once

#include "homog/common.hpp"

#include <functional>
#include <optional>

namespace homog {

// Symbol b(xi) = sum_l b_l xi_l of the first-order operator b(D).
class BlochSymbol {
 public:
  BlochSymbol() = default;
  BlochSymbol(std::vector<MatrixXcd> coeffs, double alpha0, double alpha1);

  int dim() const { return static_cast<int>(coeffs_.size()); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double alpha0() const { return alpha0_; }
  double alpha1() const { return alpha1_; }
  const MatrixXcd& coeff(int axis) const { return coeffs_[axis]; }

  MatrixXcd at(const VectorXd& xi) const;

  // Smallest eigenvalue of b(theta)* b(theta) over sampled unit directions.
  double sampled_ellipticity(int samples = 100) const;

 private:
  std::vector<MatrixXcd> coeffs_;
  int rows_ = 0, cols_ = 0;
  double alpha0_ = 0, alpha1_ = 0;
};

BlochSymbol symbol_gradient(int dim);
BlochSymbol symbol_elasticity(int dim);  // d in {2,3}, m = d(d+1)/2
BlochSymbol symbol_hill(int dim);        // d in {2,3}, m = 1 + d(d-1)/2

struct FieldFlags {
  bool hermitian = false;
  bool positive = false;
  bool real_entries = false;
  bool band_limited = false;  // Fourier support resolved exactly by the grid
};

// A Gamma-periodic matrix-valued coefficient, stored as grid samples over the
// cell together with cached Fourier coefficients in dual-basis coordinates.
class CoefficientField {
 public:
  using Sampler = std::function<MatrixXcd(const VectorXd& frac)>;  // frac in [0,1)^d

  CoefficientField() = default;

  // Sample a closure on a uniform grid and cache the discrete transform.
  // Declared flags are verified against every grid sample.
  static CoefficientField from_closure(int dim, int rows, int cols, const Sampler& sampler,
                                       int grid_size, FieldFlags flags);

  // Build directly from a finite Fourier dictionary (trig polynomial).
  static CoefficientField from_fourier(int dim, int rows, int cols, FourierMap terms,
                                       int grid_size, FieldFlags flags);

  // Adopt a Fourier dictionary verbatim (no re-transform); grid samples are
  // filled by evaluating the series.  Used for derived fields such as the
  // flux g~ whose coefficients are already exact.
  static CoefficientField from_fourier_exact(int dim, int rows, int cols, FourierMap terms,
                                             int grid_size, FieldFlags flags);

  static CoefficientField identity(int dim, int n, int grid_size = 8);
  static CoefficientField constant(int dim, const MatrixXcd& value, int grid_size = 8);

  int dim() const { return dim_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int grid_size() const { return grid_size_; }
  const FourierMap& fourier() const { return fourier_; }
  const FieldFlags& flags() const { return flags_; }

  bool is_constant() const;

  MatrixXcd fourier_at(const FreqVec& f) const;  // zero matrix if absent
  const MatrixXcd& mean() const { return mean_; }

  // Evaluate the cached Fourier series at fractional coordinates.
  MatrixXcd sample(const VectorXd& frac) const;
  const MatrixXcd& grid_sample(size_t flat_index) const { return grid_[flat_index]; }
  size_t grid_count() const { return grid_.size(); }

  // Mean of the pointwise inverse over the sample grid (Reuss-side quantity).
  MatrixXcd mean_of_inverse() const;

  // Pointwise inverse resampled onto the same grid.
  CoefficientField pointwise_inverse() const;

  // L_inf norms of the field and its pointwise inverse (max spectral norm
  // over grid samples).
  double sup_norm() const;
  double inverse_sup_norm() const;

  // Axes on which the Fourier support actually varies.  Fibers and cell
  // problems decouple exactly over the remaining axes.
  std::vector<bool> active_axes() const;

  // Max relative defect of the Fourier round trip on the sample grid.
  double roundtrip_defect() const;

  // Largest stored frequency magnitude along any axis.
  int max_stored_frequency() const;

  // Whether the cached coefficients are trustworthy for a Galerkin matrix at
  // this cutoff (entries need frequencies up to 2 * cutoff).  True when the
  // field is band-limited, when the grid resolves 2 * cutoff outright, or
  // when the dictionary already decayed below threshold well inside the
  // resolved range.
  bool resolves_cutoff(int cutoff) const;

 private:
  void verify_flags() const;
  void rebuild_fourier_from_grid();

  int dim_ = 0, rows_ = 0, cols_ = 0, grid_size_ = 0;
  FourierMap fourier_;
  std::vector<MatrixXcd> grid_;
  MatrixXcd mean_;
  FieldFlags flags_;
};

// One reference quantity of a named example.
struct ReferenceValue {
  std::string name;
  double value = 0;
  double tolerance = 0;
  // "analytic" for exactly forced values, "literature" for published
  // approximate constants, "regression" for values frozen from an
  // independent oracle run.
  std::string provenance;
};

struct ExampleCase {
  std::string name;
  int dim = 0;
  BlochSymbol b;
  CoefficientField g;
  std::optional<CoefficientField> f;  // sandwich factor
  std::optional<CoefficientField> Q;  // weight (ff*)^{-1}
  // Generating basis rows; empty means the cubic 2 pi lattice.
  MatrixXd lattice_basis;
  std::vector<ReferenceValue> references;

  const ReferenceValue& reference(const std::string& name) const;
};

// d = 2 scalar operator with Hermitian g having off-diagonal +-i*beta'(x1),
// beta = c(sin x1 + cos 2x1), 0 < c < 1/3.
ExampleCase example_acoustics_complex(double c);

// The matrix example with b of size 3x2, g = diag(1, g2(x1), g3(x1)),
// g2 = 4/(1 + sin(x1)/2), g3 = 1 + cos(x1)/2.
ExampleCase example_elasticity_87();

// 2-d isotropic elasticity with piecewise-constant K(x1) tuned so that the
// germ has a degenerate direction, and smooth mu(x1) = 1 + 624 cos^2(x1).
ExampleCase example_isotropic_elasticity();

// Constant-shear-modulus elastic medium in the reduced factorization with
// g = diag(beta(x), mu0/2, ...).
ExampleCase example_hill_body(const std::function<double(double)>& beta, double mu0,
                              int dim = 2);

// Real scalar layered medium for the enhanced-rate experiments.
ExampleCase example_layered_real(int dim = 1);

const std::vector<std::string>& example_registry_names();
ExampleCase make_example(const std::string& name);

// Tuned bulk modulus of the isotropic example: the root a of the germ
// degeneracy equation at contrast parameters b = 100, c = 624.
double isotropic_elasticity_root();
// Residual of that equation at the returned root.
double isotropic_elasticity_root_residual();

}  // namespace homog
