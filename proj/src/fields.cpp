#include "homog/fields.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

namespace {

constexpr double kCoeffThreshold = 1e-13;

// Deterministic low-discrepancy directions on the unit sphere.
std::vector<VectorXd> sampled_directions(int dim, int count) {
  std::vector<VectorXd> dirs;
  dirs.reserve(count);
  const double golden = 0.6180339887498949;
  for (int i = 0; i < count; ++i) {
    VectorXd v(dim);
    if (dim == 1) {
      v(0) = (i % 2 == 0) ? 1.0 : -1.0;
    } else {
      double u = std::fmod(0.5 + golden * i, 1.0);
      if (dim == 2) {
        double phi = 2.0 * M_PI * u;
        v << std::cos(phi), std::sin(phi);
      } else {
        double w = std::fmod(0.5 + golden * golden * i, 1.0);
        double z = 2.0 * u - 1.0;
        double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = 2.0 * M_PI * w;
        v.resize(3);
        v << rho * std::cos(phi), rho * std::sin(phi), z;
      }
    }
    dirs.push_back(v);
  }
  return dirs;
}

}  // namespace

BlochSymbol::BlochSymbol(std::vector<MatrixXcd> coeffs, double alpha0, double alpha1)
    : coeffs_(std::move(coeffs)), alpha0_(alpha0), alpha1_(alpha1) {
  if (coeffs_.empty()) throw Error("symbol: needs at least one coefficient matrix");
  rows_ = static_cast<int>(coeffs_[0].rows());
  cols_ = static_cast<int>(coeffs_[0].cols());
  if (rows_ < cols_) throw Error("symbol: requires m >= n");
  for (const auto& c : coeffs_)
    if (c.rows() != rows_ || c.cols() != cols_)
      throw Error("symbol: inconsistent coefficient shapes");
}

MatrixXcd BlochSymbol::at(const VectorXd& xi) const {
  MatrixXcd out = MatrixXcd::Zero(rows_, cols_);
  for (int l = 0; l < dim(); ++l) out += xi(l) * coeffs_[l];
  return out;
}

double BlochSymbol::sampled_ellipticity(int samples) const {
  double lo = std::numeric_limits<double>::infinity();
  for (const VectorXd& theta : sampled_directions(dim(), samples)) {
    MatrixXcd bt = at(theta);
    lo = std::min(lo, min_eigenvalue(bt.adjoint() * bt));
  }
  return lo;
}

BlochSymbol symbol_gradient(int dim) {
  if (dim < 1) throw Error("symbol_gradient: dim must be >= 1");
  std::vector<MatrixXcd> coeffs(dim, MatrixXcd::Zero(dim, 1));
  for (int l = 0; l < dim; ++l) coeffs[l](l, 0) = 1.0;
  return BlochSymbol(std::move(coeffs), 1.0, 1.0);
}

BlochSymbol symbol_elasticity(int dim) {
  if (dim == 2) {
    // rows: (xi1, 0), (xi2/2, xi1/2), (0, xi2)
    std::vector<MatrixXcd> c(2, MatrixXcd::Zero(3, 2));
    c[0](0, 0) = 1.0;
    c[0](1, 1) = 0.5;
    c[1](1, 0) = 0.5;
    c[1](2, 1) = 1.0;
    return BlochSymbol(std::move(c), 0.25, 1.0);
  }
  if (dim == 3) {
    // row order: 11, 12, 22, 23, 33, 31
    std::vector<MatrixXcd> c(3, MatrixXcd::Zero(6, 3));
    c[0](0, 0) = 1.0;
    c[0](1, 1) = 0.5;
    c[0](5, 2) = 0.5;
    c[1](1, 0) = 0.5;
    c[1](2, 1) = 1.0;
    c[1](3, 2) = 0.5;
    c[2](3, 1) = 0.5;
    c[2](4, 2) = 1.0;
    c[2](5, 0) = 0.5;
    return BlochSymbol(std::move(c), 0.25, 1.0);
  }
  throw Error("symbol_elasticity: only d = 2, 3 supported");
}

BlochSymbol symbol_hill(int dim) {
  if (dim != 2 && dim != 3) throw Error("symbol_hill: only d = 2, 3 supported");
  const int m = 1 + dim * (dim - 1) / 2;
  std::vector<MatrixXcd> c(dim, MatrixXcd::Zero(m, dim));
  for (int l = 0; l < dim; ++l) c[l](0, l) = 1.0;  // first row is xi^T
  int row = 1;
  for (int j = 0; j < dim; ++j)
    for (int l = j + 1; l < dim; ++l) {
      c[l](row, j) = 1.0;   // xi_l in column j
      c[j](row, l) = -1.0;  // -xi_j in column l
      ++row;
    }
  // b(theta)* b(theta) = I on the unit sphere for this symbol.
  return BlochSymbol(std::move(c), 1.0, 1.0);
}

// ---------------------------------------------------------------------------
// CoefficientField

namespace {

// Midpoint fractional coordinates i -> (i + 1/2)/G keep piecewise-constant
// profiles single-valued at their jumps.
double midpoint_frac(int i, int grid) { return (i + 0.5) / grid; }

int signed_freq(int index, int grid) { return index <= grid / 2 ? index : index - grid; }

}  // namespace

CoefficientField CoefficientField::from_closure(int dim, int rows, int cols,
                                                const Sampler& sampler, int grid_size,
                                                FieldFlags flags) {
  if (grid_size < 4) throw Error("field: grid_size must be >= 4");
  if (grid_size % 2 == 0) ++grid_size;  // odd grids keep +-f pairs symmetric

  CoefficientField field;
  field.dim_ = dim;
  field.rows_ = rows;
  field.cols_ = cols;
  field.grid_size_ = grid_size;
  field.flags_ = flags;

  // Detect axes the sampler does not depend on, then sample only the
  // active-axes subgrid; inactive axes contribute frequency zero exactly.
  std::vector<bool> varies(dim, false);
  {
    VectorXd base = VectorXd::Constant(dim, 0.31);
    MatrixXcd ref = sampler(base);
    for (int a = 0; a < dim; ++a)
      for (double probe : {0.11, 0.57, 0.83}) {
        VectorXd x = base;
        x(a) = probe;
        if (!sampler(x).isApprox(ref, 0.0)) {
          varies[a] = true;
          break;
        }
      }
  }
  std::vector<int> active;
  for (int a = 0; a < dim; ++a)
    if (varies[a]) active.push_back(a);
  const int ad = static_cast<int>(active.size());
  const int G = grid_size;

  size_t total = 1;
  for (int a = 0; a < ad; ++a) total *= G;
  field.grid_.resize(std::max<size_t>(total, 1));
  std::vector<int> idx(ad, 0);
  for (size_t flat = 0; flat < field.grid_.size(); ++flat) {
    VectorXd frac = VectorXd::Constant(dim, 0.5 / G);
    for (int a = 0; a < ad; ++a) frac(active[a]) = midpoint_frac(idx[a], G);
    field.grid_[flat] = sampler(frac);
    if (field.grid_[flat].rows() != rows || field.grid_[flat].cols() != cols)
      throw Error("field: sampler returned wrong shape");
    int axis = 0;
    while (axis < ad && ++idx[axis] >= G) idx[axis++] = 0;
  }

  // Separable DFT over the active axes.
  std::vector<MatrixXcd> data = field.grid_;
  size_t stride = 1;
  for (int a = 0; a < ad; ++a) {
    std::vector<MatrixXcd> next(data.size(), MatrixXcd::Zero(rows, cols));
    size_t outer = data.size() / (stride * G);
    for (size_t o = 0; o < outer; ++o)
      for (size_t s = 0; s < stride; ++s) {
        for (int f = 0; f < G; ++f) {
          MatrixXcd acc = MatrixXcd::Zero(rows, cols);
          for (int i = 0; i < G; ++i) {
            double phase = -2.0 * M_PI * f * midpoint_frac(i, G);
            acc += data[o * stride * G + i * stride + s] * Complex(std::cos(phase), std::sin(phase));
          }
          next[o * stride * G + f * stride + s] = acc / static_cast<double>(G);
        }
      }
    data.swap(next);
    stride *= G;
  }

  double scale = 0.0;
  for (const auto& c : data) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  for (size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat].cwiseAbs().maxCoeff() <= kCoeffThreshold * scale) continue;
    FreqVec f(dim, 0);
    size_t rem = flat;
    int sign = 1;
    for (int a = 0; a < ad; ++a) {
      int index = static_cast<int>(rem % G);
      int s = signed_freq(index, G);
      // Half-sample offset: relabeling index -> index - G flips the sign of
      // the sampled exponential.
      if (s != index) sign = -sign;
      f[active[a]] = s;
      rem /= G;
    }
    field.fourier_[f] = static_cast<double>(sign) * data[flat];
  }

  field.mean_ = field.fourier_at(FreqVec(dim, 0));
  field.verify_flags();
  return field;
}

CoefficientField CoefficientField::from_fourier(int dim, int rows, int cols, FourierMap terms,
                                                int grid_size, FieldFlags flags) {
  for (const auto& [f, c] : terms) {
    if (static_cast<int>(f.size()) != dim) throw Error("field: frequency dimension mismatch");
    if (c.rows() != rows || c.cols() != cols) throw Error("field: coefficient shape mismatch");
  }
  auto sampler = [&terms, rows, cols, dim](const VectorXd& frac) {
    MatrixXcd out = MatrixXcd::Zero(rows, cols);
    for (const auto& [f, c] : terms) {
      double phase = 0;
      for (int a = 0; a < dim; ++a) phase += 2.0 * M_PI * f[a] * frac(a);
      out += c * Complex(std::cos(phase), std::sin(phase));
    }
    return out;
  };
  flags.band_limited = true;
  return from_closure(dim, rows, cols, sampler, grid_size, flags);
}

CoefficientField CoefficientField::from_fourier_exact(int dim, int rows, int cols,
                                                      FourierMap terms, int grid_size,
                                                      FieldFlags flags) {
  if (grid_size % 2 == 0) ++grid_size;
  CoefficientField field;
  field.dim_ = dim;
  field.rows_ = rows;
  field.cols_ = cols;
  field.grid_size_ = grid_size;
  field.flags_ = flags;
  field.fourier_ = std::move(terms);
  for (auto it = field.fourier_.begin(); it != field.fourier_.end();) {
    if (it->second.cwiseAbs().maxCoeff() < 1e-300)
      it = field.fourier_.erase(it);
    else
      ++it;
  }
  field.mean_ = field.fourier_at(FreqVec(dim, 0));

  auto act = field.active_axes();
  std::vector<int> active;
  for (int a = 0; a < dim; ++a)
    if (act[a]) active.push_back(a);
  size_t total = 1;
  for (size_t a = 0; a < active.size(); ++a) total *= grid_size;
  field.grid_.resize(std::max<size_t>(total, 1));
  std::vector<int> idx(active.size(), 0);
  for (size_t flat = 0; flat < field.grid_.size(); ++flat) {
    VectorXd frac = VectorXd::Constant(dim, 0.5 / grid_size);
    for (size_t a = 0; a < active.size(); ++a) frac(active[a]) = midpoint_frac(idx[a], grid_size);
    field.grid_[flat] = field.sample(frac);
    size_t axis = 0;
    while (axis < active.size() && ++idx[axis] >= static_cast<size_t>(grid_size))
      idx[axis++] = 0;
  }
  field.verify_flags();
  return field;
}

CoefficientField CoefficientField::identity(int dim, int n, int grid_size) {
  return constant(dim, MatrixXcd::Identity(n, n), grid_size);
}

CoefficientField CoefficientField::constant(int dim, const MatrixXcd& value, int grid_size) {
  FieldFlags flags;
  flags.hermitian = hermiticity_defect(value) < 1e-13;
  flags.positive = flags.hermitian && min_eigenvalue(value) > 0;
  flags.real_entries = value.imag().cwiseAbs().maxCoeff() < 1e-13;
  flags.band_limited = true;
  return from_closure(dim, static_cast<int>(value.rows()), static_cast<int>(value.cols()),
                      [&value](const VectorXd&) { return value; }, grid_size, flags);
}

bool CoefficientField::is_constant() const {
  return fourier_.size() <= 1 &&
         (fourier_.empty() || is_zero(fourier_.begin()->first));
}

MatrixXcd CoefficientField::fourier_at(const FreqVec& f) const {
  auto it = fourier_.find(f);
  if (it == fourier_.end()) return MatrixXcd::Zero(rows_, cols_);
  return it->second;
}

MatrixXcd CoefficientField::sample(const VectorXd& frac) const {
  MatrixXcd out = MatrixXcd::Zero(rows_, cols_);
  for (const auto& [f, c] : fourier_) {
    double phase = 0;
    for (int a = 0; a < dim_; ++a) phase += 2.0 * M_PI * f[a] * frac(a);
    out += c * Complex(std::cos(phase), std::sin(phase));
  }
  return out;
}

MatrixXcd CoefficientField::mean_of_inverse() const {
  if (rows_ != cols_) throw Error("field: mean_of_inverse needs a square field");
  MatrixXcd acc = MatrixXcd::Zero(rows_, cols_);
  for (const auto& s : grid_) acc += s.inverse();
  return acc / static_cast<double>(grid_.size());
}

CoefficientField CoefficientField::pointwise_inverse() const {
  if (rows_ != cols_) throw Error("field: pointwise_inverse needs a square field");
  FieldFlags flags;
  flags.hermitian = flags_.hermitian;
  flags.positive = flags_.positive;
  flags.real_entries = flags_.real_entries;
  flags.band_limited = is_constant();
  auto self = *this;
  int grid = flags.band_limited ? grid_size_ : std::max(grid_size_, 257);
  return from_closure(dim_, rows_, cols_,
                      [self](const VectorXd& frac) { return self.sample(frac).inverse().eval(); },
                      grid, flags);
}

double CoefficientField::sup_norm() const {
  double v = 0;
  for (const auto& s : grid_) v = std::max(v, operator_norm(s));
  return v;
}

double CoefficientField::inverse_sup_norm() const {
  double v = 0;
  for (const auto& s : grid_) v = std::max(v, operator_norm(s.inverse()));
  return v;
}

std::vector<bool> CoefficientField::active_axes() const {
  std::vector<bool> active(dim_, false);
  for (const auto& [f, c] : fourier_)
    for (int a = 0; a < dim_; ++a)
      if (f[a] != 0) active[a] = true;
  return active;
}

double CoefficientField::roundtrip_defect() const {
  auto act = active_axes();
  std::vector<int> active;
  for (int a = 0; a < dim_; ++a)
    if (act[a]) active.push_back(a);
  double scale = std::max(1e-30, sup_norm());
  double defect = 0;
  std::vector<int> idx(active.size(), 0);
  for (size_t flat = 0; flat < grid_.size(); ++flat) {
    VectorXd frac = VectorXd::Constant(dim_, 0.5 / grid_size_);
    for (size_t a = 0; a < active.size(); ++a) frac(active[a]) = midpoint_frac(idx[a], grid_size_);
    defect = std::max(defect, (sample(frac) - grid_[flat]).cwiseAbs().maxCoeff() / scale);
    size_t axis = 0;
    while (axis < active.size() && ++idx[axis] >= static_cast<size_t>(grid_size_))
      idx[axis++] = 0;
  }
  return defect;
}

int CoefficientField::max_stored_frequency() const {
  int mx = 0;
  for (const auto& [f, c] : fourier_)
    for (int v : f) mx = std::max(mx, std::abs(v));
  return mx;
}

bool CoefficientField::resolves_cutoff(int cutoff) const {
  if (flags_.band_limited) return true;
  int nyquist = (grid_size_ - 1) / 2;
  if (nyquist >= 2 * cutoff) return true;
  // Natural decay: the dictionary stopped before the resolution limit, so
  // every missing coefficient is below the storage threshold anyway.
  return max_stored_frequency() <= nyquist - 2;
}

void CoefficientField::verify_flags() const {
  for (const auto& s : grid_) {
    if (flags_.hermitian && hermiticity_defect(s) > 1e-12)
      throw Error("field: declared hermitian but a grid sample is not");
    if (flags_.positive && min_eigenvalue(hermitize(s)) <= 0)
      throw Error("field: declared positive but a grid sample is not");
    if (flags_.real_entries && s.imag().cwiseAbs().maxCoeff() > 1e-12)
      throw Error("field: declared real but a grid sample is not");
  }
}

// ---------------------------------------------------------------------------
// Example gallery

const ReferenceValue& ExampleCase::reference(const std::string& ref_name) const {
  for (const auto& r : references)
    if (r.name == ref_name) return r;
  throw Error("example '" + name + "': no reference named '" + ref_name + "'");
}

ExampleCase example_acoustics_complex(double c) {
  if (!(c > 0 && c < 1.0 / 3.0)) throw Error("acoustics example: need 0 < c < 1/3");
  ExampleCase ex;
  ex.name = "acoustics-complex-" + format_double(c);
  ex.dim = 2;
  ex.b = symbol_gradient(2);
  FieldFlags flags;
  flags.hermitian = true;
  flags.positive = true;
  flags.band_limited = true;
  ex.g = CoefficientField::from_closure(
      2, 2, 2,
      [c](const VectorXd& frac) {
        double x1 = 2.0 * M_PI * frac(0);
        double beta_prime = c * (std::cos(x1) - 2.0 * std::sin(2.0 * x1));
        MatrixXcd g(2, 2);
        g << 1.0, Complex(0, beta_prime), Complex(0, -beta_prime), 1.0;
        return g;
      },
      64, flags);
  double alpha = -1.5 * M_PI * c * c * c;
  ex.references = {
      {"alpha", alpha, 1e-12 * std::abs(alpha), "analytic"},
      {"n_hat_e2", 1.5 * c * c * c, 1e-8, "analytic"},
      {"g0_22", 1.0 - 2.5 * c * c, 1e-10, "regression"},
  };
  return ex;
}

ExampleCase example_elasticity_87() {
  ExampleCase ex;
  ex.name = "elasticity-87";
  ex.dim = 2;
  ex.b = symbol_elasticity(2);
  FieldFlags flags;
  flags.hermitian = true;
  flags.positive = true;
  flags.real_entries = true;
  ex.g = CoefficientField::from_closure(
      2, 3, 3,
      [](const VectorXd& frac) {
        double x1 = 2.0 * M_PI * frac(0);
        MatrixXcd g = MatrixXcd::Zero(3, 3);
        g(0, 0) = 1.0;
        g(1, 1) = 4.0 / (1.0 + 0.5 * std::sin(x1));
        g(2, 2) = 1.0 + 0.5 * std::cos(x1);
        return g;
      },
      128, flags);
  ex.references = {
      {"g2_underline", 4.0, 1e-10, "analytic"},
      {"g3_mean", 1.0, 1e-10, "analytic"},
      // |mean(Lambda22 * g3)| from the 1-d cell ODE; the quadrature oracle in
      // the tests reproduces 1/4 to machine precision.
      {"corr_mean_abs", 0.25, 1e-9, "regression"},
      {"mu_degenerate", 0.125, 1e-9, "regression"},
  };
  return ex;
}

namespace isotropic_detail {

double quarter_mean_inv(double p, double c) {
  // mean over one period of 1/(p + c cos^2 x) = 1/sqrt(p(p+c))
  return 1.0 / std::sqrt(p * (p + c));
}

// Left-hand side of the degeneracy equation B(a) = -C/4 expressed through
// q, r; b and c are the fixed contrast parameters.
double root_equation_lhs(double a, double b, double c) {
  double q = std::sqrt((a - b + c + 1.0) * (a - b + 1.0));
  double r = std::sqrt((a + b + c + 1.0) * (a + b + 1.0));
  return (6.0 * (a + b) * q + 2.0 * (a - b) * r - 4.0 * q * r) / (r + 3.0 * q);
}

double solve_root(double b, double c) {
  double lo = 120.0, hi = 170.0;
  double target = -std::sqrt(c + 1.0);  // -C/4 with C = 4 sqrt(c+1)
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (root_equation_lhs(mid, b, c) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace isotropic_detail

ExampleCase example_isotropic_elasticity() {
  const double b_par = 100.0, c_par = 624.0;
  const double a = isotropic_detail::solve_root(b_par, c_par);

  ExampleCase ex;
  ex.name = "isotropic-elasticity";
  ex.dim = 2;
  ex.b = symbol_elasticity(2);
  FieldFlags flags;
  flags.hermitian = true;
  flags.positive = true;
  flags.real_entries = true;
  ex.g = CoefficientField::from_closure(
      2, 3, 3,
      [a, b_par, c_par](const VectorXd& frac) {
        double x1 = 2.0 * M_PI * frac(0);
        double K = a + (x1 < 0.5 * M_PI ? -b_par : b_par);
        double mu = 1.0 + c_par * std::cos(x1) * std::cos(x1);
        MatrixXcd g = MatrixXcd::Zero(3, 3);
        g(0, 0) = K + mu;
        g(0, 2) = K - mu;
        g(1, 1) = 4.0 * mu;
        g(2, 0) = K - mu;
        g(2, 2) = K + mu;
        return g;
      },
      256, flags);
  ex.references = {
      {"a", 145.6581, 5e-4, "literature"},
      {"C", 100.0, 1e-9, "analytic"},
      {"theta1_sq", 0.5394, 5e-4, "literature"},
      {"S_abs", 65.6650, 5e-3, "literature"},
      {"T_abs", 76.2833, 5e-3, "literature"},
      {"mu_hat", 0.09850, 5e-4, "literature"},
  };
  return ex;
}

double isotropic_elasticity_root() { return isotropic_detail::solve_root(100.0, 624.0); }

double isotropic_elasticity_root_residual() {
  double a = isotropic_elasticity_root();
  return isotropic_detail::root_equation_lhs(a, 100.0, 624.0) + std::sqrt(624.0 + 1.0);
}

ExampleCase example_hill_body(const std::function<double(double)>& beta, double mu0, int dim) {
  if (mu0 <= 0) throw Error("hill example: mu0 must be positive");
  ExampleCase ex;
  ex.name = "hill-body";
  ex.dim = dim;
  ex.b = symbol_hill(dim);
  const int m = 1 + dim * (dim - 1) / 2;
  FieldFlags flags;
  flags.hermitian = true;
  flags.positive = true;
  flags.real_entries = true;
  ex.g = CoefficientField::from_closure(
      dim, m, m,
      [beta, mu0, m](const VectorXd& frac) {
        double x1 = 2.0 * M_PI * frac(0);
        double bval = beta(x1);
        if (bval <= 0) throw Error("hill example: beta must be positive");
        MatrixXcd g = MatrixXcd::Zero(m, m);
        g(0, 0) = bval;
        for (int j = 1; j < m; ++j) g(j, j) = 0.5 * mu0;
        return g;
      },
      128, flags);
  ex.references = {
      // underline(2 + sin) = sqrt(3); frozen from the 1-d quadrature oracle.
      {"beta_underline", std::sqrt(3.0), 1e-9, "regression"},
      {"mu0_half", 0.5 * mu0, 1e-12, "analytic"},
  };
  return ex;
}

ExampleCase example_layered_real(int dim) {
  ExampleCase ex;
  ex.name = dim == 1 ? "layered-real-1d" : "layered-real-2d";
  ex.dim = dim;
  ex.b = symbol_gradient(dim);
  FieldFlags flags;
  flags.hermitian = true;
  flags.positive = true;
  flags.real_entries = true;
  flags.band_limited = true;
  ex.g = CoefficientField::from_closure(
      dim, dim, dim,
      [dim](const VectorXd& frac) {
        double x1 = 2.0 * M_PI * frac(0);
        MatrixXcd g = MatrixXcd::Zero(dim, dim);
        g(0, 0) = 2.0 + std::sin(x1);
        for (int j = 1; j < dim; ++j) g(j, j) = 1.5 + 0.5 * std::cos(x1);
        return g;
      },
      64, flags);
  if (dim == 1)
    ex.references = {{"g0", std::sqrt(3.0), 1e-9, "regression"}};
  return ex;
}

const std::vector<std::string>& example_registry_names() {
  static const std::vector<std::string> names = {
      "acoustics-complex-0.1", "acoustics-complex-0.2", "elasticity-87",
      "isotropic-elasticity",  "hill-body",             "layered-real-1d",
  };
  return names;
}

ExampleCase make_example(const std::string& name) {
  if (name == "acoustics-complex-0.1") return example_acoustics_complex(0.1);
  if (name == "acoustics-complex-0.2") return example_acoustics_complex(0.2);
  if (name == "elasticity-87") return example_elasticity_87();
  if (name == "isotropic-elasticity") return example_isotropic_elasticity();
  if (name == "hill-body")
    return example_hill_body([](double x1) { return 2.0 + std::sin(x1); }, 1.0, 2);
  if (name == "layered-real-1d") return example_layered_real(1);
  throw Error("unknown example '" + name + "'");
}

}  // namespace homog
