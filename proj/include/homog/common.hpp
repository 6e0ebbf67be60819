#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace homog {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Integer frequency vector (coordinates w.r.t. the dual basis).
using FreqVec = std::vector<int>;

// Fourier data of a matrix-valued periodic function, keyed by frequency.
using FourierMap = std::map<FreqVec, MatrixXcd>;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline MatrixXcd hermitize(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

inline double hermiticity_defect(const MatrixXcd& m) {
  double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

// Largest singular value.  Fibers stay in the dense-feasible range, so a
// direct SVD is fine.
double operator_norm(const MatrixXcd& m);

// Smallest/largest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const MatrixXcd& herm);
double max_eigenvalue(const MatrixXcd& herm);

// Hermitian positive square root / inverse square root.
MatrixXcd hermitian_sqrt(const MatrixXcd& herm);
MatrixXcd hermitian_inverse_sqrt(const MatrixXcd& herm);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Chunked parallel loop over [0, count).  Work items must be independent;
// with threads <= 1 this is a plain loop, and results filled into
// preallocated slots keep every run deterministic.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& body);

// Worker count used by sweep loops; set once by the CLI from --threads or
// HOMOG_THREADS, defaults to 1.
int sweep_threads();
void set_sweep_threads(int threads);

// Fixed 9-significant-digit formatting used for all emitted floats.
std::string format_double(double v);

inline FreqVec negate(const FreqVec& f) {
  FreqVec r(f.size());
  for (size_t i = 0; i < f.size(); ++i) r[i] = -f[i];
  return r;
}

inline FreqVec subtract(const FreqVec& a, const FreqVec& b) {
  FreqVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline bool is_zero(const FreqVec& f) {
  for (int c : f)
    if (c != 0) return false;
  return true;
}

}  // namespace homog
