#include "homog/common.hpp"

#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace homog {

double operator_norm(const MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::BDCSVD<MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const MatrixXcd& herm) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const MatrixXcd& herm) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

MatrixXcd hermitian_sqrt(const MatrixXcd& herm) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm);
  if (es.eigenvalues().minCoeff() < 0)
    throw Error("hermitian_sqrt: matrix is not positive semidefinite");
  VectorXd roots = es.eigenvalues().cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd hermitian_inverse_sqrt(const MatrixXcd& herm) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm);
  if (es.eigenvalues().minCoeff() <= 0)
    throw Error("hermitian_inverse_sqrt: matrix is not positive definite");
  VectorXd roots = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error("loglog_slope: need at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0) throw Error("loglog_slope: nonpositive sample");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {
int g_sweep_threads = 1;
}

int sweep_threads() { return g_sweep_threads; }
void set_sweep_threads(int threads) { g_sweep_threads = std::max(1, threads); }

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& body) {
  threads = std::min<size_t>(std::max(1, threads), count);
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace homog
