#pragma once

// Test oracle: evolve the Cauchy problem by assembling the full torus
// Galerkin matrix of A_eps (eps = 1/M) over one combined mode box and
// diagonalizing it, with no Bloch block structure.  Independent of the
// residue-class path in the library.

#include "homog/estimates.hpp"

namespace homog::testing {

inline CauchyResult dense_torus_cauchy(const EstimatesContext& ctx, const TorusData& data,
                                       double tau, int M, double s, int cutoff) {
  const Lattice& lat = ctx.bundle.lattice;
  const int d = lat.dim();
  const int n = ctx.bundle.b.cols();
  const bool weighted = ctx.sandwiched_available();

  // Retained modes: the union over residue classes of the fiber boxes the
  // block path uses (xi = M(k_r + b), |b|_inf <= cutoff), so both paths work
  // on the same subspace.
  std::vector<FreqVec> modes;
  {
    std::vector<int> axis_vals;
    for (int r = 0; r < M; ++r) {
      double kc = static_cast<double>(r) / M;
      if (kc > 0.5) kc -= 1.0;
      for (int b = -cutoff; b <= cutoff; ++b)
        axis_vals.push_back(static_cast<int>(std::lround(M * (kc + b))));
    }
    std::sort(axis_vals.begin(), axis_vals.end());
    axis_vals.erase(std::unique(axis_vals.begin(), axis_vals.end()), axis_vals.end());
    std::vector<size_t> idx(d, 0);
    while (true) {
      FreqVec f(d);
      for (int c = 0; c < d; ++c) f[c] = axis_vals[idx[c]];
      modes.push_back(f);
      int axis = 0;
      while (axis < d && ++idx[axis] >= axis_vals.size()) idx[axis++] = 0;
      if (axis == d) break;
    }
  }
  auto index_of = [&](const FreqVec& f) -> int {
    for (size_t i = 0; i < modes.size(); ++i)
      if (modes[i] == f) return static_cast<int>(i);
    return -1;
  };

  // g(Mx) has Fourier support M * supp(g); same for f when weighted.
  auto scaled_coeff = [&](const CoefficientField& field, const FreqVec& delta) {
    FreqVec base(d);
    for (int c = 0; c < d; ++c) {
      if (delta[c] % M != 0) return MatrixXcd(MatrixXcd::Zero(field.rows(), field.cols()));
      base[c] = delta[c] / M;
    }
    return field.fourier_at(base);
  };

  const size_t count = modes.size();
  MatrixXcd A(n * count, n * count);
  for (size_t i = 0; i < count; ++i)
    for (size_t j = 0; j < count; ++j) {
      VectorXd xi_i(d), xi_j(d);
      for (int c = 0; c < d; ++c) {
        xi_i(c) = modes[i][c];
        xi_j(c) = modes[j][c];
      }
      A.block(n * i, n * j, n, n) = ctx.bundle.b.at(xi_i).adjoint() *
                                    scaled_coeff(ctx.bundle.g, subtract(modes[i], modes[j])) *
                                    ctx.bundle.b.at(xi_j);
    }
  A = hermitize(A);

  MatrixXcd F, Finv;
  if (weighted) {
    F.resize(n * count, n * count);
    Finv.resize(n * count, n * count);
    for (size_t i = 0; i < count; ++i)
      for (size_t j = 0; j < count; ++j) {
        F.block(n * i, n * j, n, n) =
            scaled_coeff(*ctx.f_field, subtract(modes[i], modes[j]));
        Finv.block(n * i, n * j, n, n) =
            scaled_coeff(*ctx.f_inv_field, subtract(modes[i], modes[j]));
      }
    A = hermitize(F.adjoint() * A * F);
  }

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(A);
  auto apply = [&](double t, const VectorXcd& u, bool sine) {
    VectorXcd c = es.eigenvectors().adjoint() * u;
    for (int i = 0; i < c.size(); ++i) {
      double w = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
      if (sine) {
        double x = t * w;
        c(i) *= (std::abs(x) < 1e-8) ? t * (1.0 - x * x / 6.0) : std::sin(x) / w;
      } else {
        c(i) *= std::cos(t * w);
      }
    }
    return (es.eigenvectors() * c).eval();
  };

  auto gather = [&](const std::map<FreqVec, VectorXcd>& src) {
    VectorXcd out = VectorXcd::Zero(n * count);
    for (const auto& [xi, v] : src) {
      int idx = index_of(xi);
      if (idx < 0) throw Error("dense oracle: datum outside the box");
      out.segment(n * idx, n) = v;
    }
    return out;
  };

  auto to_v = [&](const VectorXcd& z) { return weighted ? (Finv * z).eval() : z; };
  auto to_z = [&](const VectorXcd& v) { return weighted ? (F * v).eval() : v; };

  VectorXcd v_tau = apply(tau, to_v(gather(data.phi)), false) +
                    apply(tau, to_v(gather(data.psi)), true);
  for (const auto& piece : data.force) {
    double lo = std::max(0.0, piece.t0), hi = std::min(tau, piece.t1);
    if (hi <= lo) continue;
    VectorXcd fv = to_v(gather(piece.data));
    // plain composite Simpson, refined until stable
    int intervals = 64;
    VectorXcd prev = VectorXcd::Zero(fv.size());
    for (int round = 0; round < 10; ++round) {
      double h = (hi - lo) / intervals;
      VectorXcd acc = apply(tau - lo, fv, true) + apply(tau - hi, fv, true);
      for (int i = 1; i < intervals; ++i)
        acc += apply(tau - (lo + i * h), fv, true) * (i % 2 ? 4.0 : 2.0);
      acc *= h / 3.0;
      if (round > 0 && (acc - prev).norm() <= 1e-8 * std::max(acc.norm(), 1e-300)) {
        prev = acc;
        break;
      }
      prev = acc;
      intervals *= 2;
    }
    v_tau += prev;
  }
  VectorXcd z_eps = to_z(v_tau);

  // effective side per mode
  VectorXcd z0 = VectorXcd::Zero(n * count);
  for (size_t i = 0; i < count; ++i) {
    VectorXd xi(d);
    for (int c = 0; c < d; ++c) xi(c) = modes[i][c];
    MatrixXcd bxi = ctx.bundle.b.at(xi);
    MatrixXcd sym = hermitize(bxi.adjoint() * ctx.g0 * bxi);
    if (weighted) sym = hermitize(*ctx.f0 * sym * (*ctx.f0));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> ms(sym);
    auto mode_apply = [&](double t, const VectorXcd& u, bool sine) {
      VectorXcd c = ms.eigenvectors().adjoint() * u;
      for (int j = 0; j < n; ++j) {
        double w = std::sqrt(std::max(0.0, ms.eigenvalues()(j)));
        if (sine) {
          double x = t * w;
          c(j) *= (std::abs(x) < 1e-8) ? t * (1.0 - x * x / 6.0) : std::sin(x) / w;
        } else {
          c(j) *= std::cos(t * w);
        }
      }
      return (ms.eigenvectors() * c).eval();
    };
    MatrixXcd f0inv =
        weighted ? MatrixXcd(ctx.f0->inverse()) : MatrixXcd(MatrixXcd::Identity(n, n));
    VectorXcd phi_m = VectorXcd::Zero(n), psi_m = VectorXcd::Zero(n);
    if (auto it = data.phi.find(modes[i]); it != data.phi.end()) phi_m = it->second;
    if (auto it = data.psi.find(modes[i]); it != data.psi.end()) psi_m = it->second;
    VectorXcd v0 = mode_apply(tau, f0inv * phi_m, false) + mode_apply(tau, f0inv * psi_m, true);
    for (const auto& piece : data.force) {
      auto it = piece.data.find(modes[i]);
      if (it == piece.data.end()) continue;
      double lo = std::max(0.0, piece.t0), hi = std::min(tau, piece.t1);
      if (hi <= lo) continue;
      VectorXcd fv = f0inv * it->second;
      int intervals = 256;
      double h = (hi - lo) / intervals;
      VectorXcd acc = mode_apply(tau - lo, fv, true) + mode_apply(tau - hi, fv, true);
      for (int q = 1; q < intervals; ++q)
        acc += mode_apply(tau - (lo + q * h), fv, true) * (q % 2 ? 4.0 : 2.0);
      v0 += acc * (h / 3.0);
    }
    z0.segment(n * i, n) = weighted ? VectorXcd(*ctx.f0 * v0) : v0;
  }

  CauchyResult out;
  out.error_l2 = (z_eps - z0).norm();
  out.data_norm = data.h_s_norm_phi(s) + data.h_s_norm_psi(s) + data.l1_h_s_norm_force(s, tau);
  out.normalized = out.error_l2 / out.data_norm;
  return out;
}

}  // namespace homog::testing
