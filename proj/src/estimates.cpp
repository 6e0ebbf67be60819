#include "homog/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

EstimatesContext make_context(const FiberBundle& bundle, int cell_cutoff) {
  EstimatesContext ctx;
  ctx.bundle = bundle;
  ctx.cell_cutoff = cell_cutoff;
  CellSolution cell = solve_cell(bundle.g, bundle.b, bundle.lattice, cell_cutoff);
  ctx.g0 = cell.g0;
  if (bundle.f || bundle.Q) {
    WeightedConstants wc = weighted_constants(cell, bundle.f, bundle.Q);
    ctx.f0 = wc.f0;
    if (bundle.f) {
      ctx.f_field = bundle.f;
    } else {
      // f = Q^{-1/2} pointwise realizes Q = (f f*)^{-1}.
      const CoefficientField& q = *bundle.Q;
      ctx.f_field = CoefficientField::from_closure(
          q.dim(), q.rows(), q.cols(),
          [q](const VectorXd& frac) { return hermitian_inverse_sqrt(hermitize(q.sample(frac))); },
          std::max(q.grid_size(), 257), FieldFlags{true, true, false, false});
      ctx.bundle.f = ctx.f_field;
    }
    ctx.f_inv_field = ctx.f_field->pointwise_inverse();
  }
  return ctx;
}

ErrorSample fiber_error(const EstimatesContext& ctx, const VectorXd& k, double eps, double tau,
                        double s, int cutoff, bool sandwiched) {
  if (eps <= 0) throw Error("fiber_error: eps must be positive");
  if (sandwiched && !ctx.sandwiched_available())
    throw Error("fiber_error: no sandwich data in this context");

  const FiberKind kind = sandwiched ? FiberKind::Sandwiched : FiberKind::Plain;

  ErrorSample sample;
  sample.k = k;
  sample.eps = eps;
  sample.tau = tau;
  sample.s = s;
  sample.cutoff = cutoff;
  sample.sandwiched = sandwiched;
  if (tau == 0.0) return sample;  // both cosines are the identity

  FiberOperator A = assemble(ctx.bundle, k, cutoff, kind);
  const double scaled_tau = std::abs(tau) / eps;
  const int n = ctx.bundle.b.cols();
  const double psd_clamp = 1e-8 * std::max(A.matrix_norm_estimate(), 1e-300);

  // Both cosines are contractions, so a block's contribution is bounded by
  // kappa times its largest smoothing weight.  Blocks are visited in
  // descending bound order and skipped once they cannot raise the max; the
  // result is exact, only provably irrelevant work is dropped.
  double kappa = 2.0;
  if (sandwiched)
    kappa = ctx.f_field->sup_norm() * ctx.f_inv_field->sup_norm() +
            operator_norm(*ctx.f0) * operator_norm(ctx.f0->inverse());
  std::vector<std::pair<double, size_t>> bounds(A.blocks.size());
  std::vector<VectorXd> weights(A.blocks.size());
  for (size_t bi = 0; bi < A.blocks.size(); ++bi) {
    weights[bi] = smoothing_weights(A.blocks[bi], n, eps, s);
    bounds[bi] = {kappa * weights[bi].maxCoeff(), bi};
  }
  std::sort(bounds.begin(), bounds.end(), std::greater<>());

  double value = 0;
  for (auto [bound, bi] : bounds) {
    if (bound <= value) break;
    const FiberBlock& blk = A.blocks[bi];
    Eigen::SelfAdjointEigenSolver<MatrixXcd> esA(blk.matrix);
    if (esA.eigenvalues().minCoeff() < -psd_clamp)
      throw Error("fiber_error: negative eigenvalue beyond the PSD clamp");
    VectorXd cvals = esA.eigenvalues().cwiseMax(0.0);
    for (int i = 0; i < cvals.size(); ++i) cvals(i) = std::cos(scaled_tau * std::sqrt(cvals(i)));
    MatrixXcd cosA = esA.eigenvectors() * cvals.asDiagonal() * esA.eigenvectors().adjoint();

    MatrixXcd eff(blk.matrix.rows(), blk.matrix.cols());
    eff.setZero();
    for (size_t i = 0; i < blk.modes.size(); ++i) {
      MatrixXcd bs = ctx.bundle.b.at(blk.positions[i]);
      MatrixXcd cell = hermitize(bs.adjoint() * ctx.g0 * bs);
      if (sandwiched) cell = hermitize(ctx.f0->adjoint() * cell * (*ctx.f0));
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es0(cell);
      VectorXd c0 = es0.eigenvalues().cwiseMax(0.0);
      for (int j = 0; j < n; ++j) c0(j) = std::cos(scaled_tau * std::sqrt(c0(j)));
      eff.block(n * i, n * i, n, n) =
          es0.eigenvectors() * c0.asDiagonal() * es0.eigenvectors().adjoint();
    }

    MatrixXcd diff;
    if (sandwiched) {
      MatrixXcd F = convolution_matrix(*ctx.f_field, blk);
      MatrixXcd Finv = convolution_matrix(*ctx.f_inv_field, blk);
      const size_t count = blk.modes.size();
      MatrixXcd F0 = MatrixXcd::Zero(n * count, n * count);
      MatrixXcd F0inv = F0;
      MatrixXcd f0inv = ctx.f0->inverse();
      for (size_t i = 0; i < count; ++i) {
        F0.block(n * i, n * i, n, n) = *ctx.f0;
        F0inv.block(n * i, n * i, n, n) = f0inv;
      }
      diff = F * cosA * Finv - F0 * eff * F0inv;
    } else {
      diff = cosA - eff;
    }
    value = std::max(value, operator_norm(diff * weights[bi].asDiagonal()));
  }

  sample.fiber_error = value;
  return sample;
}

void validate_phase_resolution(const EstimatesContext& ctx, const VectorXd& k, double eps,
                               double tau, double s, int cutoff, bool sandwiched) {
  double e1 = fiber_error(ctx, k, eps, tau, s, cutoff, sandwiched).fiber_error;
  double e2 = fiber_error(ctx, k, eps, tau, s, 2 * cutoff, sandwiched).fiber_error;
  double tol = std::max(0.02 * std::max(e1, e2), 1e-6);
  if (std::abs(e1 - e2) > tol)
    throw Error("phase resolution violated at cutoff " + std::to_string(cutoff) +
                " (doubling moved the error from " + format_double(e1) + " to " +
                format_double(e2) + "); use cutoff >= " + std::to_string(2 * cutoff));
}

GlobalError global_error(const EstimatesContext& ctx, const KGrid& grid, double eps, double tau,
                         double s, int cutoff, bool sandwiched,
                         const std::vector<VectorXd>& refine_dirs) {
  if (grid.points.empty()) throw Error("global_error: empty k grid");
  GlobalError out;
  out.argmax_k = grid.points.front();
  // Grid fibers are independent; aggregate sequentially for a deterministic
  // argmax regardless of the worker count.
  std::vector<double> grid_errors(grid.points.size());
  parallel_for(grid.points.size(), sweep_threads(), [&](size_t i) {
    grid_errors[i] = fiber_error(ctx, grid.points[i], eps, tau, s, cutoff, sandwiched).fiber_error;
  });
  for (size_t i = 0; i < grid.points.size(); ++i) {
    if (grid_errors[i] > out.value) {
      out.value = grid_errors[i];
      out.argmax_k = grid.points[i];
    }
  }
  // Radial refinement along the argmax direction and any requested ones; the
  // sharp behavior concentrates on shrinking t-windows near k ~ sqrt(eps)
  // rays, so the ladder is geometric down to the eps scale.
  std::vector<VectorXd> dirs = refine_dirs;
  if (out.argmax_k.norm() > 1e-12) dirs.push_back(out.argmax_k.normalized());
  const double r0 = ctx.bundle.lattice.r0();
  double anorm = 1.0;
  {
    FiberOperator probe = assemble(ctx.bundle, VectorXd::Zero(ctx.bundle.lattice.dim()),
                                   cutoff, FiberKind::Plain);
    anorm = probe.matrix_norm_estimate();
  }
  const double c_star = ctx.bundle.c_star();
  // Eigenvalue roundoff |dlambda| ~ macheps ||A|| dephases the lowest band by
  // eps^{-1}|tau| dlambda / (2 sqrt(c_*) t); once that times the smoothing
  // weight rivals the running max, deeper t samples are noise.
  auto noise_level = [&](double t) {
    double dephase = (std::abs(tau) / eps) * 2.2e-16 * anorm / (2.0 * std::sqrt(c_star) * t);
    double weight = std::pow(std::min(1.0, eps * eps / (t * t + eps * eps)), 0.5 * s);
    return dephase * weight;
  };
  for (const VectorXd& dir : dirs) {
    VectorXd theta = dir.normalized();
    for (double t = r0; t > std::max(0.25 * eps, 1e-12); t *= std::pow(0.5, 0.25)) {
      if (noise_level(t) > 0.25 * std::max(out.value, 1e-300)) break;
      VectorXd k = t * theta;
      if (!ctx.bundle.lattice.in_brillouin(k, 1e-9)) continue;
      double e = fiber_error(ctx, k, eps, tau, s, cutoff, sandwiched).fiber_error;
      if (e > out.value) {
        out.value = e;
        out.argmax_k = k;
      }
    }
  }
  return out;
}

RateReport rate_experiment(const EstimatesContext& ctx, double s, double tau,
                           const std::vector<double>& eps_list, const KGrid& grid, int cutoff,
                           bool sandwiched, const std::vector<VectorXd>& refine_dirs) {
  if (eps_list.size() < 4) throw Error("rate_experiment: need at least 4 eps values");
  double lo = *std::min_element(eps_list.begin(), eps_list.end());
  double hi = *std::max_element(eps_list.begin(), eps_list.end());
  if (hi / lo < 4.0) throw Error("rate_experiment: eps range must span at least two octaves");

  RateReport report;
  report.s = s;
  report.tau = tau;
  for (double eps : eps_list) {
    GlobalError ge = global_error(ctx, grid, eps, tau, s, cutoff, sandwiched, refine_dirs);
    report.eps.push_back(eps);
    report.global_errors.push_back(ge.value);
    report.argmax.push_back(ge.argmax_k);
  }
  report.slope = loglog_slope(report.eps, report.global_errors);
  double sx = 0, sy = 0;
  for (size_t i = 0; i < report.eps.size(); ++i) {
    sx += std::log(report.eps[i]);
    sy += std::log(report.global_errors[i]);
  }
  report.intercept = (sy - report.slope * sx) / static_cast<double>(report.eps.size());
  return report;
}

SharpnessProbe sharpness_probe(const EstimatesContext& ctx, const GermPackage& germ, double tau,
                               double s, const std::vector<int>& k_indices, int cutoff) {
  if (k_indices.empty()) throw Error("sharpness_probe: need probe indices");
  if (s >= 2.0 + 1e-12) throw Error("sharpness_probe: s must be <= 2");
  int branch = 0;
  for (int i = 1; i < germ.mus.size(); ++i)
    if (std::abs(germ.mus(i)) > std::abs(germ.mus(branch))) branch = i;
  const double mu = germ.mus(branch);
  const double gamma = germ.gammas(branch);
  if (std::abs(mu) < 1e-9)
    throw Error("sharpness_probe: mu(theta0) = 0, the resonance construction does not apply");

  SharpnessProbe probe;
  probe.gamma = gamma;
  probe.mu = mu;
  const double r0 = ctx.bundle.lattice.r0();
  const int kmin = *std::min_element(k_indices.begin(), k_indices.end());
  // t at index kappa is gamma / (kappa |mu|); keep every probe inside the
  // threshold regime t <= r0/4.
  probe.index_base =
      std::max(1, static_cast<int>(std::ceil(4.0 * gamma / (r0 * std::abs(mu) * kmin))));

  for (int k : k_indices) {
    const int kappa = k * probe.index_base;
    const double eps = std::pow(gamma, 1.5) * std::abs(tau) / (2.0 * M_PI * kappa * kappa * std::abs(mu));
    const double t = gamma / (kappa * std::abs(mu));
    if (t > r0 + 1e-12) throw Error("sharpness_probe: probe point left the Brillouin zone");
    double e = fiber_error(ctx, t * germ.theta, eps, tau, s, cutoff).fiber_error;
    probe.indices.push_back(kappa);
    probe.eps.push_back(eps);
    probe.t.push_back(t);
    probe.q.push_back(e / eps);
  }
  double qmin = *std::min_element(probe.q.begin(), probe.q.end());
  double qmax = *std::max_element(probe.q.begin(), probe.q.end());
  probe.growth_ratio = qmax / std::max(qmin, 1e-300);
  return probe;
}

// ---------------------------------------------------------------------------
// Cauchy problem

namespace {

double h_s_norm(const std::map<FreqVec, VectorXcd>& data, double s) {
  double acc = 0;
  for (const auto& [xi, v] : data) {
    double x2 = 0;
    for (int c : xi) x2 += static_cast<double>(c) * c;
    acc += std::pow(1.0 + x2, s) * v.squaredNorm();
  }
  return std::sqrt(acc);
}

// Composite Simpson of a vector integrand with halving until stable.
VectorXcd simpson_adaptive(const std::function<VectorXcd(double)>& f, double a, double b) {
  if (b <= a) return f(a) * 0.0;
  auto composite = [&](int intervals) {
    double h = (b - a) / intervals;
    VectorXcd acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return (acc * (h / 3.0)).eval();
  };
  int intervals = 16;
  VectorXcd prev = composite(intervals);
  for (int round = 0; round < 12; ++round) {
    intervals *= 2;
    VectorXcd cur = composite(intervals);
    double diff = (cur - prev).norm();
    if (diff <= 1e-6 * std::max(cur.norm(), 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

struct ModeEvolution {
  // Second-order evolution u'' = -Omega2 u with eigendecomposition supplied;
  // time_scale multiplies sqrt(lambda) (the M factor of A_eps).
  const VectorXd& lambdas;
  const MatrixXcd& vectors;
  double time_scale;

  VectorXcd apply_cos(double tau, const VectorXcd& u) const {
    VectorXcd c = vectors.adjoint() * u;
    for (int i = 0; i < c.size(); ++i)
      c(i) *= std::cos(tau * time_scale * std::sqrt(std::max(0.0, lambdas(i))));
    return vectors * c;
  }
  VectorXcd apply_sinc(double tau, const VectorXcd& u) const {
    VectorXcd c = vectors.adjoint() * u;
    for (int i = 0; i < c.size(); ++i) {
      double w = time_scale * std::sqrt(std::max(0.0, lambdas(i)));
      double x = tau * w;
      c(i) *= (std::abs(x) < 1e-8) ? tau * (1.0 - x * x / 6.0) : std::sin(x) / w;
    }
    return vectors * c;
  }
};

}  // namespace

double TorusData::h_s_norm_phi(double s) const { return h_s_norm(phi, s); }
double TorusData::h_s_norm_psi(double s) const { return h_s_norm(psi, s); }

double TorusData::l1_h_s_norm_force(double s, double tau) const {
  double acc = 0;
  for (const auto& piece : force) {
    double lo = std::max(0.0, piece.t0), hi = std::min(tau, piece.t1);
    if (hi > lo) acc += (hi - lo) * h_s_norm(piece.data, s);
  }
  return acc;
}

CauchyResult cauchy_error(const EstimatesContext& ctx, const TorusData& data, double tau, int M,
                          double s, int cutoff) {
  if (M < 1) throw Error("cauchy_error: eps must be 1/M with integer M >= 1");
  const Lattice& lat = ctx.bundle.lattice;
  const int d = lat.dim();
  if (!lat.basis().isApprox(MatrixXd::Identity(d, d) * 2.0 * M_PI, 1e-12))
    throw Error("cauchy_error: the torus path requires the cubic 2 pi lattice");
  const int n = ctx.bundle.b.cols();
  const bool weighted = ctx.sandwiched_available();

  double data_norm =
      data.h_s_norm_phi(s) + data.h_s_norm_psi(s) + data.l1_h_s_norm_force(s, tau);
  if (data_norm <= 0) throw Error("cauchy_error: zero data norm");

  // Collect residue classes touched by the data.
  auto residue_of = [M, d](const FreqVec& xi) {
    FreqVec r(d);
    for (int c = 0; c < d; ++c) r[c] = ((xi[c] % M) + M) % M;
    return r;
  };
  std::map<FreqVec, bool> classes;
  for (const auto& [xi, v] : data.phi) classes[residue_of(xi)] = true;
  for (const auto& [xi, v] : data.psi) classes[residue_of(xi)] = true;
  for (const auto& piece : data.force)
    for (const auto& [xi, v] : piece.data) classes[residue_of(xi)] = true;

  double err2 = 0;
  for (const auto& [residue, unused] : classes) {
    VectorXd k(d);
    for (int c = 0; c < d; ++c) {
      double kc = static_cast<double>(residue[c]) / M;
      if (kc > 0.5) kc -= 1.0;
      k(c) = kc;
    }
    const FiberKind kind = weighted ? FiberKind::Sandwiched : FiberKind::Plain;
    FiberOperator op = assemble(ctx.bundle, k, cutoff, kind);

    // Torus mode of fiber mode b: xi = M (k + b), integer by construction.
    auto torus_mode = [&](const FreqVec& b) {
      FreqVec xi(d);
      for (int c = 0; c < d; ++c) {
        double v = M * (k(c) + b[c]);
        xi[c] = static_cast<int>(std::lround(v));
      }
      return xi;
    };
    auto gather = [&](const std::map<FreqVec, VectorXcd>& src, const FiberBlock& blk) {
      VectorXcd out = VectorXcd::Zero(n * blk.modes.size());
      for (size_t i = 0; i < blk.modes.size(); ++i) {
        auto it = src.find(torus_mode(blk.modes[i]));
        if (it != src.end()) out.segment(n * i, n) = it->second;
      }
      return out;
    };
    // Ensure every data mode of this class is inside the retained box.
    {
      auto check_covered = [&](const std::map<FreqVec, VectorXcd>& src) {
        for (const auto& [xi, v] : src) {
          if (residue_of(xi) != residue) continue;
          for (int c = 0; c < d; ++c) {
            double b = static_cast<double>(xi[c]) / M - k(c);
            if (std::abs(b) > cutoff + 1e-9)
              throw Error("cauchy_error: data mode outside the retained box; raise cutoff");
          }
        }
      };
      check_covered(data.phi);
      check_covered(data.psi);
      for (const auto& piece : data.force) check_covered(piece.data);
    }

    for (size_t bi = 0; bi < op.blocks.size(); ++bi) {
      const FiberBlock& blk = op.blocks[bi];
      VectorXcd phi_b = gather(data.phi, blk);
      VectorXcd psi_b = gather(data.psi, blk);
      bool has_force = false;
      for (const auto& piece : data.force)
        if (gather(piece.data, blk).norm() > 0) has_force = true;
      if (phi_b.norm() == 0 && psi_b.norm() == 0 && !has_force) continue;

      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(blk.matrix);
      ModeEvolution evo{es.eigenvalues(), es.eigenvectors(), static_cast<double>(M)};

      MatrixXcd Fm, Fminv;
      if (weighted) {
        Fm = convolution_matrix(*ctx.f_field, blk);
        Fminv = convolution_matrix(*ctx.f_inv_field, blk);
      }
      auto to_v = [&](const VectorXcd& z) { return weighted ? (Fminv * z).eval() : z; };
      auto to_z = [&](const VectorXcd& v) { return weighted ? (Fm * v).eval() : v; };

      VectorXcd v_tau = evo.apply_cos(tau, to_v(phi_b)) + evo.apply_sinc(tau, to_v(psi_b));
      for (const auto& piece : data.force) {
        double lo = std::max(0.0, piece.t0), hi = std::min(tau, piece.t1);
        if (hi <= lo) continue;
        VectorXcd fpiece = to_v(gather(piece.data, blk));
        if (fpiece.norm() == 0) continue;
        v_tau += simpson_adaptive(
            [&](double sigma) { return evo.apply_sinc(tau - sigma, fpiece); }, lo, hi);
      }
      VectorXcd z_eps = to_z(v_tau);

      // Effective evolution, mode by mode.
      VectorXcd z0 = VectorXcd::Zero(z_eps.size());
      for (size_t i = 0; i < blk.modes.size(); ++i) {
        FreqVec xi = torus_mode(blk.modes[i]);
        VectorXcd phi_m = VectorXcd::Zero(n), psi_m = VectorXcd::Zero(n);
        if (auto it = data.phi.find(xi); it != data.phi.end()) phi_m = it->second;
        if (auto it = data.psi.find(xi); it != data.psi.end()) psi_m = it->second;
        std::vector<std::pair<const TorusData::ForcePiece*, VectorXcd>> fpieces;
        for (const auto& piece : data.force)
          if (auto it = piece.data.find(xi); it != piece.data.end())
            fpieces.emplace_back(&piece, it->second);
        if (phi_m.norm() == 0 && psi_m.norm() == 0 && fpieces.empty()) continue;

        VectorXd xi_real(d);
        for (int c = 0; c < d; ++c) xi_real(c) = xi[c];
        MatrixXcd bxi = ctx.bundle.b.at(xi_real);
        MatrixXcd sym = hermitize(bxi.adjoint() * ctx.g0 * bxi);
        if (weighted) sym = hermitize(*ctx.f0 * sym * (*ctx.f0));
        Eigen::SelfAdjointEigenSolver<MatrixXcd> ms(sym);
        ModeEvolution mevo{ms.eigenvalues(), ms.eigenvectors(), 1.0};
        MatrixXcd f0inv =
            weighted ? MatrixXcd(ctx.f0->inverse()) : MatrixXcd(MatrixXcd::Identity(n, n));
        VectorXcd v0 =
            mevo.apply_cos(tau, f0inv * phi_m) + mevo.apply_sinc(tau, f0inv * psi_m);
        for (auto& [piece, vec] : fpieces) {
          double lo = std::max(0.0, piece->t0), hi = std::min(tau, piece->t1);
          if (hi <= lo) continue;
          VectorXcd fv = f0inv * vec;
          v0 += simpson_adaptive(
              [&](double sigma) { return mevo.apply_sinc(tau - sigma, fv); }, lo, hi);
        }
        z0.segment(n * i, n) = weighted ? (*ctx.f0 * v0).eval() : v0;
      }
      err2 += (z_eps - z0).squaredNorm();
    }
  }

  CauchyResult result;
  result.error_l2 = std::sqrt(err2);
  result.data_norm = data_norm;
  result.normalized = result.error_l2 / data_norm;
  return result;
}

}  // namespace homog
