#include "homog/germ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace homog {

MatrixXcd germ_matrix(const MatrixXcd& g0, const BlochSymbol& b, const VectorXd& theta) {
  if (std::abs(theta.norm() - 1.0) > 1e-12) throw Error("germ_matrix: theta must be unit");
  MatrixXcd bt = b.at(theta);
  return hermitize(bt.adjoint() * g0 * bt);
}

std::pair<VectorXd, MatrixXcd> generalized_spectrum(const MatrixXcd& S, const MatrixXcd& Q_bar) {
  if (min_eigenvalue(hermitize(Q_bar)) <= 0)
    throw Error("generalized_spectrum: weight must be positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(hermitize(S), hermitize(Q_bar));
  if (es.info() != Eigen::Success) throw Error("generalized_spectrum: solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

MatrixXcd matrix_L(const CellSolution& cell, const BlochSymbol& b, const VectorXd& theta,
                   const std::optional<MatrixXcd>& lambda_q0) {
  MatrixXcd bt = b.at(theta);
  const int m = b.rows();
  // mean(Lambda* b(theta)* g~) via the Parseval pairing of the two caches.
  MatrixXcd half = MatrixXcd::Zero(m, m);
  for (const auto& [freq, lam] : cell.Lambda.fourier())
    half += lam.adjoint() * bt.adjoint() * cell.g_tilde.fourier_at(freq);
  MatrixXcd L = half + half.adjoint();
  if (lambda_q0) {
    MatrixXcd shift = lambda_q0->adjoint() * bt.adjoint() * cell.g0;
    L += shift + shift.adjoint();
  }
  return hermitize(L);
}

namespace {

std::vector<std::pair<int, int>> cluster_ranges(const VectorXd& gammas, double rel_gap) {
  std::vector<std::pair<int, int>> ranges;
  if (gammas.size() == 0) return ranges;
  double scale = std::max(gammas.cwiseAbs().maxCoeff(), 1e-300);
  int start = 0;
  for (int i = 1; i <= gammas.size(); ++i) {
    if (i == gammas.size() || gammas(i) - gammas(i - 1) >= rel_gap * scale) {
      ranges.emplace_back(start, i - 1);
      start = i;
    }
  }
  return ranges;
}

}  // namespace

GermPackage germ_package(const CellSolution& cell, const BlochSymbol& b, const VectorXd& theta,
                         const std::optional<WeightedConstants>& weighted,
                         const GermOptions& opts) {
  const int n = b.cols();
  GermPackage pkg;
  pkg.theta = theta;
  pkg.S = germ_matrix(cell.g0, b, theta);
  pkg.Q_bar = weighted ? hermitize(weighted->Q_bar) : MatrixXcd::Identity(n, n);
  std::tie(pkg.gammas, pkg.zetas) = generalized_spectrum(pkg.S, pkg.Q_bar);

  pkg.L = matrix_L(cell, b, theta);
  pkg.L_Q = weighted ? matrix_L(cell, b, theta, weighted->Lambda_Q0) : pkg.L;
  MatrixXcd bt = b.at(theta);
  pkg.N_hat = hermitize(bt.adjoint() * pkg.L * bt);
  pkg.N_Q = hermitize(bt.adjoint() * pkg.L_Q * bt);

  pkg.clusters = cluster_ranges(pkg.gammas, opts.cluster_rel_gap);
  {
    // Flag near-threshold gaps and provide the coarser merge as alternative.
    double scale = std::max(pkg.gammas.cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 1; i < pkg.gammas.size(); ++i) {
      double gap = pkg.gammas(i) - pkg.gammas(i - 1);
      if (gap >= opts.cluster_rel_gap * scale && gap < 10.0 * opts.cluster_rel_gap * scale)
        pkg.cluster_ambiguous = true;
    }
    if (pkg.cluster_ambiguous)
      pkg.alt_clusters = cluster_ranges(pkg.gammas, 10.0 * opts.cluster_rel_gap);
  }

  pkg.N0 = MatrixXcd::Zero(n, n);
  pkg.mus = VectorXd::Zero(n);
  for (auto [lo, hi] : pkg.clusters) {
    MatrixXcd Z = pkg.zetas.middleCols(lo, hi - lo + 1);
    MatrixXcd P = Z * Z.adjoint() * pkg.Q_bar;  // skew projection, Q_bar-orthogonal
    pkg.N0 += P.adjoint() * pkg.N_Q * P;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(Z.adjoint() * pkg.N_Q * Z));
    for (int i = lo; i <= hi; ++i) pkg.mus(i) = es.eigenvalues()(i - lo);
  }
  pkg.N0 = hermitize(pkg.N0);
  pkg.Nstar = pkg.N_Q - pkg.N0;

  pkg.c_circ = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < pkg.clusters.size(); ++j)
    for (size_t l = 0; l < pkg.clusters.size(); ++l) {
      if (j == l) continue;
      auto [jlo, jhi] = pkg.clusters[j];
      auto [llo, lhi] = pkg.clusters[l];
      MatrixXcd Zj = pkg.zetas.middleCols(jlo, jhi - jlo + 1);
      MatrixXcd Zl = pkg.zetas.middleCols(llo, lhi - llo + 1);
      if (operator_norm(Zj.adjoint() * pkg.N_Q * Zl) <= opts.interaction_tol) continue;
      double c = std::min(opts.c_star > 0 ? opts.c_star : std::numeric_limits<double>::infinity(),
                          std::abs(pkg.gammas(jlo) - pkg.gammas(llo)) / n);
      pkg.c_circ = std::min(pkg.c_circ, c);
    }
  return pkg;
}

// ---------------------------------------------------------------------------
// Threshold fit

namespace {

struct BandTrack {
  std::vector<double> values;  // lambda(t) per sample
  int block = -1;
  VectorXcd vec;  // latest eigenvector for continuation
};

}  // namespace

ThresholdFit threshold_fit(const FiberBundle& bundle, const GermPackage& germ,
                           const VectorXd& theta, const std::vector<double>& t_samples,
                           int cutoff) {
  if (t_samples.size() < 4) throw Error("threshold_fit: need at least 4 t samples");
  for (size_t i = 0; i < t_samples.size(); ++i) {
    if (t_samples[i] <= 0) throw Error("threshold_fit: t samples must be positive");
    if (i && t_samples[i] <= t_samples[i - 1])
      throw Error("threshold_fit: t samples must be ascending");
  }
  const int n = bundle.b.cols();
  const FiberKind kind =
      (bundle.f || bundle.Q) ? FiberKind::WeightedMass : FiberKind::Plain;

  ThresholdFit fit;
  fit.theta = theta;
  fit.t_samples = t_samples;

  const double c_star = bundle.c_star();
  std::vector<BandTrack> tracks(n);
  for (size_t s = 0; s < t_samples.size(); ++s) {
    FiberOperator op = assemble(bundle, t_samples[s] * theta, cutoff, kind);
    // Lowest n eigenpairs.  Blocks whose analytic lower bound
    // c_* min|b+k|^2 clears the candidates cannot contribute and are not
    // decomposed.
    std::vector<std::pair<int, VectorXcd>> vecs;
    std::vector<double> vals;
    auto merge_block = [&](int bi) {
      if (op.kind == FiberKind::WeightedMass) {
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> ges(op.blocks[bi].matrix,
                                                                op.blocks[bi].mass);
        for (int j = 0; j < std::min<int>(n, ges.eigenvalues().size()); ++j) {
          vals.push_back(ges.eigenvalues()(j));
          vecs.emplace_back(bi, ges.eigenvectors().col(j));
        }
      } else {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op.blocks[bi].matrix);
        for (int j = 0; j < std::min<int>(n, es.eigenvalues().size()); ++j) {
          vals.push_back(es.eigenvalues()(j));
          vecs.emplace_back(bi, es.eigenvectors().col(j));
        }
      }
    };
    merge_block(0);  // the zero-coset block carries the threshold bands
    {
      std::vector<int> order(vals.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
      double nth = vals[order[std::min<size_t>(n, vals.size()) - 1]];
      for (size_t bi = 1; bi < op.blocks.size(); ++bi) {
        double minpos2 = std::numeric_limits<double>::infinity();
        for (const auto& p : op.blocks[bi].positions)
          minpos2 = std::min(minpos2, p.squaredNorm());
        if (c_star * minpos2 > nth * (1.0 + 1e-9)) continue;
        merge_block(static_cast<int>(bi));
      }
    }
    {
      std::vector<int> order(vals.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
      std::vector<double> pick_vals;
      std::vector<std::pair<int, VectorXcd>> pick_vecs;
      for (int r = 0; r < n; ++r) {
        pick_vals.push_back(vals[order[r]]);
        pick_vecs.push_back(vecs[order[r]]);
      }
      vals = std::move(pick_vals);
      vecs = std::move(pick_vecs);
    }
    if (s == 0) {
      for (int r = 0; r < n; ++r) {
        tracks[r].values.push_back(vals[r]);
        tracks[r].block = vecs[r].first;
        tracks[r].vec = vecs[r].second;
      }
      continue;
    }
    // Greedy overlap matching against the previous sample.
    std::vector<int> assignment(n, -1);
    std::vector<bool> used(n, false);
    std::vector<std::tuple<double, int, int>> scored;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        double ov = 0;
        if (tracks[r].block == vecs[c].first)
          ov = std::abs(tracks[r].vec.dot(vecs[c].second));
        scored.emplace_back(ov, r, c);
      }
    std::sort(scored.begin(), scored.end(), std::greater<>());
    int assigned = 0;
    for (auto& [ov, r, c] : scored) {
      if (assignment[r] >= 0 || used[c]) continue;
      if (ov < 0.5) fit.crossing_flagged = true;  // weak continuation evidence
      assignment[r] = c;
      used[c] = true;
      if (++assigned == n) break;
    }
    for (int r = 0; r < n; ++r) {
      int c = assignment[r];
      tracks[r].values.push_back(vals[c]);
      tracks[r].block = vecs[c].first;
      tracks[r].vec = vecs[c].second;
    }
  }

  // Per-branch least squares of lambda/t^2 on {1, t, t^2} (a cubic nuisance
  // term is added when the sample count supports it, guarding mu against the
  // O(t^4) expansion remainder).
  const size_t cols = t_samples.size() >= 6 ? 4 : 3;
  fit.gamma_fit.resize(n);
  fit.mu_fit.resize(n);
  for (int r = 0; r < n; ++r) {
    MatrixXd A(t_samples.size(), cols);
    VectorXd y(t_samples.size());
    for (size_t s = 0; s < t_samples.size(); ++s) {
      double t = t_samples[s];
      A(s, 0) = 1.0;
      A(s, 1) = t;
      A(s, 2) = t * t;
      if (cols == 4) A(s, 3) = t * t * t;
      y(s) = tracks[r].values[s] / (t * t);
    }
    VectorXd coef = A.colPivHouseholderQr().solve(y);
    fit.gamma_fit[r] = coef(0);
    fit.mu_fit[r] = coef(1);
    double rel = (A * coef - y).norm() / std::max(1e-300, y.norm());
    fit.fit_residual = std::max(fit.fit_residual, rel);
  }

  // Bijective matching against the germ data (n is tiny; try permutations).
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  std::sort(perm.begin(), perm.end());
  do {
    double cost = 0;
    for (int r = 0; r < n; ++r) {
      double g = germ.gammas(perm[r]);
      cost += std::abs(fit.gamma_fit[r] - g) / std::max(1e-300, std::abs(g)) +
              std::abs(fit.mu_fit[r] - germ.mus(perm[r]));
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  fit.germ_match = best;
  return fit;
}

}  // namespace homog
