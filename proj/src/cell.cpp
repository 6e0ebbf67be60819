#include "homog/cell.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace homog {

namespace {

// Nonzero frequencies of the box [-N, N]^d restricted to the axes on which
// the coefficient actually varies.
std::vector<FreqVec> cell_modes(int dim, int cutoff, const std::vector<bool>& active) {
  std::vector<int> act;
  for (int a = 0; a < dim; ++a)
    if (active[a]) act.push_back(a);
  std::vector<FreqVec> modes;
  if (act.empty()) return modes;
  FreqVec v(act.size(), -cutoff);
  while (true) {
    FreqVec mode(dim, 0);
    for (size_t i = 0; i < act.size(); ++i) mode[act[i]] = v[i];
    if (!is_zero(mode)) modes.push_back(mode);
    size_t axis = 0;
    while (axis < v.size() && ++v[axis] > cutoff) v[axis++] = -cutoff;
    if (axis == v.size()) break;
  }
  return modes;
}

}  // namespace

CellSolution solve_cell(const CoefficientField& g, const BlochSymbol& b, const Lattice& lat,
                        int cutoff) {
  if (!g.flags().positive || !g.flags().hermitian)
    throw Error("solve_cell: g must be a positive Hermitian field");
  if (!g.resolves_cutoff(cutoff))
    throw Error("solve_cell: field grid too coarse for cutoff");
  const int d = lat.dim(), n = b.cols(), m = b.rows();

  const std::vector<FreqVec> modes = cell_modes(d, cutoff, g.active_axes());
  const size_t count = modes.size();

  CellSolution out;
  if (count == 0) {
    // Constant coefficient: Lambda = 0, g0 = g.
    out.Lambda = CoefficientField::from_fourier_exact(d, n, m, {}, g.grid_size(), {});
    out.g_tilde = g;
    out.g0 = hermitize(g.mean());
    out.residual = 0;
    return out;
  }

  std::vector<VectorXd> pos(count);
  std::vector<MatrixXcd> bsym(count);
  for (size_t i = 0; i < count; ++i) {
    pos[i] = lat.dual_vector(modes[i]);
    bsym[i] = b.at(pos[i]);
  }

  MatrixXcd K(n * count, n * count);
  for (size_t i = 0; i < count; ++i)
    for (size_t j = 0; j < count; ++j)
      K.block(n * i, n * j, n, n) =
          bsym[i].adjoint() * g.fourier_at(subtract(modes[i], modes[j])) * bsym[j];
  K = hermitize(K);

  MatrixXcd rhs(n * count, m);
  for (size_t i = 0; i < count; ++i)
    rhs.block(n * i, 0, n, m) = -(bsym[i].adjoint() * g.fourier_at(modes[i]));

  Eigen::LDLT<MatrixXcd> solver(K);
  if (solver.info() != Eigen::Success)
    throw Error("solve_cell: reduced system factorization failed (conditioning)");
  MatrixXcd X = solver.solve(rhs);
  double direct_residual = (K * X - rhs).norm() / std::max(1.0, rhs.norm());
  if (direct_residual > 1e-6)
    throw Error("solve_cell: reduced solve residual " + format_double(direct_residual) +
                "; system is badly conditioned");

  FourierMap lambda_terms;
  for (size_t i = 0; i < count; ++i) {
    MatrixXcd li = X.block(n * i, 0, n, m);
    if (li.cwiseAbs().maxCoeff() > 1e-300) lambda_terms[modes[i]] = li;
  }

  // g~ = g (b(D) Lambda + 1): coefficients by exact convolution.
  FourierMap gt;
  for (const auto& [q, gq] : g.fourier()) gt[q] = gq;
  for (size_t i = 0; i < count; ++i) {
    MatrixXcd flow = bsym[i] * X.block(n * i, 0, n, m);  // m x m at mode i
    for (const auto& [q, gq] : g.fourier()) {
      FreqVec c(d);
      for (int a = 0; a < d; ++a) c[a] = q[a] + modes[i][a];
      auto it = gt.find(c);
      if (it == gt.end())
        gt[c] = gq * flow;
      else
        it->second += gq * flow;
    }
  }

  int max_freq = 1;
  for (const auto& [c, v] : gt)
    for (int a = 0; a < d; ++a) max_freq = std::max(max_freq, std::abs(c[a]));

  out.g0 = hermitize(gt[FreqVec(d, 0)]);
  double res2 = 0;
  for (size_t i = 0; i < count; ++i) {
    auto it = gt.find(modes[i]);
    if (it != gt.end()) res2 += (bsym[i].adjoint() * it->second).squaredNorm();
  }
  out.residual = std::sqrt(res2);

  out.Lambda = CoefficientField::from_fourier_exact(d, n, m, std::move(lambda_terms),
                                                    g.grid_size(), {});
  FieldFlags gt_flags;
  gt_flags.band_limited = g.flags().band_limited;
  out.g_tilde = CoefficientField::from_fourier_exact(d, m, m, std::move(gt),
                                                     std::min(2 * max_freq + 3, 1025), gt_flags);
  return out;
}

std::pair<MatrixXcd, MatrixXcd> voigt_reuss(const CoefficientField& g) {
  if (!g.flags().positive) throw Error("voigt_reuss: g must be positive");
  MatrixXcd over = hermitize(g.mean());
  MatrixXcd under = hermitize(g.mean_of_inverse().inverse());
  return {under, over};
}

WeightedConstants weighted_constants(const CellSolution& cell,
                                     const std::optional<CoefficientField>& f,
                                     const std::optional<CoefficientField>& Q) {
  if (static_cast<bool>(f) == static_cast<bool>(Q))
    throw Error("weighted_constants: pass exactly one of f, Q");
  CoefficientField q = Q ? *Q
                         : CoefficientField::from_closure(
                               f->dim(), f->rows(), f->rows(),
                               [ff = *f](const VectorXd& frac) {
                                 MatrixXcd v = ff.sample(frac);
                                 return (v * v.adjoint()).inverse().eval();
                               },
                               std::max(f->grid_size(), 257),
                               FieldFlags{true, true, false, false});
  if (!q.flags().positive) throw Error("weighted_constants: Q must be positive");

  WeightedConstants out;
  out.Q_bar = hermitize(q.mean());
  out.f0 = hermitian_inverse_sqrt(out.Q_bar);

  const int n = cell.Lambda.rows(), m = cell.Lambda.cols();
  MatrixXcd mean_q_lambda = MatrixXcd::Zero(n, m);
  for (const auto& [b, lam] : cell.Lambda.fourier())
    mean_q_lambda += q.fourier_at(negate(b)) * lam;
  out.Lambda_Q0 = -out.Q_bar.inverse() * mean_q_lambda;

  FourierMap shifted = cell.Lambda.fourier();
  FreqVec zero(cell.Lambda.dim(), 0);
  auto it = shifted.find(zero);
  if (it == shifted.end())
    shifted[zero] = out.Lambda_Q0;
  else
    it->second += out.Lambda_Q0;
  out.Lambda_Q = CoefficientField::from_fourier_exact(cell.Lambda.dim(), n, m,
                                                      std::move(shifted),
                                                      cell.Lambda.grid_size(), {});
  return out;
}

// ---------------------------------------------------------------------------
// Layered 1-d oracles

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const double kGx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                       0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                       0.9445750230732326, 0.9894009349916499};
const double kGw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                       0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                       0.0622535239386479, 0.0271524594117541};

template <typename F>
double gauss_panel(const F& fn, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0;
  for (int i = 0; i < 8; ++i)
    acc += kGw[i] * (fn(mid + half * kGx[i]) + fn(mid - half * kGx[i]));
  return acc * half;
}

std::vector<std::pair<double, double>> smooth_pieces(const Piecewise1D& h) {
  std::vector<double> cuts = {0.0, 2.0 * M_PI};
  for (double j : h.jumps)
    if (j > 1e-14 && j < 2.0 * M_PI - 1e-14) cuts.push_back(j);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> pieces;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) pieces.emplace_back(cuts[i], cuts[i + 1]);
  return pieces;
}

template <typename F>
double integrate_pieces(const Piecewise1D& domain, const F& fn, int panels_per_piece = 96) {
  double acc = 0;
  for (auto [a, b] : smooth_pieces(domain)) {
    for (int p = 0; p < panels_per_piece; ++p) {
      double lo = a + (b - a) * p / panels_per_piece;
      double hi = a + (b - a) * (p + 1) / panels_per_piece;
      acc += gauss_panel(fn, lo, hi);
    }
  }
  return acc;
}

}  // namespace

double layered_mean(const Piecewise1D& h) {
  return integrate_pieces(h, h.value) / (2.0 * M_PI);
}

double layered_harmonic_mean(const Piecewise1D& h) {
  double inv = integrate_pieces(h, [&h](double x) { return 1.0 / h.value(x); }) / (2.0 * M_PI);
  return 1.0 / inv;
}

double layered_oracle_scalar(const Piecewise1D& g) { return layered_harmonic_mean(g); }

MatrixXcd IsotropicLayeredOracle::g0() const {
  MatrixXcd m = MatrixXcd::Zero(3, 3);
  m(0, 0) = A;
  m(0, 2) = B;
  m(1, 1) = C;
  m(2, 0) = B;
  m(2, 2) = E;
  return m;
}

IsotropicLayeredOracle isotropic_layered_oracle(const Piecewise1D& K, const Piecewise1D& mu) {
  Piecewise1D domain;
  domain.jumps = K.jumps;
  domain.jumps.insert(domain.jumps.end(), mu.jumps.begin(), mu.jumps.end());
  domain.value = [](double) { return 0.0; };

  auto Kv = K.value;
  auto Mv = mu.value;
  IsotropicLayeredOracle o;
  double inv_A = integrate_pieces(domain, [&](double x) { return 1.0 / (Kv(x) + Mv(x)); });
  o.A = 2.0 * M_PI / inv_A;
  double inv_mu = integrate_pieces(domain, [&](double x) { return 1.0 / Mv(x); });
  double mu_under = 2.0 * M_PI / inv_mu;
  o.C = 4.0 * mu_under;
  auto rho = [&](double x) { return (Kv(x) - Mv(x)) / (Kv(x) + Mv(x)); };
  double rho_mean = integrate_pieces(domain, rho) / (2.0 * M_PI);
  o.B = o.A * rho_mean;
  double kmu_mean =
      integrate_pieces(domain, [&](double x) { return Kv(x) * Mv(x) / (Kv(x) + Mv(x)); }) /
      (2.0 * M_PI);
  o.E = 4.0 * kmu_mean + rho_mean * rho_mean * o.A;

  // Lambda_22(x) = 2i (W(x) - mean W) with W' = mu_under/mu - 1.  mu may be
  // sharply peaked (the shipped example has contrast 625), so W and all the
  // product means accumulate over one fine panel walk with per-subinterval
  // Gauss rules.
  auto Wprime = [&](double x) { return mu_under / Mv(x) - 1.0; };
  auto h_T = [&](double x) {
    return 4.0 * Kv(x) * Mv(x) / (Kv(x) + Mv(x)) + rho(x) * rho_mean * o.A;
  };
  double mean_W = 0, mean_rho_W = 0, mean_hT_W = 0;
  double mean_rho = 0, mean_hT = 0;
  double W_cursor = 0;  // W at the start of the current panel
  for (auto [a, b] : smooth_pieces(domain)) {
    const int panels = 1024;
    for (int p = 0; p < panels; ++p) {
      double lo = a + (b - a) * p / panels;
      double hi = a + (b - a) * (p + 1) / panels;
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      std::vector<std::pair<double, double>> pts;  // (node, weight) ascending
      for (int i = 0; i < 8; ++i) {
        pts.emplace_back(mid - half * kGx[i], half * kGw[i]);
        pts.emplace_back(mid + half * kGx[i], half * kGw[i]);
      }
      std::sort(pts.begin(), pts.end());
      double wx = W_cursor, xprev = lo;
      for (auto [x, w] : pts) {
        wx += gauss_panel(Wprime, xprev, x);
        xprev = x;
        double hr = rho(x), ht = h_T(x);
        mean_W += w * wx;
        mean_rho_W += w * hr * wx;
        mean_hT_W += w * ht * wx;
        mean_rho += w * hr;
        mean_hT += w * ht;
      }
      W_cursor += gauss_panel(Wprime, lo, hi);
    }
  }
  const double inv_period = 1.0 / (2.0 * M_PI);
  mean_W *= inv_period;
  mean_rho_W *= inv_period;
  mean_hT_W *= inv_period;
  mean_rho *= inv_period;
  mean_hT *= inv_period;

  // mean(h * Lambda22) = 2i (mean(h W) - mean(h) mean(W))
  o.S = o.A * Complex(0.0, 2.0 * (mean_rho_W - mean_rho * mean_W));
  o.T = Complex(0.0, 2.0 * (mean_hT_W - mean_hT * mean_W));

  o.theta1_sq = (o.E - 0.25 * o.C) / (o.A + o.E - 0.5 * o.C);
  double t2sq = 1.0 - o.theta1_sq;
  double t2 = std::sqrt(t2sq);
  o.mu_hat = 0.5 * std::abs(o.S * o.theta1_sq * t2 + std::conj(o.T) * t2sq * t2);
  return o;
}

IsotropicLayeredOracle isotropic_example_oracle() {
  const double a = isotropic_elasticity_root();
  Piecewise1D K{[a](double x) { return a + (x < 0.5 * M_PI ? -100.0 : 100.0); },
                {0.5 * M_PI}};
  Piecewise1D mu{[](double x) { return 1.0 + 624.0 * std::cos(x) * std::cos(x); }, {}};
  return isotropic_layered_oracle(K, mu);
}

}  // namespace homog
