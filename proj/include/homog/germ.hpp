#pragma once

#include "homog/cell.hpp"

namespace homog {

// Direction-wise threshold data: germ, generalized eigenpairs, the third
// order operator and its block split, plus the separation constant.
struct GermPackage {
  VectorXd theta;
  MatrixXcd S;      // b(theta)* g0 b(theta)
  MatrixXcd Q_bar;  // identity when the problem is unweighted
  VectorXd gammas;  // ascending generalized eigenvalues
  MatrixXcd zetas;  // columns, Q_bar-orthonormal
  MatrixXcd L;      // m x m matrix entering N
  MatrixXcd L_Q;    // shifted variant (equal to L when Q = I)
  MatrixXcd N_hat;  // b* L b
  MatrixXcd N_Q;    // b* L_Q b
  MatrixXcd N0;     // block-diagonal part over gamma clusters
  MatrixXcd Nstar;  // off-diagonal part
  VectorXd mus;     // per-branch t^3 coefficients (cluster-block eigenvalues)
  std::vector<std::pair<int, int>> clusters;  // inclusive index ranges
  bool cluster_ambiguous = false;
  std::vector<std::pair<int, int>> alt_clusters;  // coarser split when ambiguous
  double c_circ = 0;                              // +inf when no pair interacts
};

MatrixXcd germ_matrix(const MatrixXcd& g0, const BlochSymbol& b, const VectorXd& theta);

// Generalized problem S zeta = gamma Q_bar zeta with Q_bar-orthonormal
// eigenvectors, gammas ascending.
std::pair<VectorXd, MatrixXcd> generalized_spectrum(const MatrixXcd& S, const MatrixXcd& Q_bar);

// L(theta) = mean(Lambda* b(theta)* g~ + g~* b(theta) Lambda); with a shift
// Lambda_Q0 present the constant contribution of the weighted corrector is
// added, giving L_Q(theta).
MatrixXcd matrix_L(const CellSolution& cell, const BlochSymbol& b, const VectorXd& theta,
                   const std::optional<MatrixXcd>& lambda_q0 = std::nullopt);

struct GermOptions {
  double cluster_rel_gap = 1e-6;
  double interaction_tol = 1e-10;
  double c_star = 0;  // lower bound used inside c_circ
};

// Assemble the full per-direction package from solved cell data.
GermPackage germ_package(const CellSolution& cell, const BlochSymbol& b, const VectorXd& theta,
                         const std::optional<WeightedConstants>& weighted,
                         const GermOptions& opts);

// Threshold validation: least-squares (gamma, mu) per low band from fiber
// eigenvalues at k = t * theta, matched against the germ data.
struct ThresholdFit {
  VectorXd theta;
  std::vector<double> t_samples;
  std::vector<double> gamma_fit;  // one per band, band order = germ order
  std::vector<double> mu_fit;
  std::vector<int> germ_match;    // germ index per fitted band
  double fit_residual = 0;        // max relative LS residual
  bool crossing_flagged = false;  // ambiguous eigenvector continuation
};

ThresholdFit threshold_fit(const FiberBundle& bundle, const GermPackage& germ,
                           const VectorXd& theta, const std::vector<double>& t_samples,
                           int cutoff);

}  // namespace homog
