#pragma once

#include "homog/germ.hpp"

namespace homog {

// Everything fiber-error evaluations need besides the raw bundle: the
// effective matrix and, for sandwiched problems, the constant factor f0 and
// the multiplication fields f, f^{-1}.
struct EstimatesContext {
  FiberBundle bundle;
  MatrixXcd g0;
  std::optional<MatrixXcd> f0;
  std::optional<CoefficientField> f_field;
  std::optional<CoefficientField> f_inv_field;
  int cell_cutoff = 0;

  bool sandwiched_available() const { return f0.has_value(); }
};

EstimatesContext make_context(const FiberBundle& bundle, int cell_cutoff);

struct ErrorSample {
  VectorXd k;
  double eps = 0, tau = 0, s = 0;
  double fiber_error = 0;
  int cutoff = 0;
  bool sandwiched = false;
};

// || (cos(eps^-1 tau A(k)^{1/2}) - cos(eps^-1 tau A0(k)^{1/2})) R(k,eps)^{s/2} ||,
// or the f-conjugated variant when sandwiched.
ErrorSample fiber_error(const EstimatesContext& ctx, const VectorXd& k, double eps, double tau,
                        double s, int cutoff, bool sandwiched = false);

// Doubling check of the discretized observable; throws with a hint when the
// cutoff under-resolves the phases at this (k, eps, tau).
void validate_phase_resolution(const EstimatesContext& ctx, const VectorXd& k, double eps,
                               double tau, double s, int cutoff, bool sandwiched = false);

struct GlobalError {
  double value = 0;
  VectorXd argmax_k;
};

// Max of fiber_error over the grid, refined radially along the argmax
// direction and any extra directions supplied.
GlobalError global_error(const EstimatesContext& ctx, const KGrid& grid, double eps, double tau,
                         double s, int cutoff, bool sandwiched = false,
                         const std::vector<VectorXd>& refine_dirs = {});

struct RateReport {
  std::vector<double> eps;
  std::vector<double> global_errors;
  std::vector<VectorXd> argmax;
  double slope = 0;
  double intercept = 0;
  double s = 0, tau = 0;
};

RateReport rate_experiment(const EstimatesContext& ctx, double s, double tau,
                           const std::vector<double>& eps_list, const KGrid& grid, int cutoff,
                           bool sandwiched = false, const std::vector<VectorXd>& refine_dirs = {});

struct SharpnessProbe {
  double gamma = 0, mu = 0;
  int index_base = 1;  // user indices are scaled by this to stay in the zone
  std::vector<int> indices;
  std::vector<double> eps, t, q;
  double growth_ratio = 0;  // q_max / q_min
};

// Probe q_k = E(eps_k)/eps_k along the resonance sequence
// eps_k = gamma^{3/2} |tau| / (2 pi k^2 |mu|), k = t(eps_k) theta0 with
// t(eps_k) = gamma/(k |mu|).  Refused when mu(theta0) vanishes.  Indices are
// uniformly rescaled so every probe sits inside the threshold regime
// t <= r0/4.
SharpnessProbe sharpness_probe(const EstimatesContext& ctx, const GermPackage& germ, double tau,
                               double s, const std::vector<int>& k_indices, int cutoff);

// ---------------------------------------------------------------------------
// Cauchy problem on the 2 pi torus with eps = 1/M.

struct TorusData {
  std::map<FreqVec, VectorXcd> phi, psi;
  struct ForcePiece {
    double t0 = 0, t1 = 0;
    std::map<FreqVec, VectorXcd> data;
  };
  std::vector<ForcePiece> force;

  double h_s_norm_phi(double s) const;
  double h_s_norm_psi(double s) const;
  double l1_h_s_norm_force(double s, double tau) const;
};

struct CauchyResult {
  double error_l2 = 0;    // || v_eps(tau) - v_0(tau) ||_{L2}
  double data_norm = 0;   // H^s norm of (phi, psi, F)
  double normalized = 0;  // error / data_norm
};

// Exact-in-time evolution through the Bloch residue classes of A_eps with
// eps = 1/M, against the constant-coefficient effective evolution.
CauchyResult cauchy_error(const EstimatesContext& ctx, const TorusData& data, double tau, int M,
                          double s, int cutoff);

}  // namespace homog
