#pragma once

#include "homog/fiber.hpp"

namespace homog {

// Periodic corrector Lambda (zero mean), the flux field g~ = g(b(D)Lambda + 1)
// and the effective matrix g0 = mean(g~).
struct CellSolution {
  CoefficientField Lambda;   // n x m
  CoefficientField g_tilde;  // m x m
  MatrixXcd g0;              // constant m x m, Hermitian positive
  double residual = 0;       // truncated weak-equation residual
};

// Truncated Galerkin solve on the zero-mean subspace.  For coefficients that
// vary only along some axes the system is solved on the matching frequency
// sublattice, which reproduces the full box solution exactly.
CellSolution solve_cell(const CoefficientField& g, const BlochSymbol& b, const Lattice& lat,
                        int cutoff);

// Arithmetic / harmonic mean bracketing (overline g, underline g).
std::pair<MatrixXcd, MatrixXcd> voigt_reuss(const CoefficientField& g);

struct WeightedConstants {
  MatrixXcd Q_bar;              // mean of Q
  MatrixXcd f0;                 // Q_bar^{-1/2}
  MatrixXcd Lambda_Q0;          // constant shift
  CoefficientField Lambda_Q;    // Lambda + Lambda_Q0
};

// Weighted cell constants for the sandwiched problem.  Pass exactly one of
// f (sandwich factor, Q = (f f*)^{-1}) or Q.
WeightedConstants weighted_constants(const CellSolution& cell,
                                     const std::optional<CoefficientField>& f,
                                     const std::optional<CoefficientField>& Q);

// ---------------------------------------------------------------------------
// Closed-form oracles for coefficients depending on x1 only.

struct Piecewise1D {
  std::function<double(double)> value;  // on [0, 2*pi)
  std::vector<double> jumps;            // interior jump locations
};

// Quadrature over [0, 2*pi) split at the declared jumps (composite
// Gauss-Legendre per smooth piece).
double layered_mean(const Piecewise1D& h);
double layered_harmonic_mean(const Piecewise1D& h);

// Scalar layered medium: g0 = underline(g).
double layered_oracle_scalar(const Piecewise1D& g);

// Effective entries of the 2-d isotropic elasticity operator with layered
// K(x1), mu(x1): g0 = [[A,0,B],[0,C,0],[B,0,E]].
struct IsotropicLayeredOracle {
  double A = 0, B = 0, C = 0, E = 0;
  Complex S;  // mean correlation entering L(theta)
  Complex T;
  double theta1_sq = 0;  // degenerate direction of the germ
  double mu_hat = 0;     // |eigenvalue| of N(theta) at that direction

  MatrixXcd g0() const;
};

IsotropicLayeredOracle isotropic_layered_oracle(const Piecewise1D& K, const Piecewise1D& mu);

// The shipped isotropic example: piecewise K with contrast b around the root
// a of the degeneracy equation, mu = 1 + c cos^2.
IsotropicLayeredOracle isotropic_example_oracle();

}  // namespace homog
