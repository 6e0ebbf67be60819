#pragma once

#include "homog/fields.hpp"
#include "homog/lattice.hpp"

#include <optional>

namespace homog {

enum class FiberKind { Plain, Effective, Sandwiched, WeightedMass };

// One exactly decoupled sub-block of a truncated fiber: the modes sharing the
// same coordinates on axes where no coefficient varies.
struct FiberBlock {
  std::vector<FreqVec> modes;       // integer dual coordinates
  std::vector<VectorXd> positions;  // dual vector + k per mode
  MatrixXcd matrix;                 // Hermitian, n * modes.size() square
  MatrixXcd mass;                   // weighted-mass kind only, else empty
};

// Truncated-Fourier Galerkin matrix of b(D+k)* g b(D+k) (optionally with the
// sandwich f* . f or a mass weight Q) over frequencies in [-N, N]^d.
struct FiberOperator {
  VectorXd k;
  int cutoff = 0;
  int n = 0;  // vector components per mode
  FiberKind kind = FiberKind::Plain;
  std::vector<FiberBlock> blocks;

  int total_dim() const;
  double matrix_norm_estimate() const;  // max block row-sum bound
};

struct FiberBundle {
  Lattice lattice;
  BlochSymbol b;
  CoefficientField g;
  std::optional<CoefficientField> f;
  std::optional<CoefficientField> Q;

  static FiberBundle from_example(const ExampleCase& ex);

  // c_* = alpha0 * |f^{-1}|^{-2} * |g^{-1}|^{-1}
  double c_star() const;
};

FiberOperator assemble(const FiberBundle& bundle, const VectorXd& k, int cutoff,
                       FiberKind kind = FiberKind::Plain);

// Constant-coefficient fiber of the effective operator; block structure is
// copied from `like` so differences are block-aligned.
FiberOperator effective_fiber(const MatrixXcd& g0, const BlochSymbol& b, const Lattice& lat,
                              const VectorXd& k, int cutoff,
                              const std::optional<MatrixXcd>& f0 = std::nullopt,
                              const FiberOperator* like = nullptr);

// Diagonal weights of R(k, eps)^{s/2}: eps^s (|b + k|^2 + eps^2)^{-s/2},
// repeated over the n components of each mode.
VectorXd smoothing_weights(const FiberBlock& block, int n, double eps, double s);

struct BlockEigen {
  VectorXd eigenvalues;
  MatrixXcd vectors;
};

struct EigenDecomposition {
  const FiberOperator* op = nullptr;
  std::vector<BlockEigen> blocks;
  // Globally sorted (block, index) pairs, ascending eigenvalue.
  std::vector<std::pair<int, int>> order;
  // Maximal runs of globally consecutive eigenvalues with gaps below
  // gap_tol * scale.
  std::vector<std::pair<int, int>> clusters;

  double eigenvalue(int rank) const;
  int count() const { return static_cast<int>(order.size()); }
};

EigenDecomposition eigendecompose(const FiberOperator& op, double gap_tol = 1e-6);

// cos(tau * A^{1/2}) per block.  Eigenvalues slightly below zero (within
// 1e-8 * ||A||) are clamped; anything lower is a PSD violation.
std::vector<MatrixXcd> operator_cosine(const EigenDecomposition& decomp, double tau);

// t -> A^{-1/2} sin(t A^{1/2}) evaluated through sinc so the kernel block at
// k = 0 stays finite.
std::vector<MatrixXcd> operator_sinc_sin(const EigenDecomposition& decomp, double t);

// Convolution (multiplication) operator of a coefficient field on the modes
// of a block.  The field must respect the block's decoupling axes.
MatrixXcd convolution_matrix(const CoefficientField& field, const FiberBlock& block);

}  // namespace homog
