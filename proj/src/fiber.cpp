#include "homog/fiber.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

namespace {

std::vector<bool> combined_active_axes(const FiberBundle& bundle) {
  std::vector<bool> active = bundle.g.active_axes();
  auto merge = [&active](const CoefficientField& f) {
    auto a = f.active_axes();
    for (size_t i = 0; i < active.size(); ++i) active[i] = active[i] || a[i];
  };
  if (bundle.f) merge(*bundle.f);
  if (bundle.Q) merge(*bundle.Q);
  return active;
}

// Enumerate all integer vectors of the box [-N, N]^d grouped into cosets of
// the sublattice spanned by the active axes.
std::vector<std::vector<FreqVec>> coset_modes(int dim, int cutoff,
                                              const std::vector<bool>& active) {
  std::vector<int> inactive;
  for (int a = 0; a < dim; ++a)
    if (!active[a]) inactive.push_back(a);

  std::vector<FreqVec> labels;
  {
    FreqVec lab(inactive.size(), -cutoff);
    while (true) {
      labels.push_back(lab);
      if (lab.empty()) break;
      size_t axis = 0;
      while (axis < lab.size() && ++lab[axis] > cutoff) lab[axis++] = -cutoff;
      if (axis == lab.size()) break;
    }
  }
  // Zero label first so the threshold block is blocks[0].
  std::stable_sort(labels.begin(), labels.end(), [](const FreqVec& a, const FreqVec& b) {
    bool za = is_zero(a), zb = is_zero(b);
    if (za != zb) return za;
    return a < b;
  });

  std::vector<int> act;
  for (int a = 0; a < dim; ++a)
    if (active[a]) act.push_back(a);

  std::vector<std::vector<FreqVec>> out;
  out.reserve(labels.size());
  for (const FreqVec& lab : labels) {
    std::vector<FreqVec> modes;
    FreqVec v(act.size(), -cutoff);
    while (true) {
      FreqVec mode(dim, 0);
      for (size_t i = 0; i < inactive.size(); ++i) mode[inactive[i]] = lab[i];
      for (size_t i = 0; i < act.size(); ++i) mode[act[i]] = v[i];
      modes.push_back(mode);
      if (act.empty()) break;
      size_t axis = 0;
      while (axis < v.size() && ++v[axis] > cutoff) v[axis++] = -cutoff;
      if (axis == v.size()) break;
    }
    out.push_back(std::move(modes));
  }
  return out;
}

void check_aliasing(const CoefficientField& field, int cutoff) {
  if (!field.resolves_cutoff(cutoff))
    throw Error("fiber: field grid too coarse for cutoff (frequencies up to 2*cutoff "
                "must be resolved); refine the field grid");
}

MatrixXcd assemble_plain(const FiberBundle& bundle, const FiberBlock& block) {
  const int n = bundle.b.cols();
  const size_t count = block.modes.size();
  MatrixXcd out(n * count, n * count);
  std::vector<MatrixXcd> bsym(count);
  for (size_t i = 0; i < count; ++i) bsym[i] = bundle.b.at(block.positions[i]);
  for (size_t i = 0; i < count; ++i)
    for (size_t j = 0; j < count; ++j) {
      MatrixXcd g = bundle.g.fourier_at(subtract(block.modes[i], block.modes[j]));
      out.block(n * i, n * j, n, n) = bsym[i].adjoint() * g * bsym[j];
    }
  return hermitize(out);
}

}  // namespace

int FiberOperator::total_dim() const {
  int d = 0;
  for (const auto& b : blocks) d += static_cast<int>(b.matrix.rows());
  return d;
}

double FiberOperator::matrix_norm_estimate() const {
  double v = 0;
  for (const auto& b : blocks) v = std::max(v, b.matrix.cwiseAbs().rowwise().sum().maxCoeff());
  return v;
}

FiberBundle FiberBundle::from_example(const ExampleCase& ex) {
  Lattice lat = ex.lattice_basis.size() > 0 ? Lattice::from_basis(ex.lattice_basis)
                                            : Lattice::cubic(ex.dim);
  FiberBundle bundle{lat, ex.b, ex.g, ex.f, ex.Q};
  return bundle;
}

double FiberBundle::c_star() const {
  double finv = f ? f->inverse_sup_norm() : 1.0;
  return b.alpha0() / (finv * finv * g.inverse_sup_norm());
}

FiberOperator assemble(const FiberBundle& bundle, const VectorXd& k, int cutoff,
                       FiberKind kind) {
  if (cutoff < 1) throw Error("fiber: cutoff must be >= 1");
  if (bundle.b.dim() != bundle.lattice.dim()) throw Error("fiber: dimension mismatch");
  check_aliasing(bundle.g, cutoff);
  if (bundle.f) check_aliasing(*bundle.f, cutoff);
  if (bundle.Q) check_aliasing(*bundle.Q, cutoff);
  if (kind == FiberKind::Sandwiched && !bundle.f)
    throw Error("fiber: sandwiched kind needs an f field");
  if (kind == FiberKind::WeightedMass && !bundle.Q && !bundle.f)
    throw Error("fiber: weighted-mass kind needs Q or f");

  const int d = bundle.lattice.dim();
  FiberOperator op;
  op.k = k;
  op.cutoff = cutoff;
  op.n = bundle.b.cols();
  op.kind = kind;

  for (auto& modes : coset_modes(d, cutoff, combined_active_axes(bundle))) {
    FiberBlock block;
    block.modes = std::move(modes);
    block.positions.reserve(block.modes.size());
    for (const FreqVec& m : block.modes)
      block.positions.push_back(bundle.lattice.dual_vector(m) + k);
    block.matrix = assemble_plain(bundle, block);
    if (kind == FiberKind::Sandwiched) {
      MatrixXcd F = convolution_matrix(*bundle.f, block);
      block.matrix = hermitize(F.adjoint() * block.matrix * F);
    } else if (kind == FiberKind::WeightedMass) {
      CoefficientField q = bundle.Q ? *bundle.Q
                                    : [&] {
                                        // Q = (f f*)^{-1}
                                        auto f = *bundle.f;
                                        return CoefficientField::from_closure(
                                            f.dim(), f.rows(), f.rows(),
                                            [f](const VectorXd& frac) {
                                              MatrixXcd v = f.sample(frac);
                                              return (v * v.adjoint()).inverse().eval();
                                            },
                                            std::max(f.grid_size(), 257),
                                            FieldFlags{true, true, false, false});
                                      }();
      block.mass = hermitize(convolution_matrix(q, block));
    }
    op.blocks.push_back(std::move(block));
  }
  return op;
}

FiberOperator effective_fiber(const MatrixXcd& g0, const BlochSymbol& b, const Lattice& lat,
                              const VectorXd& k, int cutoff,
                              const std::optional<MatrixXcd>& f0, const FiberOperator* like) {
  if (hermiticity_defect(g0) > 1e-10 || min_eigenvalue(hermitize(g0)) <= 0)
    throw Error("effective_fiber: g0 must be Hermitian positive definite");

  FiberOperator op;
  op.k = k;
  op.cutoff = cutoff;
  op.n = b.cols();
  op.kind = FiberKind::Effective;

  std::vector<std::vector<FreqVec>> mode_sets;
  if (like) {
    for (const auto& blk : like->blocks) mode_sets.push_back(blk.modes);
  } else {
    mode_sets = coset_modes(lat.dim(), cutoff, std::vector<bool>(lat.dim(), false));
  }

  const int n = b.cols();
  for (auto& modes : mode_sets) {
    FiberBlock block;
    block.modes = std::move(modes);
    block.positions.reserve(block.modes.size());
    for (const FreqVec& m : block.modes) block.positions.push_back(lat.dual_vector(m) + k);
    block.matrix = MatrixXcd::Zero(n * block.modes.size(), n * block.modes.size());
    for (size_t i = 0; i < block.modes.size(); ++i) {
      MatrixXcd bs = b.at(block.positions[i]);
      MatrixXcd cell = bs.adjoint() * g0 * bs;
      if (f0) cell = f0->adjoint() * cell * (*f0);
      block.matrix.block(n * i, n * i, n, n) = hermitize(cell);
    }
    op.blocks.push_back(std::move(block));
  }
  return op;
}

VectorXd smoothing_weights(const FiberBlock& block, int n, double eps, double s) {
  if (eps <= 0 || s < 0) throw Error("smoothing: need eps > 0 and s >= 0");
  VectorXd w(n * block.modes.size());
  for (size_t i = 0; i < block.modes.size(); ++i) {
    double p2 = block.positions[i].squaredNorm();
    double v = std::pow(eps, s) * std::pow(p2 + eps * eps, -0.5 * s);
    for (int c = 0; c < n; ++c) w(n * i + c) = v;
  }
  return w;
}

double EigenDecomposition::eigenvalue(int rank) const {
  auto [bi, idx] = order[rank];
  return blocks[bi].eigenvalues(idx);
}

EigenDecomposition eigendecompose(const FiberOperator& op, double gap_tol) {
  EigenDecomposition out;
  out.op = &op;
  out.blocks.reserve(op.blocks.size());
  for (const auto& blk : op.blocks) {
    BlockEigen be;
    if (op.kind == FiberKind::WeightedMass) {
      Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(blk.matrix, blk.mass);
      if (es.info() != Eigen::Success) throw Error("eigendecompose: solver did not converge");
      be.eigenvalues = es.eigenvalues();
      be.vectors = es.eigenvectors();
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(blk.matrix);
      if (es.info() != Eigen::Success) throw Error("eigendecompose: solver did not converge");
      be.eigenvalues = es.eigenvalues();
      be.vectors = es.eigenvectors();
    }
    out.blocks.push_back(std::move(be));
  }
  for (int bi = 0; bi < static_cast<int>(out.blocks.size()); ++bi)
    for (int j = 0; j < out.blocks[bi].eigenvalues.size(); ++j) out.order.emplace_back(bi, j);
  std::sort(out.order.begin(), out.order.end(),
            [&out](const std::pair<int, int>& a, const std::pair<int, int>& b) {
              double va = out.blocks[a.first].eigenvalues(a.second);
              double vb = out.blocks[b.first].eigenvalues(b.second);
              if (va != vb) return va < vb;
              return a < b;
            });

  if (!out.order.empty()) {
    double top = std::abs(out.eigenvalue(out.count() - 1));
    double scale = std::max(top, 1e-300);
    int start = 0;
    for (int i = 1; i <= out.count(); ++i) {
      if (i == out.count() || out.eigenvalue(i) - out.eigenvalue(i - 1) >= gap_tol * scale) {
        out.clusters.emplace_back(start, i - 1);
        start = i;
      }
    }
  }
  return out;
}

namespace {

std::vector<MatrixXcd> matrix_function(const EigenDecomposition& decomp,
                                       const std::function<double(double)>& fn) {
  double norm = 0;
  for (const auto& be : decomp.blocks)
    if (be.eigenvalues.size() > 0)
      norm = std::max(norm, std::max(std::abs(be.eigenvalues.minCoeff()),
                                     std::abs(be.eigenvalues.maxCoeff())));
  const double clamp = 1e-8 * norm;
  std::vector<MatrixXcd> out;
  out.reserve(decomp.blocks.size());
  for (const auto& be : decomp.blocks) {
    VectorXd vals = be.eigenvalues;
    for (int i = 0; i < vals.size(); ++i) {
      if (vals(i) < 0) {
        if (vals(i) < -clamp)
          throw Error("operator function: negative eigenvalue beyond the PSD clamp");
        vals(i) = 0;
      }
      vals(i) = fn(vals(i));
    }
    out.push_back(be.vectors * vals.asDiagonal() * be.vectors.adjoint());
  }
  return out;
}

}  // namespace

std::vector<MatrixXcd> operator_cosine(const EigenDecomposition& decomp, double tau) {
  if (tau == 0.0) {
    // exact identity, not V V* up to roundoff
    std::vector<MatrixXcd> out;
    out.reserve(decomp.blocks.size());
    for (const auto& be : decomp.blocks)
      out.push_back(MatrixXcd::Identity(be.vectors.rows(), be.vectors.rows()));
    return out;
  }
  return matrix_function(decomp,
                         [tau](double lam) { return std::cos(tau * std::sqrt(lam)); });
}

std::vector<MatrixXcd> operator_sinc_sin(const EigenDecomposition& decomp, double t) {
  return matrix_function(decomp, [t](double lam) {
    double w = std::sqrt(lam);
    double x = t * w;
    if (std::abs(x) < 1e-8) return t * (1.0 - x * x / 6.0);
    return std::sin(x) / w;
  });
}

MatrixXcd convolution_matrix(const CoefficientField& field, const FiberBlock& block) {
  const int r = field.rows(), c = field.cols();
  const size_t count = block.modes.size();
  MatrixXcd out(r * count, c * count);
  for (size_t i = 0; i < count; ++i)
    for (size_t j = 0; j < count; ++j)
      out.block(r * i, c * j, r, c) = field.fourier_at(subtract(block.modes[i], block.modes[j]));
  return out;
}

}  // namespace homog
