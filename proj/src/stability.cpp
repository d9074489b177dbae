#include "kema/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kema/errors.hpp"

namespace kema {

Matrix compute_kstar(const Matrix& k, const Matrix& l, const Matrix& ls, const Matrix& ld,
                     double mu, double reg) {
  const Index n = k.rows();
  if (k.cols() != n || l.rows() != n || l.cols() != n || ls.rows() != n || ls.cols() != n ||
      ld.rows() != n || ld.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "stability inputs must be n x n");
  }
  if (!(reg >= 0.0)) throw Error(ErrorCode::InvalidArgument, "regularization must be nonnegative");
  Matrix a = k * (l + mu * ls) * k;
  a = 0.5 * (a + a.transpose()).eval();
  const Matrix b = k * ld * k;
  a.diagonal().array() += reg * regularization_scale(a);
  Eigen::LLT<Matrix> chol(a);
  bool ok = chol.info() == Eigen::Success;
  if (ok) {
    const Vector piv = chol.matrixLLT().diagonal();
    ok = piv.minCoeff() > 1e-12 * piv.maxCoeff();
  }
  if (!ok) {
    throw Error(ErrorCode::SingularAfterRegularization,
                "K (L + mu Ls) K is singular; raise the regularization");
  }
  return chol.solve(b);
}

Matrix compute_kstar(const AlignmentProblem& p) {
  validate_problem(p, true);
  const auto kernels = resolve_kernels(p.kernels, p.datasets, p.sigma_scope);
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < p.datasets.size(); ++i) {
    const auto& x = p.datasets[i].features;
    blocks.push_back(kernel_matrix(kernels[i], x, x));
  }
  const JointGraphs g = build_joint_graphs(p.datasets, p.graph);
  return compute_kstar(block_diagonal(blocks), g.l, g.ls, g.ld, p.mu, p.reg);
}

BoundsReport spectral_bounds(const Matrix& kstar, Index m, double delta,
                             std::optional<double> radius, bool normalize) {
  if (kstar.rows() != kstar.cols() || kstar.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "K* must be square and nonempty");
  }
  require_finite(kstar, "K*");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidConfidence, "delta must lie in (0, 1)");
  }
  const Index n = kstar.rows();
  if (m < 1 || m > n) {
    throw Error(ErrorCode::InvalidSubspaceDim,
                "m must lie in [1, " + std::to_string(n) + "], got " + std::to_string(m));
  }
  if (radius && !(*radius >= 0.0 && std::isfinite(*radius))) {
    throw Error(ErrorCode::InvalidArgument, "radius must be nonnegative");
  }
  const double nd = static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (kstar + kstar.transpose()),
                                           Eigen::EigenvaluesOnly);
  Vector lam = es.eigenvalues().reverse();
  if (normalize) lam /= nd;

  BoundsReport r;
  r.m = m;
  r.delta = delta;
  r.n = n;
  r.normalized = normalize;
  r.empirical_eigenvalues = lam;
  const Vector diag = kstar.diagonal();
  if (radius) {
    r.radius = *radius;
  } else {
    r.radius = std::sqrt(std::max(diag.maxCoeff(), 0.0));
  }
  const double r2 = r.radius * r.radius;

  // prefix(l) = sum_{j<=l} lambda_hat_j
  Vector prefix = Vector::Zero(n + 1);
  for (Index j = 0; j < n; ++j) prefix(j + 1) = prefix(j) + lam(j);
  const double total = prefix(n);
  const double diag_term = std::sqrt(2.0 / nd * diag.squaredNorm());

  double best_res = std::numeric_limits<double>::infinity();
  double best_proj = -std::numeric_limits<double>::infinity();
  for (Index l = 1; l <= m; ++l) {
    const double dev = (1.0 + std::sqrt(static_cast<double>(l))) / std::sqrt(nd) * diag_term;
    best_res = std::min(best_res, (total - prefix(l)) / nd + dev);
    best_proj = std::max(best_proj, prefix(l) / nd - dev);
  }
  r.upper_residual = best_res + r2 * std::sqrt(18.0 / nd * std::log(2.0 * nd / delta));
  r.upper_projection = best_proj - r2 * std::sqrt(19.0 / nd * std::log(2.0 * (nd + 1.0) / delta));
  r.lower_residual = (total - prefix(m)) / nd;
  r.lower_projection = prefix(m) / nd;
  return r;
}

}  // namespace kema
