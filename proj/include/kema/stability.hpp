#pragma once

#include <optional>

#include "kema/align.hpp"
#include "kema/linalg.hpp"

namespace kema {

struct BoundsReport {
  Index m = 0;
  double delta = 0.0;
  Index n = 0;
  double radius = 0.0;
  bool normalized = false;
  // descending
  Vector empirical_eigenvalues;
  double lower_residual = 0.0;
  double upper_residual = 0.0;
  double lower_projection = 0.0;
  double upper_projection = 0.0;
};

/// (A + reg*s*I)^{-1} B for A = K (L + mu Ls) K and B = K Ld K, with s the
/// mean diagonal of A. reg = 0 inverts A as is.
Matrix compute_kstar(const Matrix& k, const Matrix& l, const Matrix& ls, const Matrix& ld,
                     double mu, double reg = kDefaultRegularization);

/// Same, with K, L, Ls and Ld assembled from the problem's datasets and kernels.
Matrix compute_kstar(const AlignmentProblem& problem);

/// Evaluates both displayed inequalities of the stability theorem.
/// Empirical eigenvalues come from the symmetric part of kstar (divided by n
/// when normalize is set). The process eigenvalues of the left-hand sums are
/// unobservable; they are replaced by the plug-in estimates lambda_hat / n.
/// radius defaults to max_i sqrt(max(K*_ii, 0)).
BoundsReport spectral_bounds(const Matrix& kstar, Index m, double delta,
                             std::optional<double> radius = std::nullopt,
                             bool normalize = false);

}  // namespace kema
