#pragma once

// Dense linear-algebra primitives shared by the alignment code.

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kema {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultRegularization = 1e-8;

// Relative asymmetry admitted by the symmetric solvers.
inline constexpr double kSymmetryTolerance = 1e-10;

// Relative size below which eigenvalues of the left side count as zero.
inline constexpr double kLeftNullTolerance = 1e-9;

/// Eigenvalues in ascending order with one unit-norm eigenvector per column.
/// The entry of largest magnitude in every column is positive.
struct EigenPairs {
  Vector values;
  Matrix vectors;

  Index size() const { return values.size(); }
};

void require_finite(const Matrix& m, std::string_view what);

// max |m(i,j) - m(j,i)|
double max_asymmetry(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTolerance);

// Flips column signs so the largest-magnitude entry of each column is positive.
// Ties resolve to the lowest row index.
void apply_sign_convention(Matrix& columns);

EigenPairs symmetric_eigensolve(const Matrix& a);

/// Scale s used by the regularized right-hand side: trace(b)/size, or 1 when
/// the trace vanishes.
double regularization_scale(const Matrix& b);

/// Solves a v = lambda (b + reg*s*I) v for symmetric a, b.
///
/// Inputs are symmetrized, the right side is shifted by reg times its mean
/// diagonal and Cholesky-factored, and the reduced standard problem is solved
/// and back-transformed. Throws NonSymmetric, NotFinite, or
/// SingularAfterRegularization when the shifted right side is not numerically
/// positive definite.
EigenPairs generalized_eigensolve(const Matrix& a, const Matrix& b,
                                  double reg = kDefaultRegularization);

/// Solves a v = lambda b v for symmetric positive semidefinite a and symmetric
/// positive definite b by factoring a. Eigenvalues come from the inverse
/// spectrum b v = theta a v, so the small lambda are resolved to relative
/// accuracy even when b is nearly singular. Eigenvalues of a at or below
/// kLeftNullTolerance times its largest give lambda = 0 pairs, and the rest is
/// solved on their b-orthogonal complement. Pairs with theta <= 0 get
/// lambda = +inf. Ordered by ascending lambda. Throws
/// SingularAfterRegularization when a is indefinite.
EigenPairs left_definite_eigensolve(const Matrix& a, const Matrix& b);

/// ||a v - lambda b v|| / max(||a v||, eps). Callers pass the regularized b.
double pencil_residual(const Matrix& a, const Matrix& b, double lambda, const Vector& v);

/// Moore-Penrose pseudo-inverse from a thin SVD. Singular values below
/// rel_tol * sigma_max are treated as zero.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = 1e-10);

Index numerical_rank(const Matrix& m, double rel_tol);

/// Squared Euclidean distances between the columns of x (d x n) and y (d x m).
Matrix pairwise_sq_distances(const Matrix& x, const Matrix& y);

Matrix block_diagonal(const std::vector<Matrix>& blocks);

}  // namespace kema
