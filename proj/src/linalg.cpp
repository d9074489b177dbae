#include "kema/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kema/errors.hpp"

namespace kema {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NotFinite, std::string(what) + " contains NaN or Inf");
  }
}

double max_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
  return max_asymmetry(m) <= rel_tol * scale;
}

void apply_sign_convention(Matrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (columns.rows() > 0 && columns(best, j) < 0.0) columns.col(j) *= -1.0;
  }
}

namespace {

void check_square_symmetric(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is not square");
  }
  require_finite(m, what);
  if (!is_symmetric(m)) {
    throw Error(ErrorCode::NonSymmetric,
                std::string(what) + " asymmetry " + std::to_string(max_asymmetry(m)));
  }
}

void normalize_columns(Matrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    const double n = v.col(j).norm();
    if (n > 0.0) v.col(j) /= n;
  }
}

}  // namespace

EigenPairs symmetric_eigensolve(const Matrix& a) {
  check_square_symmetric(a, "matrix");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotFinite, "symmetric eigensolver did not converge");
  }
  EigenPairs out{solver.eigenvalues(), solver.eigenvectors()};
  apply_sign_convention(out.vectors);
  return out;
}

double regularization_scale(const Matrix& b) {
  if (b.rows() == 0) return 1.0;
  const double tr = b.trace();
  return tr == 0.0 ? 1.0 : tr / static_cast<double>(b.rows());
}

EigenPairs generalized_eigensolve(const Matrix& a, const Matrix& b, double reg) {
  check_square_symmetric(a, "left matrix");
  check_square_symmetric(b, "right matrix");
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "pencil matrices differ in size");
  }
  if (!(reg >= 0.0) || !std::isfinite(reg)) {
    throw Error(ErrorCode::InvalidArgument, "regularization must be a nonnegative finite number");
  }
  const Index n = a.rows();
  if (n == 0) return {};

  const Matrix a_sym = 0.5 * (a + a.transpose());
  Matrix b_reg = 0.5 * (b + b.transpose());
  b_reg.diagonal().array() += reg * regularization_scale(b);

  Eigen::LLT<Matrix> chol(b_reg);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularAfterRegularization,
                "right side is not positive definite; raise the regularization");
  }
  const Matrix& lower = chol.matrixLLT();
  const Vector pivots = lower.diagonal();
  const double max_pivot = pivots.maxCoeff();
  const double min_pivot = pivots.minCoeff();
  // pivot ratio bounds sqrt(cond(b_reg)); beyond this the reduction is noise
  if (!(min_pivot > 0.0) ||
      min_pivot < std::sqrt(static_cast<double>(n) * std::numeric_limits<double>::epsilon()) *
                      max_pivot * 1e-4) {
    throw Error(ErrorCode::SingularAfterRegularization,
                "right side is numerically singular; raise the regularization");
  }

  // C = L^{-1} A L^{-T}
  Matrix c = chol.matrixL().solve(a_sym);
  c = chol.matrixL().solve(c.transpose()).eval();
  c = 0.5 * (c + c.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotFinite, "reduced eigenproblem did not converge");
  }
  Matrix v = chol.matrixU().solve(solver.eigenvectors());
  normalize_columns(v);
  apply_sign_convention(v);
  return {solver.eigenvalues(), std::move(v)};
}

namespace {

EigenPairs left_definite_core(const Matrix& a, const Matrix& b) {
  const Index n = a.rows();
  Eigen::LLT<Matrix> chol(a);
  if (chol.info() != Eigen::Success || !(chol.matrixLLT().diagonal().minCoeff() > 0.0)) {
    throw Error(ErrorCode::SingularAfterRegularization, "left side is not positive definite");
  }
  Matrix c = chol.matrixL().solve(b);
  c = chol.matrixL().solve(c.transpose()).eval();
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotFinite, "reduced eigenproblem did not converge");
  }
  // theta ascending, so reversed order gives lambda ascending
  const Vector theta = solver.eigenvalues().reverse();
  Matrix v = chol.matrixU().solve(solver.eigenvectors().rowwise().reverse());
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) {
    lambda(i) = theta(i) > 0.0 ? 1.0 / theta(i) : std::numeric_limits<double>::infinity();
  }
  return {std::move(lambda), std::move(v)};
}

}  // namespace

EigenPairs left_definite_eigensolve(const Matrix& a, const Matrix& b) {
  check_square_symmetric(a, "left matrix");
  check_square_symmetric(b, "right matrix");
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "pencil matrices differ in size");
  }
  const Index n = a.rows();
  if (n == 0) return {};
  const Matrix as = 0.5 * (a + a.transpose());
  const Matrix bs = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> spec(as);
  if (spec.info() != Eigen::Success) {
    throw Error(ErrorCode::NotFinite, "left side eigenproblem did not converge");
  }
  const double top = spec.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0.0) || spec.eigenvalues()(0) < -kLeftNullTolerance * top) {
    throw Error(ErrorCode::SingularAfterRegularization, "left side is not positive semidefinite");
  }
  Index k = 0;
  while (k < n && spec.eigenvalues()(k) <= kLeftNullTolerance * top) ++k;

  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (k == 0) {
    out = left_definite_core(as, bs);
  } else {
    // Null directions of a are eigenvectors with lambda = 0. The others are
    // b-orthogonal to them, so the rest is solved on that complement.
    const Matrix z = spec.eigenvectors().leftCols(k);
    const Matrix full = Eigen::HouseholderQR<Matrix>(bs * z).householderQ();
    const Matrix q = full.rightCols(n - k);
    const Matrix aq = q.transpose() * as * q;
    const Matrix bq = q.transpose() * bs * q;
    EigenPairs rest = left_definite_core(0.5 * (aq + aq.transpose()), 0.5 * (bq + bq.transpose()));
    out.values.head(k).setZero();
    out.values.tail(n - k) = rest.values;
    out.vectors.leftCols(k) = z;
    out.vectors.rightCols(n - k) = q * rest.vectors;
  }
  normalize_columns(out.vectors);
  apply_sign_convention(out.vectors);
  return out;
}

double pencil_residual(const Matrix& a, const Matrix& b, double lambda, const Vector& v) {
  const Vector av = a * v;
  const double denom = std::max(av.norm(), std::numeric_limits<double>::epsilon());
  return (av - lambda * (b * v)).norm() / denom;
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
  if (m.size() == 0) throw Error(ErrorCode::InvalidArgument, "pseudo-inverse of an empty matrix");
  require_finite(m, "pseudo-inverse input");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "pseudo-inverse tolerance must lie in (0, 1)");
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

Matrix pairwise_sq_distances(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "point sets have dimensions " + std::to_string(x.rows()) + " and " +
                    std::to_string(y.rows()));
  }
  Matrix out(x.cols(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < x.cols(); ++i) {
      double acc = 0.0;
      for (Index d = 0; d < x.rows(); ++d) {
        const double diff = x(d, i) - y(d, j);
        acc += diff * diff;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace kema
