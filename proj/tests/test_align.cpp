#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "kema/align.hpp"
#include "kema/errors.hpp"

using namespace kema;
using kema::test::max_abs;

namespace {

AlignmentProblem blob_problem(std::uint64_t seed, int per_class = 6, int unlabeled = 8) {
  std::mt19937_64 rng(seed);
  AlignmentProblem p;
  p.datasets = {test::blob_domain(3, per_class, unlabeled, 3, rng, "1"),
                test::blob_domain(4, per_class, unlabeled, 3, rng, "2")};
  p.graph.k = 4;
  return p;
}

// Stacked latent training coordinates, m x n.
Matrix stacked(const AlignmentModel& m, const AlignmentProblem& p) {
  Index n = 0;
  for (const auto& d : p.datasets) n += d.size();
  Matrix z(m.num_features(), n);
  Index off = 0;
  for (std::size_t d = 0; d < p.datasets.size(); ++d) {
    z.middleCols(off, p.datasets[d].size()) = project(m, d, p.datasets[d].features);
    off += p.datasets[d].size();
  }
  return z;
}

// Component c is separated from its neighbors by a relative gap above 1e-6.
bool isolated(const Vector& ev, Index c) {
  const double tol = 1e-6 * std::max(1.0, std::abs(ev(c)));
  return (c == 0 || ev(c) - ev(c - 1) > tol) && (c + 1 == ev.size() || ev(c + 1) - ev(c) > tol);
}

// Max deviation of row c of b from row c of a, up to sign.
double row_deviation(const Matrix& a, const Matrix& b, Index c) {
  const double sign = a.row(c).dot(b.row(c)) >= 0.0 ? 1.0 : -1.0;
  return (a.row(c) - sign * b.row(c)).cwiseAbs().maxCoeff();
}

double pearson(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean(), bc = b.array() - b.mean();
  return ac.dot(bc) / (ac.norm() * bc.norm());
}

}  // namespace

TEST_CASE("SSMA agrees with an independently assembled dense pencil") {
  // two 2-D domains with 4 samples each, two classes
  DomainDataset a, b;
  a.domain_id = "1";
  b.domain_id = "2";
  a.features.resize(2, 4);
  a.features << 0.0, 0.2, 1.0, 1.1, 0.1, -0.1, 1.0, 0.8;
  a.labels = {1, 1, 2, 0};
  b.features.resize(2, 4);
  b.features << 2.0, 2.3, -1.0, -1.2, 0.5, 0.1, 0.4, 1.0;
  b.labels = {1, 0, 2, 2};
  AlignmentProblem p;
  p.datasets = {a, b};
  p.graph.k = 2;
  const AlignmentModel m = fit_ssma(p);

  // oracle: graphs by definition, block Z, then a dense generalized solver
  const Index n = 8;
  std::vector<int> lab = {1, 1, 2, 0, 1, 0, 2, 2};
  Matrix x[2] = {a.features, b.features};
  Matrix w = Matrix::Zero(n, n), ws = Matrix::Zero(n, n), wd = Matrix::Zero(n, n);
  for (int d = 0; d < 2; ++d) {
    for (Index i = 0; i < 4; ++i) {
      std::vector<std::pair<double, Index>> dist;
      for (Index j = 0; j < 4; ++j)
        if (j != i) dist.emplace_back((x[d].col(i) - x[d].col(j)).squaredNorm(), j);
      std::sort(dist.begin(), dist.end());
      for (int t = 0; t < 2; ++t) {
        w(4 * d + i, 4 * d + dist[t].second) = 1.0;
        w(4 * d + dist[t].second, 4 * d + i) = 1.0;
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j || lab[i] == 0 || lab[j] == 0) continue;
      (lab[i] == lab[j] ? ws : wd)(i, j) = 1.0;
    }
  }
  auto lap = [](const Matrix& g) {
    Matrix l = -g;
    l.diagonal() += g.rowwise().sum();
    return l;
  };
  Matrix z = Matrix::Zero(4, n);
  z.block(0, 0, 2, 4) = a.features;
  z.block(2, 4, 2, 4) = b.features;
  const Matrix lhs = z * (lap(w) + lap(ws)) * z.transpose();
  Matrix rhs = z * lap(wd) * z.transpose();
  rhs.diagonal().array() += p.reg * rhs.trace() / 4.0;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ref(lhs, rhs);
  std::vector<double> expect;
  for (Index i = 0; i < 4; ++i)
    if (ref.eigenvalues()(i) >= 1e-9 * std::max(std::abs(ref.eigenvalues()(i)), 1.0))
      expect.push_back(ref.eigenvalues()(i));
  REQUIRE(m.num_features() == static_cast<Index>(expect.size()));
  for (Index i = 0; i < m.num_features(); ++i) {
    CHECK(std::abs(m.eigenvalues(i) - expect[i]) <= 1e-8 * std::max(1.0, std::abs(expect[i])));
  }
  CHECK(m.diagnostics.max_residual <= 1e-8);
}

TEST_CASE("identical domains align same-class pairs closer") {
  std::mt19937_64 rng(4);
  DomainDataset a = test::blob_domain(3, 8, 10, 3, rng, "1");
  DomainDataset b = a;
  b.domain_id = "2";
  AlignmentProblem p;
  p.datasets = {a, b};
  p.graph.k = 4;
  const AlignmentModel m = fit_ssma(p);
  const Matrix za = project(m, 0, a.features), zb = project(m, 1, b.features);
  double same = 0.0, diff = 0.0;
  int ns = 0, nd = 0;
  for (Index i = 0; i < a.size(); ++i) {
    for (Index j = 0; j < b.size(); ++j) {
      if (a.labels[i] == 0 || b.labels[j] == 0) continue;
      const double d = (za.col(i) - zb.col(j)).norm();
      if (a.labels[i] == b.labels[j]) {
        same += d;
        ++ns;
      } else {
        diff += d;
        ++nd;
      }
    }
  }
  CHECK(same / ns < diff / nd);
}

TEST_CASE("feature count errors") {
  AlignmentProblem p = blob_problem(1);
  p.num_features = 8;
  try {
    fit_ssma(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  const AlignmentModel full = fit_ssma({p.datasets, {}, p.graph});
  p.num_features = static_cast<int>(full.num_features()) + 1;
  if (p.num_features <= 7) {
    try {
      fit_ssma(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooFewNonzeroEigenvalues);
    }
  }
}

TEST_CASE("linear KEMA matches SSMA") {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    AlignmentProblem p = blob_problem(seed);
    const AlignmentModel s = fit_ssma(p);
    p.kernels = {KernelSpec::linear(), KernelSpec::linear()};
    const AlignmentModel k = fit_kema(p);
    REQUIRE(s.num_features() == k.num_features());
    for (Index c = 0; c < s.num_features(); ++c) {
      CHECK(std::abs(s.eigenvalues(c) - k.eigenvalues(c)) <= 1e-6 * std::abs(s.eigenvalues(c)));
    }
    const Matrix zs = stacked(s, p), zk = stacked(k, p);
    for (Index c = 0; c < s.num_features(); ++c) {
      const bool gap_before = c == 0 || s.eigenvalues(c) - s.eigenvalues(c - 1) > 1e-6 * s.eigenvalues(c);
      const bool gap_after = c + 1 == s.num_features() ||
                             s.eigenvalues(c + 1) - s.eigenvalues(c) > 1e-6 * s.eigenvalues(c);
      if (gap_before && gap_after) CHECK(std::abs(pearson(zs.row(c), zk.row(c))) >= 1.0 - 1e-6);
    }
  }
}

TEST_CASE("single class labels leave no dissimilarity") {
  AlignmentProblem p = blob_problem(5);
  for (auto& d : p.datasets)
    for (auto& l : d.labels)
      if (l != 0) l = 1;
  p.kernels = {KernelSpec::rbf(), KernelSpec::rbf()};
  p.kernels[0].sigma = 1.0;
  p.kernels[1].sigma = 1.0;
  try {
    fit_kema(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularAfterRegularization);
  }
}

TEST_CASE("REKEMA with every sample reproduces KEMA") {
  AlignmentProblem p = blob_problem(6);
  p.kernels = {KernelSpec::rbf(), KernelSpec::rbf()};
  const AlignmentModel k = fit_kema(p);
  std::vector<std::vector<Index>> all;
  for (const auto& d : p.datasets) {
    all.emplace_back(d.size());
    std::iota(all.back().begin(), all.back().end(), Index{0});
  }
  const AlignmentModel r = fit_rekema(p, all);
  REQUIRE(r.num_features() == k.num_features());
  CHECK(r.mode == AlignmentMode::Reduced);
  for (Index c = 0; c < k.num_features(); ++c) {
    CHECK(std::abs(r.eigenvalues(c) - k.eigenvalues(c)) <= 1e-10 * std::abs(k.eigenvalues(c)));
  }
  // eigenvectors of repeated eigenvalues are only fixed up to a rotation
  const Matrix zr = stacked(r, p), zk = stacked(k, p);
  int compared = 0;
  for (Index c = 0; c < k.num_features(); ++c) {
    if (!isolated(k.eigenvalues, c)) continue;
    CHECK(row_deviation(zk, zr, c) <= 1e-8);
    ++compared;
  }
  CHECK(compared >= 3);
}

TEST_CASE("REKEMA with every sample in another order") {
  AlignmentProblem p = blob_problem(6);
  p.kernels = {KernelSpec::rbf(), KernelSpec::rbf()};
  const AlignmentModel k = fit_kema(p);
  std::vector<std::vector<Index>> rev;
  for (const auto& d : p.datasets) {
    rev.emplace_back(d.size());
    std::iota(rev.back().rbegin(), rev.back().rend(), Index{0});
  }
  // the rectangular path factors K_nr by SVD instead of an eigensolve
  const AlignmentModel r = fit_rekema(p, rev);
  REQUIRE(r.num_features() == k.num_features());
  CHECK(r.diagnostics.max_residual <= 1e-8);
  for (Index c = 0; c < k.num_features(); ++c) {
    CHECK(std::abs(r.eigenvalues(c) - k.eigenvalues(c)) <= 1e-8 * std::abs(k.eigenvalues(c)));
  }
}

TEST_CASE("REKEMA subset and representative selection") {
  AlignmentProblem p = blob_problem(7, 10, 20);
  p.kernels = {KernelSpec::rbf(), KernelSpec::rbf()};
  const auto reps = select_representatives(p.datasets, 0.25, 3);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].size() == 12);
  CHECK(std::is_sorted(reps[0].begin(), reps[0].end()));
  CHECK(select_representatives(p.datasets, 0.25, 3) == reps);
  CHECK(select_representatives(p.datasets, 0.001, 3)[1].size() == 1);
  const AlignmentModel r = fit_rekema(p, reps);
  CHECK(r.domains[0].retained.cols() == 12);
  CHECK(r.diagnostics.max_residual <= 1e-8);
  CHECK(r.num_features() <= 24);
  CHECK_THROWS_AS(fit_rekema(p, {{}, reps[1]}), Error);
}

TEST_CASE("projection of training data") {
  AlignmentProblem p = blob_problem(8);
  p.kernels = {KernelSpec::rbf(), KernelSpec::linear()};
  const AlignmentModel m = fit_kema(p);
  for (std::size_t d = 0; d < 2; ++d) {
    const DomainBlock& b = m.domains[d];
    const Matrix k = kernel_matrix(b.kernel, b.retained, p.datasets[d].features);
    const Matrix direct = b.coefficients.transpose() * k;
    CHECK(max_abs(project(m, d, p.datasets[d].features) - direct) <= 1e-12);
  }
  // unit-norm training latent coordinates
  const Matrix z = stacked(m, p);
  for (Index c = 0; c < m.num_features(); ++c) CHECK(z.row(c).norm() == doctest::Approx(1.0).epsilon(1e-8));

  const AlignmentModel s = fit_ssma(p);
  CHECK(project(s, 0, Matrix::Zero(3, 1)).isZero());
  CHECK_THROWS_AS(project(s, std::string("9"), Matrix::Zero(3, 1)), Error);
  CHECK_THROWS_AS(project(s, 0, Matrix::Zero(2, 1)), Error);
}

TEST_CASE("out-of-sample point between two training points") {
  AlignmentProblem p = blob_problem(9);
  p.kernels = {KernelSpec::rbf(), KernelSpec::rbf()};
  const AlignmentModel m = fit_kema(p);
  const Matrix& x = p.datasets[0].features;
  const Vector mid = 0.5 * (x.col(0) + x.col(1));
  const Matrix zm = project(m, 0, mid);
  // direct formula: alpha^T k(X, x)
  const double s = *m.domains[0].kernel.sigma;
  Vector kx(x.cols());
  for (Index j = 0; j < x.cols(); ++j) kx(j) = std::exp(-(x.col(j) - mid).squaredNorm() / (2 * s * s));
  const double scale = (m.domains[0].coefficients.cwiseAbs().transpose() * kx).maxCoeff();
  CHECK(max_abs(zm - m.domains[0].coefficients.transpose() * kx) <= 1e-12 * scale);
  // columns are projected independently
  Matrix both(x.rows(), 2);
  both << mid, x.col(1);
  CHECK(max_abs(project(m, 0, both).col(0) - zm.col(0)) <= 1e-12 * scale);
}

TEST_CASE("inversion round trip on the same domain") {
  AlignmentProblem p = blob_problem(10);
  const AlignmentModel s = fit_ssma(p);
  for (std::size_t d = 0; d < 2; ++d) {
    const Matrix& x = p.datasets[d].features;
    InversionOptions o;
    o.num_features = static_cast<int>(s.num_features());
    const InversionResult r = invert(s, d, d, x, o);
    CHECK(!r.rank_deficient);
    CHECK(max_abs(r.reconstruction - x) <= 1e-6 * max_abs(x));
  }
  p.kernels = {KernelSpec::linear(), KernelSpec::rbf()};
  const AlignmentModel k = fit_kema(p);
  const InversionResult r = invert(k, 1, 0, p.datasets[1].features);
  CHECK(r.reconstruction.rows() == 3);
  CHECK(r.reconstruction.cols() == p.datasets[1].size());
  try {
    invert(k, 0, 1, p.datasets[0].features);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TargetKernelNotLinear);
  }
}

TEST_CASE("order invariance within a domain") {
  AlignmentProblem p = blob_problem(11);
  p.kernels = {KernelSpec::rbf(1.5), KernelSpec::rbf(1.5)};
  const AlignmentModel m = fit_kema(p);
  const Matrix z = project(m, 0, p.datasets[0].features);

  AlignmentProblem q = p;
  const Index n = p.datasets[0].size();
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::reverse(perm.begin(), perm.end());
  q.datasets[0] = select_columns(p.datasets[0], perm);
  const AlignmentModel mq = fit_kema(q);
  const Matrix zq = project(mq, 0, q.datasets[0].features);
  REQUIRE(m.num_features() == mq.num_features());
  for (Index c = 0; c < m.num_features(); ++c) {
    CHECK(std::abs(m.eigenvalues(c) - mq.eigenvalues(c)) <= 1e-8 * m.eigenvalues(c));
  }
  // leading non-degenerate component, up to sign
  Index c0 = 0;
  while (c0 < m.num_features() && !isolated(m.eigenvalues, c0)) ++c0;
  REQUIRE(c0 < m.num_features());
  Matrix back(1, n);
  for (Index j = 0; j < n; ++j) back(0, perm[j]) = zq(c0, j);
  CHECK(row_deviation(z.row(c0), back, 0) <= 1e-6);
}

TEST_CASE("Rayleigh quotients follow the returned order") {
  for (AlignmentMode mode : {AlignmentMode::Primal, AlignmentMode::Dual}) {
    AlignmentProblem p = blob_problem(12);
    p.kernels = {KernelSpec::rbf(), KernelSpec::rbf()};
    const SolvedPencil sp = solved_pencil(p, mode);
    const AlignmentModel m = mode == AlignmentMode::Primal ? fit_ssma(p) : fit_kema(p);
    CHECK(m.diagnostics.max_residual <= 1e-8);
    for (Index c = 1; c < m.num_features(); ++c) CHECK(m.eigenvalues(c) >= m.eigenvalues(c - 1));
    CHECK(sp.a.rows() == sp.b.rows());
  }
}

TEST_CASE("mode strings and validation") {
  CHECK(parse_mode("dual") == AlignmentMode::Dual);
  CHECK(to_string(AlignmentMode::Reduced) == "reduced");
  CHECK_THROWS_AS(parse_mode("x"), Error);
  AlignmentProblem p = blob_problem(13);
  CHECK_THROWS_AS(fit_kema(p), Error);  // no kernels
  p.mu = -1.0;
  CHECK_THROWS_AS(fit_ssma(p), Error);
}
