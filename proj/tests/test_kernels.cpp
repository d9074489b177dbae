#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "kema/errors.hpp"
#include "kema/kernels.hpp"

using namespace kema;
using kema::test::max_abs;

namespace {

DomainDataset labeled(const Matrix& x, const std::string& id = "1") {
  DomainDataset ds;
  ds.features = x;
  ds.labels.assign(x.cols(), 1);
  ds.domain_id = id;
  return ds;
}

Matrix random_histograms(Index d, Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix h(d, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) h(i, j) = u(rng) < 0.2 ? 0.0 : u(rng);
    h.col(j) /= std::max(h.col(j).sum(), 1e-12);
  }
  return h;
}

}  // namespace

TEST_CASE("kernel examples") {
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK(max_abs(kernel_matrix(KernelSpec::linear(), i2, i2) - i2) == 0.0);

  std::mt19937_64 rng(1);
  const Matrix x = test::random_matrix(3, 10, rng);
  const Matrix k = kernel_matrix(KernelSpec::rbf(1.0), x, x);
  for (Index i = 0; i < 10; ++i) CHECK(k(i, i) == 1.0);
  for (Index i = 0; i < 10; ++i) {
    for (Index j = 0; j < 10; ++j) {
      double s = 0.0;
      for (Index d = 0; d < 3; ++d) s += (x(d, i) - x(d, j)) * (x(d, i) - x(d, j));
      CHECK(std::abs(k(i, j) - std::exp(-s / 2.0)) < 1e-12);
    }
  }

  Matrix h(2, 2);
  h << 0.2, 0.5, 0.8, 0.5;
  const Matrix hik = kernel_matrix(KernelSpec::histogram_intersection(), h.col(0), h.col(1));
  CHECK(hik(0, 0) == doctest::Approx(0.7));

  const Matrix c = kernel_matrix(KernelSpec::chi_squared(0.7), h, h);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(1, 1) == 1.0);
  const double chi = chi_squared_distance(h.col(0), h.col(1));
  CHECK(chi == doctest::Approx(0.5 * (0.09 / 0.7 + 0.09 / 1.3)));
  CHECK(c(0, 1) == doctest::Approx(std::exp(-chi / (2.0 * 0.49))));
  Vector z = Vector::Zero(2);
  CHECK(chi_squared_distance(z, z) == 0.0);
}

TEST_CASE("kernel validation errors") {
  Matrix neg(1, 2);
  neg << -1.0, 1.0;
  CHECK_THROWS_AS(kernel_matrix(KernelSpec::histogram_intersection(), neg, neg), Error);
  try {
    kernel_matrix(KernelSpec::chi_squared(1.0), neg, neg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeFeature);
  }
  CHECK_THROWS_AS(kernel_matrix(KernelSpec::rbf(-1.0), neg, neg), Error);
  CHECK_THROWS_AS(kernel_matrix(KernelSpec::linear(), Matrix::Zero(2, 2), Matrix::Zero(3, 2)), Error);
}

TEST_CASE("parse_kernel round trip") {
  CHECK(parse_kernel("linear").kind == KernelKind::Linear);
  const KernelSpec r = parse_kernel("rbf:auto");
  CHECK(r.kind == KernelKind::Rbf);
  CHECK(!r.sigma.has_value());
  CHECK(*parse_kernel("rbf:0.5").sigma == 0.5);
  CHECK(parse_kernel("hik").kind == KernelKind::HistogramIntersection);
  CHECK(parse_kernel("chi2:auto").kind == KernelKind::ChiSquared);
  CHECK(to_string(parse_kernel("rbf:auto")) == "rbf:auto");
  CHECK(parse_kernel(to_string(KernelSpec::rbf(0.25))).sigma == 0.25);
  CHECK_THROWS_AS(parse_kernel("poly"), Error);
  CHECK_THROWS_AS(parse_kernel("rbf:x"), Error);
}

TEST_CASE("precomputed kernels address Gram rows") {
  Matrix g(3, 3);
  g << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  const KernelSpec spec = KernelSpec::precomputed(g);
  const Matrix idx = index_features(3);
  CHECK(max_abs(kernel_matrix(spec, idx, idx) - g) == 0.0);
  const Matrix sub = kernel_matrix(spec, index_features(1, 2), idx);
  CHECK(max_abs(sub - g.row(2)) == 0.0);
}

TEST_CASE("sigma heuristic examples") {
  Matrix two(1, 2);
  two << 0, 2;
  CHECK(sigma_heuristic({labeled(two)}) == doctest::Approx(2.0));
  Matrix three(1, 3);
  three << 0, 1, 2;
  CHECK(sigma_heuristic({labeled(three)}) == doctest::Approx(4.0 / 3.0));

  std::mt19937_64 rng(8);
  const Matrix a = test::random_matrix(2, 25, rng), b = test::random_matrix(4, 15, rng);
  double sum = 0.0;
  int pairs = 0;
  for (const Matrix* m : {&a, &b}) {
    for (Index i = 0; i < m->cols(); ++i) {
      for (Index j = i + 1; j < m->cols(); ++j) {
        sum += (m->col(i) - m->col(j)).norm();
        ++pairs;
      }
    }
  }
  CHECK(std::abs(sigma_heuristic({labeled(a, "1"), labeled(b, "2")}) - sum / pairs) < 1e-12);

  Matrix same = Matrix::Ones(2, 3);
  try {
    sigma_heuristic({labeled(same)});
    FAIL("expected ZeroSpread");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroSpread);
  }
  DomainDataset lone = labeled(two);
  lone.labels = {1, 0};
  try {
    sigma_heuristic({lone});
    FAIL("expected NoLabeledPairs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoLabeledPairs);
  }
}

TEST_CASE("resolve_kernels fills auto widths") {
  Matrix three(1, 3);
  three << 0, 1, 2;
  const auto out = resolve_kernels({KernelSpec::rbf(), KernelSpec::linear()},
                                   {labeled(three, "1"), labeled(2.0 * three, "2")});
  REQUIRE(out[0].sigma.has_value());
  // pooled over both domains: pairs 1,2,1 and 2,4,2
  CHECK(*out[0].sigma == doctest::Approx(12.0 / 6.0));
  const auto per = resolve_kernels({KernelSpec::rbf(), KernelSpec::rbf()},
                                   {labeled(three, "1"), labeled(2.0 * three, "2")},
                                   SigmaScope::PerDomain);
  CHECK(*per[0].sigma == doctest::Approx(4.0 / 3.0));
  CHECK(*per[1].sigma == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("Gram matrices are symmetric PSD on random inputs") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> nd(5, 25), dd(1, 6);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n = nd(rng), d = dd(rng);
    const Matrix x = random_histograms(d, n, rng);
    for (const KernelSpec& spec : {KernelSpec::linear(), KernelSpec::rbf(0.5), KernelSpec::histogram_intersection(),
                                   KernelSpec::chi_squared(0.5)}) {
      const Matrix k = kernel_matrix(spec, x, x);
      CHECK(max_abs(k - k.transpose()) <= 1e-12);
      Eigen::SelfAdjointEigenSolver<Matrix> es(k);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(es.eigenvalues().maxCoeff(), 1e-300));
    }
  }
}
