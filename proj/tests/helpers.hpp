#pragma once

#include <random>

#include "kema/graphs.hpp"
#include "kema/linalg.hpp"

namespace kema::test {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Matrix random_spd(Index n, std::mt19937_64& rng) {
  const Matrix g = random_matrix(n, n, rng);
  return g * g.transpose() + 0.5 * Matrix::Identity(n, n);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Two-blob labeled set in d dimensions with a few unlabeled points.
inline DomainDataset blob_domain(Index d, int per_class, int unlabeled, int classes,
                                 std::mt19937_64& rng, const std::string& id) {
  std::normal_distribution<double> nd(0.0, 0.3);
  const Index n = per_class * classes + unlabeled;
  DomainDataset ds;
  ds.domain_id = id;
  ds.features.resize(d, n);
  ds.labels.assign(n, 0);
  for (Index j = 0; j < n; ++j) {
    const int c = j < per_class * classes ? static_cast<int>(j / per_class) : static_cast<int>(j % classes);
    for (Index i = 0; i < d; ++i) ds.features(i, j) = (i == c % d ? 2.0 * (c + 1) : 0.0) + nd(rng);
    if (j < per_class * classes) ds.labels[j] = c + 1;
  }
  return ds;
}

}  // namespace kema::test
