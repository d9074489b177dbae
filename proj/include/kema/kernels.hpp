#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kema/graphs.hpp"
#include "kema/linalg.hpp"

namespace kema {

enum class KernelKind { Linear, Rbf, HistogramIntersection, ChiSquared, Precomputed };

/// Kernel choice for one domain. sigma is unset for "auto" and filled in by
/// resolve_kernels at fit time. A precomputed kernel stores the full Gram
/// matrix; its "features" are 1 x n rows holding sample indices into it.
struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  std::optional<double> sigma;
  Matrix gram;

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(std::optional<double> s = std::nullopt) {
    return {KernelKind::Rbf, s, {}};
  }
  static KernelSpec histogram_intersection() { return {KernelKind::HistogramIntersection, {}, {}}; }
  static KernelSpec chi_squared(std::optional<double> s = std::nullopt) {
    return {KernelKind::ChiSquared, s, {}};
  }
  static KernelSpec precomputed(Matrix g);

  bool needs_sigma() const { return kind == KernelKind::Rbf || kind == KernelKind::ChiSquared; }
};

// "linear", "rbf:auto", "rbf:0.5", "hik", "chi2:auto", "chi2:1.2". Precomputed
// kernels come from files and have no string form beyond "precomputed".
KernelSpec parse_kernel(const std::string& text);
std::string to_string(const KernelSpec& spec);

void validate_kernel(const KernelSpec& spec);

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& x, const Matrix& y);

// Half the sum of (x-y)^2/(x+y) over coordinates; 0/0 terms count as 0.
double chi_squared_distance(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

enum class SigmaScope { Pooled, PerDomain };

/// Mean Euclidean distance over unordered pairs of labeled samples. Pairs are
/// formed within each domain (feature spaces may differ) and pooled into one
/// average. Throws NoLabeledPairs or ZeroSpread.
double sigma_heuristic(const std::vector<DomainDataset>& datasets);
double sigma_heuristic(const DomainDataset& ds);

/// Same pairing as sigma_heuristic but in chi-squared distance.
double chi_squared_sigma_heuristic(const std::vector<DomainDataset>& datasets);
double chi_squared_sigma_heuristic(const DomainDataset& ds);

/// Replaces every auto sigma by the heuristic value for its kernel kind.
std::vector<KernelSpec> resolve_kernels(std::vector<KernelSpec> specs,
                                        const std::vector<DomainDataset>& datasets,
                                        SigmaScope scope = SigmaScope::Pooled);

// Feature matrix that addresses rows of a precomputed Gram matrix.
Matrix index_features(Index n, Index offset = 0);

}  // namespace kema
