#include "kema/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>

#include "kema/errors.hpp"

namespace kema {

KernelSpec KernelSpec::precomputed(Matrix g) {
  KernelSpec s;
  s.kind = KernelKind::Precomputed;
  s.gram = std::move(g);
  return s;
}

namespace {

std::optional<double> parse_sigma(const std::string& arg, const std::string& text) {
  if (arg.empty() || arg == "auto") return std::nullopt;
  double v = 0.0;
  const auto* end = arg.data() + arg.size();
  auto [p, ec] = std::from_chars(arg.data(), end, v);
  if (ec != std::errc() || p != end || !(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, "bad kernel width in '" + text + "'");
  }
  return v;
}

std::string format_sigma(const std::optional<double>& s) {
  if (!s) return "auto";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", *s);
  return buf;
}

bool has_negative(const Matrix& m) { return m.size() > 0 && m.minCoeff() < 0.0; }

Index gram_index(double v, Index n) {
  const double r = std::round(v);
  if (r != v || r < 0.0 || r >= static_cast<double>(n)) {
    throw Error(ErrorCode::InvalidArgument, "precomputed kernel index out of range");
  }
  return static_cast<Index>(r);
}

}  // namespace

KernelSpec parse_kernel(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "linear" && arg.empty()) return KernelSpec::linear();
  if (name == "rbf") return KernelSpec::rbf(parse_sigma(arg, text));
  if ((name == "hik" || name == "histogram") && arg.empty()) {
    return KernelSpec::histogram_intersection();
  }
  if (name == "chi2") return KernelSpec::chi_squared(parse_sigma(arg, text));
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + text + "'");
}

std::string to_string(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Rbf: return "rbf:" + format_sigma(spec.sigma);
    case KernelKind::HistogramIntersection: return "hik";
    case KernelKind::ChiSquared: return "chi2:" + format_sigma(spec.sigma);
    case KernelKind::Precomputed: return "precomputed";
  }
  return "unknown";
}

void validate_kernel(const KernelSpec& spec) {
  if (spec.sigma && !(*spec.sigma > 0.0 && std::isfinite(*spec.sigma))) {
    throw Error(ErrorCode::InvalidArgument, "kernel width must be positive");
  }
  if (spec.kind == KernelKind::Precomputed) {
    if (spec.gram.rows() != spec.gram.cols() || spec.gram.size() == 0) {
      throw Error(ErrorCode::DimensionMismatch, "precomputed kernel must be square");
    }
    require_finite(spec.gram, "precomputed kernel");
    if (!is_symmetric(spec.gram)) {
      throw Error(ErrorCode::NonSymmetric, "precomputed kernel is not symmetric");
    }
  }
}

double chi_squared_distance(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  double acc = 0.0;
  for (Index d = 0; d < x.size(); ++d) {
    const double s = x(d) + y(d);
    if (s > 0.0) {
      const double diff = x(d) - y(d);
      acc += diff * diff / s;
    }
  }
  return 0.5 * acc;
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kernel inputs have dimensions " + std::to_string(x.rows()) + " and " +
                    std::to_string(y.rows()));
  }
  require_finite(x, "kernel input");
  require_finite(y, "kernel input");
  validate_kernel(spec);
  if (spec.needs_sigma() && !spec.sigma) {
    throw Error(ErrorCode::InvalidArgument, "kernel width is unresolved (auto)");
  }
  const bool histogram =
      spec.kind == KernelKind::HistogramIntersection || spec.kind == KernelKind::ChiSquared;
  if (histogram && (has_negative(x) || has_negative(y))) {
    throw Error(ErrorCode::NegativeFeature, "histogram kernels need nonnegative features");
  }

  Matrix k(x.cols(), y.cols());
  switch (spec.kind) {
    case KernelKind::Linear:
      k.noalias() = x.transpose() * y;
      break;
    case KernelKind::Rbf: {
      const double s = *spec.sigma;
      k = (-pairwise_sq_distances(x, y) / (2.0 * s * s)).array().exp();
      break;
    }
    case KernelKind::HistogramIntersection:
      for (Index j = 0; j < y.cols(); ++j) {
        for (Index i = 0; i < x.cols(); ++i) k(i, j) = x.col(i).cwiseMin(y.col(j)).sum();
      }
      break;
    case KernelKind::ChiSquared: {
      const double s = *spec.sigma;
      for (Index j = 0; j < y.cols(); ++j) {
        for (Index i = 0; i < x.cols(); ++i) {
          k(i, j) = std::exp(-chi_squared_distance(x.col(i), y.col(j)) / (2.0 * s * s));
        }
      }
      break;
    }
    case KernelKind::Precomputed: {
      if (x.rows() != 1) {
        throw Error(ErrorCode::DimensionMismatch, "precomputed kernel inputs are index rows");
      }
      const Index n = spec.gram.rows();
      for (Index j = 0; j < y.cols(); ++j) {
        const Index b = gram_index(y(0, j), n);
        for (Index i = 0; i < x.cols(); ++i) k(i, j) = spec.gram(gram_index(x(0, i), n), b);
      }
      break;
    }
  }
  require_finite(k, "kernel matrix");
  return k;
}

namespace {

template <class Dist>
void accumulate_pairs(const DomainDataset& ds, Dist dist, double& total, double& count) {
  const auto lab = labeled_indices(ds);
  for (std::size_t a = 0; a < lab.size(); ++a) {
    for (std::size_t b = a + 1; b < lab.size(); ++b) {
      total += dist(ds.features.col(lab[a]), ds.features.col(lab[b]));
      count += 1.0;
    }
  }
}

template <class Dist>
double pooled_mean(const std::vector<DomainDataset>& datasets, Dist dist) {
  double total = 0.0, count = 0.0;
  for (const auto& ds : datasets) accumulate_pairs(ds, dist, total, count);
  if (count == 0.0) {
    throw Error(ErrorCode::NoLabeledPairs, "width heuristic needs two labeled samples in a domain");
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroSpread, "all labeled samples coincide");
  return total / count;
}

double euclid(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return (a - b).norm();
}

}  // namespace

double sigma_heuristic(const std::vector<DomainDataset>& datasets) {
  return pooled_mean(datasets, euclid);
}

double sigma_heuristic(const DomainDataset& ds) { return sigma_heuristic(std::vector{ds}); }

double chi_squared_sigma_heuristic(const std::vector<DomainDataset>& datasets) {
  for (const auto& ds : datasets) {
    if (has_negative(ds.features)) {
      throw Error(ErrorCode::NegativeFeature, "histogram kernels need nonnegative features");
    }
  }
  return pooled_mean(datasets, chi_squared_distance);
}

double chi_squared_sigma_heuristic(const DomainDataset& ds) {
  return chi_squared_sigma_heuristic(std::vector{ds});
}

std::vector<KernelSpec> resolve_kernels(std::vector<KernelSpec> specs,
                                        const std::vector<DomainDataset>& datasets,
                                        SigmaScope scope) {
  if (specs.size() != datasets.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one kernel per domain is required");
  }
  std::optional<double> pooled_rbf, pooled_chi;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& s = specs[i];
    validate_kernel(s);
    if (!s.needs_sigma() || s.sigma) continue;
    const bool chi = s.kind == KernelKind::ChiSquared;
    if (scope == SigmaScope::PerDomain) {
      s.sigma = chi ? chi_squared_sigma_heuristic(datasets[i]) : sigma_heuristic(datasets[i]);
      continue;
    }
    if (chi && !pooled_chi) {
      // chi-squared distances exist only between histogram domains
      std::vector<DomainDataset> hist;
      for (std::size_t j = 0; j < specs.size(); ++j) {
        if (specs[j].kind == KernelKind::ChiSquared) hist.push_back(datasets[j]);
      }
      pooled_chi = chi_squared_sigma_heuristic(hist);
    }
    if (!chi && !pooled_rbf) pooled_rbf = sigma_heuristic(datasets);
    auto& cache = chi ? pooled_chi : pooled_rbf;
    s.sigma = cache;
  }
  return specs;
}

Matrix index_features(Index n, Index offset) {
  Matrix f(1, n);
  for (Index i = 0; i < n; ++i) f(0, i) = static_cast<double>(offset + i);
  return f;
}

}  // namespace kema
