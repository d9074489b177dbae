#include "kema/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "kema/errors.hpp"

namespace kema {

namespace {

struct Labeled {
  Matrix x;
  std::vector<int> y;
};

Labeled labeled_only(const Matrix& train, const std::vector<int>& labels, const Matrix& test) {
  if (static_cast<Index>(labels.size()) != train.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "one label per training column is required");
  }
  if (train.rows() != test.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "training and test dimensions differ");
  }
  Labeled out;
  std::vector<Index> keep;
  for (Index i = 0; i < train.cols(); ++i) {
    if (labels[i] < 0) throw Error(ErrorCode::InvalidArgument, "negative class label");
    if (labels[i] != 0) keep.push_back(i);
  }
  if (keep.empty()) throw Error(ErrorCode::NoLabeledTraining, "no labeled training sample");
  out.x.resize(train.rows(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.x.col(static_cast<Index>(j)) = train.col(keep[j]);
    out.y.push_back(labels[keep[j]]);
  }
  return out;
}

}  // namespace

std::vector<int> knn_classify(const Matrix& train, const std::vector<int>& labels,
                              const Matrix& test, int k) {
  const Labeled lab = labeled_only(train, labels, test);
  const auto n = static_cast<Index>(lab.y.size());
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, labeled count]");
  const Matrix d2 = pairwise_sq_distances(lab.x, test);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(test.cols()));
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index t = 0; t < test.cols(); ++t) {
    for (Index i = 0; i < n; ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return d2(a, t) < d2(b, t) || (d2(a, t) == d2(b, t) && a < b);
    });
    std::map<int, int> votes;
    for (int i = 0; i < k; ++i) ++votes[lab.y[order[i]]];
    int best = 0, best_votes = -1;
    for (auto [cls, v] : votes) {
      if (v > best_votes) {
        best = cls;
        best_votes = v;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<int> ridge_linear_classify(const Matrix& train, const std::vector<int>& labels,
                                       const Matrix& test, double ridge) {
  if (!(ridge > 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge must be positive");
  const Labeled lab = labeled_only(train, labels, test);
  std::vector<int> classes = lab.y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const auto c = static_cast<Index>(classes.size());
  const auto n = static_cast<Index>(lab.y.size());
  if (c == 1) return std::vector<int>(static_cast<std::size_t>(test.cols()), classes[0]);

  Matrix y = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i) {
    const auto pos = std::lower_bound(classes.begin(), classes.end(), lab.y[i]) - classes.begin();
    y(i, pos) = 1.0;
  }
  const Vector mean_x = lab.x.rowwise().mean();
  const Eigen::RowVectorXd mean_y = y.colwise().mean();
  const Matrix xc = lab.x.colwise() - mean_x;
  Matrix gram = xc * xc.transpose();
  const Index m = gram.rows();
  const double scale = m > 0 ? gram.trace() / static_cast<double>(m) : 0.0;
  gram.diagonal().array() += ridge * (scale > 0.0 ? scale : 1.0);
  const Matrix w = gram.ldlt().solve(xc * (y.rowwise() - mean_y));  // m x c
  const Matrix scores = (w.transpose() * (test.colwise() - mean_x)).colwise() +
                        mean_y.transpose();  // c x t
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(test.cols()));
  for (Index t = 0; t < test.cols(); ++t) {
    Index best = 0;
    for (Index k = 1; k < c; ++k) {
      if (scores(k, t) > scores(best, t)) best = k;
    }
    out.push_back(classes[best]);
  }
  return out;
}

std::string to_string(Classifier c) {
  return c == Classifier::RidgeLinear ? "linear" : "1nn";
}

Classifier parse_classifier(const std::string& text) {
  if (text == "linear" || text == "ridge") return Classifier::RidgeLinear;
  if (text == "1nn" || text == "knn") return Classifier::NearestNeighbor;
  throw Error(ErrorCode::InvalidArgument, "unknown classifier '" + text + "'");
}

std::vector<int> classify(Classifier c, const Matrix& train, const std::vector<int>& labels,
                          const Matrix& test) {
  return c == Classifier::RidgeLinear ? ridge_linear_classify(train, labels, test)
                                      : knn_classify(train, labels, test, 1);
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and truth lengths differ");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

ErrorCurve error_curve(const AlignmentModel& model, const std::vector<DomainDataset>& train,
                       const std::vector<DomainDataset>& test, std::size_t target,
                       const std::string& method, const CurveOptions& opts) {
  if (train.size() != model.domains.size() || target >= test.size() ||
      test.size() != model.domains.size()) {
    throw Error(ErrorCode::DimensionMismatch, "datasets do not match the model's domains");
  }
  const Index avail = model.num_features();
  const Index maxf = opts.max_features == 0 ? avail : opts.max_features;
  if (maxf < 1 || maxf > avail) {
    throw Error(ErrorCode::InvalidArgument,
                "max_features must lie in [1, " + std::to_string(avail) + "]");
  }
  std::vector<Matrix> parts;
  std::vector<int> labels;
  Index cols = 0;
  for (std::size_t d = 0; d < train.size(); ++d) {
    if (opts.source_only && d == target) continue;
    const DomainDataset lab = select_columns(train[d], labeled_indices(train[d]));
    if (lab.size() == 0) continue;
    parts.push_back(project(model, d, lab.features));
    labels.insert(labels.end(), lab.labels.begin(), lab.labels.end());
    cols += lab.size();
  }
  if (cols == 0) throw Error(ErrorCode::NoLabeledTraining, "no labeled training projections");
  Matrix z(avail, cols);
  Index at = 0;
  for (const auto& p : parts) {
    z.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  const Matrix zt = project(model, target, test[target].features);

  ErrorCurve curve;
  curve.method = method;
  curve.target_domain = model.domains[target].domain_id;
  for (Index nf = 1; nf <= maxf; ++nf) {
    const auto pred = classify(opts.classifier, z.topRows(nf), labels, zt.topRows(nf));
    curve.feature_counts.push_back(static_cast<int>(nf));
    curve.error_rates.push_back(error_rate(pred, test[target].labels));
  }
  return curve;
}

ErrorCurve baseline_curve(const DomainDataset& train, const DomainDataset& test, int max_features,
                          Classifier classifier) {
  if (max_features < 1) throw Error(ErrorCode::InvalidArgument, "max_features must be positive");
  const double err = error_rate(classify(classifier, train.features, train.labels, test.features),
                                test.labels);
  ErrorCurve curve;
  curve.method = "baseline";
  curve.target_domain = test.domain_id;
  for (int nf = 1; nf <= max_features; ++nf) {
    curve.feature_counts.push_back(nf);
    curve.error_rates.push_back(err);
  }
  return curve;
}

ErrorCurve mean_curve(const std::vector<ErrorCurve>& curves, const std::string& target_tag) {
  if (curves.empty()) throw Error(ErrorCode::InvalidArgument, "no curves to average");
  ErrorCurve out = curves.front();
  out.target_domain = target_tag;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    if (curves[i].feature_counts != out.feature_counts) {
      throw Error(ErrorCode::DimensionMismatch, "curves have different feature counts");
    }
    for (std::size_t j = 0; j < out.error_rates.size(); ++j) {
      out.error_rates[j] += curves[i].error_rates[j];
    }
  }
  for (double& e : out.error_rates) e /= static_cast<double>(curves.size());
  return out;
}

double min_error(const ErrorCurve& curve) {
  if (curve.error_rates.empty()) throw Error(ErrorCode::InvalidArgument, "empty curve");
  return *std::min_element(curve.error_rates.begin(), curve.error_rates.end());
}

double reconstruction_error(const Matrix& truth, const Matrix& reconstruction) {
  if (truth.rows() != reconstruction.rows() || truth.cols() != reconstruction.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "reconstruction shape differs from the truth");
  }
  if (truth.cols() == 0) throw Error(ErrorCode::InvalidArgument, "no samples");
  return (truth - reconstruction).colwise().norm().mean();
}

void write_curves_csv(std::ostream& out, const std::vector<ErrorCurve>& curves) {
  out << "method,target_domain,n_features,error\n";
  char buf[64];
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.feature_counts.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", c.error_rates[i]);
      out << c.method << ',' << c.target_domain << ',' << c.feature_counts[i] << ',' << buf << '\n';
    }
  }
}

}  // namespace kema
