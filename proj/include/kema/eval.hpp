#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kema/align.hpp"
#include "kema/graphs.hpp"

namespace kema {

/// Nearest-neighbor vote in latent space. Columns with label 0 are ignored.
/// Distance ties go to the lower training index, vote ties to the lower class.
std::vector<int> knn_classify(const Matrix& train, const std::vector<int>& labels,
                              const Matrix& test, int k = 1);

inline constexpr double kDefaultRidge = 1e-8;

/// One-hot least squares on centered features with an unpenalized bias and a
/// ridge of ridge * trace(Xc Xc^T) / m; argmax decoding, ties to the lower
/// class. Columns with label 0 are ignored.
std::vector<int> ridge_linear_classify(const Matrix& train, const std::vector<int>& labels,
                                       const Matrix& test, double ridge = kDefaultRidge);

enum class Classifier { RidgeLinear, NearestNeighbor };

std::string to_string(Classifier c);
Classifier parse_classifier(const std::string& text);

std::vector<int> classify(Classifier c, const Matrix& train, const std::vector<int>& labels,
                          const Matrix& test);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

struct ErrorCurve {
  std::string method;
  std::string target_domain;
  std::vector<int> feature_counts;
  std::vector<double> error_rates;
};

struct CurveOptions {
  Classifier classifier = Classifier::RidgeLinear;
  // 0 uses every model feature
  int max_features = 0;
  // train on the labeled samples of the non-target domains only
  bool source_only = false;
};

/// Error on the target domain's test set for Nf = 1..max_features, training
/// the classifier on the labeled projections of all domains (or the sources).
ErrorCurve error_curve(const AlignmentModel& model, const std::vector<DomainDataset>& train,
                       const std::vector<DomainDataset>& test, std::size_t target,
                       const std::string& method, const CurveOptions& opts = {});

/// Target-only classifier in input space; the same error at every Nf.
ErrorCurve baseline_curve(const DomainDataset& train, const DomainDataset& test, int max_features,
                          Classifier classifier = Classifier::RidgeLinear);

/// Pointwise mean of curves sharing their feature counts.
ErrorCurve mean_curve(const std::vector<ErrorCurve>& curves, const std::string& target_tag);

double min_error(const ErrorCurve& curve);

/// Mean over samples (columns) of the Euclidean norm of the difference.
double reconstruction_error(const Matrix& truth, const Matrix& reconstruction);

// method,target_domain,n_features,error
void write_curves_csv(std::ostream& out, const std::vector<ErrorCurve>& curves);

}  // namespace kema
