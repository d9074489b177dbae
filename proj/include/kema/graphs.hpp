#pragma once

#include <string>
#include <vector>

#include "kema/linalg.hpp"

namespace kema {

/// One domain: features are d x n with samples as columns; label 0 marks an
/// unlabeled sample, 1..C a class.
struct DomainDataset {
  Matrix features;
  std::vector<int> labels;
  std::string domain_id;

  Index dim() const { return features.rows(); }
  Index size() const { return features.cols(); }
  Index labeled_count() const;
  int max_label() const;
};

// Throws on an empty dataset, label/column count mismatch, negative labels or
// non-finite features.
void validate_dataset(const DomainDataset& ds);

// Columns whose label is nonzero, in index order.
std::vector<Index> labeled_indices(const DomainDataset& ds);
DomainDataset select_columns(const DomainDataset& ds, const std::vector<Index>& cols);

enum class EdgeWeighting { Binary, Heat };

struct GraphConfig {
  int k = 21;
  EdgeWeighting weighting = EdgeWeighting::Binary;
  // Heat kernel width; nonpositive means mean k-th neighbor distance per domain.
  double heat_sigma = 0.0;
  // Use I - D^{-1/2} W D^{-1/2} instead of D - W.
  bool normalized = false;
};

struct JointGraphs {
  Matrix w, ws, wd;
  Matrix l, ls, ld;
  std::vector<Index> domain_offsets;
  Index total() const { return w.rows(); }
};

Matrix knn_adjacency(const Matrix& features, const GraphConfig& cfg);
Matrix build_topology_graph(const std::vector<DomainDataset>& datasets, const GraphConfig& cfg);
void build_class_graphs(const std::vector<DomainDataset>& datasets, Matrix& ws, Matrix& wd);
Matrix laplacian(const Matrix& w);
Matrix normalized_laplacian(const Matrix& w);
JointGraphs build_joint_graphs(const std::vector<DomainDataset>& datasets, const GraphConfig& cfg);

std::vector<Index> domain_offsets(const std::vector<DomainDataset>& datasets);

}  // namespace kema
