#include "kema/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kema/errors.hpp"

namespace kema {

Index DomainDataset::labeled_count() const {
  return std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
}

int DomainDataset::max_label() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

void validate_dataset(const DomainDataset& ds) {
  if (ds.size() < 1 || ds.dim() < 1) {
    throw Error(ErrorCode::InvalidArgument, "domain '" + ds.domain_id + "' is empty");
  }
  if (static_cast<Index>(ds.labels.size()) != ds.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "domain '" + ds.domain_id + "' has " + std::to_string(ds.labels.size()) +
                    " labels for " + std::to_string(ds.size()) + " samples");
  }
  for (int l : ds.labels) {
    if (l < 0) throw Error(ErrorCode::InvalidArgument, "negative class label");
  }
  require_finite(ds.features, "features of domain '" + ds.domain_id + "'");
}

std::vector<Index> labeled_indices(const DomainDataset& ds) {
  std::vector<Index> out;
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != 0) out.push_back(i);
  }
  return out;
}

DomainDataset select_columns(const DomainDataset& ds, const std::vector<Index>& cols) {
  DomainDataset out;
  out.domain_id = ds.domain_id;
  out.features.resize(ds.dim(), static_cast<Index>(cols.size()));
  out.labels.reserve(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.features.col(static_cast<Index>(j)) = ds.features.col(cols[j]);
    out.labels.push_back(ds.labels[cols[j]]);
  }
  return out;
}

Matrix knn_adjacency(const Matrix& x, const GraphConfig& cfg) {
  const Index n = x.cols();
  if (cfg.k < 1 || cfg.k >= n) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(cfg.k) +
                                          " needs more than k samples per domain, got " +
                                          std::to_string(n));
  }
  const Matrix d2 = pairwise_sq_distances(x, x);
  if (d2.maxCoeff() == 0.0) {
    throw Error(ErrorCode::DegenerateDomain, "all samples of a domain coincide");
  }
  const auto k = static_cast<std::size_t>(cfg.k);
  std::vector<std::vector<Index>> nbrs(n);
  Vector kth(n);
  std::vector<Index> order(n - 1);
  for (Index i = 0; i < n; ++i) {
    order.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return d2(a, i) < d2(b, i) || (d2(a, i) == d2(b, i) && a < b);
    });
    nbrs[i].assign(order.begin(), order.begin() + k);
    kth(i) = std::sqrt(d2(order[k - 1], i));
  }

  double sigma = cfg.heat_sigma;
  if (cfg.weighting == EdgeWeighting::Heat && !(sigma > 0.0)) {
    sigma = kth.mean();
    if (!(sigma > 0.0)) {
      throw Error(ErrorCode::DegenerateDomain, "k-th neighbor distances are all zero");
    }
  }
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j : nbrs[i]) {
      const double v = cfg.weighting == EdgeWeighting::Binary
                           ? 1.0
                           : std::exp(-d2(i, j) / (2.0 * sigma * sigma));
      w(i, j) = std::max(w(i, j), v);
      w(j, i) = std::max(w(j, i), v);
    }
  }
  return w;
}

std::vector<Index> domain_offsets(const std::vector<DomainDataset>& datasets) {
  std::vector<Index> offs;
  Index acc = 0;
  for (const auto& ds : datasets) {
    offs.push_back(acc);
    acc += ds.size();
  }
  return offs;
}

Matrix build_topology_graph(const std::vector<DomainDataset>& datasets, const GraphConfig& cfg) {
  std::vector<Matrix> blocks;
  blocks.reserve(datasets.size());
  for (const auto& ds : datasets) {
    validate_dataset(ds);
    blocks.push_back(knn_adjacency(ds.features, cfg));
  }
  return block_diagonal(blocks);
}

void build_class_graphs(const std::vector<DomainDataset>& datasets, Matrix& ws, Matrix& wd) {
  std::vector<int> labels;
  for (const auto& ds : datasets) labels.insert(labels.end(), ds.labels.begin(), ds.labels.end());
  const auto n = static_cast<Index>(labels.size());
  ws = Matrix::Zero(n, n);
  wd = Matrix::Zero(n, n);
  std::vector<Index> lab;
  for (Index i = 0; i < n; ++i) {
    if (labels[i] != 0) lab.push_back(i);
  }
  for (Index a : lab) {
    for (Index b : lab) {
      if (a == b) continue;
      if (labels[a] == labels[b]) {
        ws(a, b) = 1.0;
      } else {
        wd(a, b) = 1.0;
      }
    }
  }
}

namespace {

void check_adjacency(const Matrix& w) {
  if (w.rows() != w.cols()) throw Error(ErrorCode::DimensionMismatch, "adjacency is not square");
  require_finite(w, "adjacency");
  if (!is_symmetric(w)) throw Error(ErrorCode::NonSymmetric, "adjacency is not symmetric");
  if (w.size() > 0 && w.minCoeff() < 0.0) {
    throw Error(ErrorCode::NegativeWeight, "adjacency has a negative weight");
  }
}

}  // namespace

Matrix laplacian(const Matrix& w) {
  check_adjacency(w);
  Matrix l = -w;
  l.diagonal() = w.rowwise().sum() - w.diagonal();
  return l;
}

Matrix normalized_laplacian(const Matrix& w) {
  check_adjacency(w);
  const Index n = w.rows();
  Vector deg = w.rowwise().sum() - w.diagonal();
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  Matrix l = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  for (Index i = 0; i < n; ++i) l(i, i) = deg(i) > 0.0 ? 1.0 : 0.0;
  return l;
}

JointGraphs build_joint_graphs(const std::vector<DomainDataset>& datasets, const GraphConfig& cfg) {
  JointGraphs g;
  g.w = build_topology_graph(datasets, cfg);
  build_class_graphs(datasets, g.ws, g.wd);
  auto lap = cfg.normalized ? normalized_laplacian : laplacian;
  g.l = lap(g.w);
  g.ls = lap(g.ws);
  g.ld = lap(g.wd);
  g.domain_offsets = domain_offsets(datasets);
  return g;
}

}  // namespace kema
