#include "kema/align.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kema/errors.hpp"

namespace kema {

std::string to_string(AlignmentMode mode) {
  switch (mode) {
    case AlignmentMode::Primal: return "primal";
    case AlignmentMode::Dual: return "dual";
    case AlignmentMode::Reduced: return "reduced";
  }
  return "unknown";
}

AlignmentMode parse_mode(const std::string& text) {
  if (text == "primal") return AlignmentMode::Primal;
  if (text == "dual") return AlignmentMode::Dual;
  if (text == "reduced") return AlignmentMode::Reduced;
  throw Error(ErrorCode::Parse, "unknown model mode '" + text + "'");
}

std::size_t AlignmentModel::domain_index(const std::string& id) const {
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i].domain_id == id) return i;
  }
  throw Error(ErrorCode::UnknownDomain, "model has no domain '" + id + "'");
}

void validate_problem(const AlignmentProblem& p, bool need_kernels) {
  if (p.datasets.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "alignment needs at least two domains");
  }
  for (const auto& ds : p.datasets) {
    validate_dataset(ds);
    if (ds.labeled_count() == 0) {
      throw Error(ErrorCode::NoLabeledTraining,
                  "domain '" + ds.domain_id + "' has no labeled sample");
    }
  }
  if (need_kernels && p.kernels.size() != p.datasets.size()) {
    throw Error(ErrorCode::InvalidArgument, "one kernel per domain is required");
  }
  if (!(p.mu >= 0.0) || !std::isfinite(p.mu)) {
    throw Error(ErrorCode::InvalidArgument, "mu must be a nonnegative finite number");
  }
  if (p.num_features < 0) throw Error(ErrorCode::InvalidArgument, "negative feature count");
  if (!(p.reg >= 0.0) || !std::isfinite(p.reg)) {
    throw Error(ErrorCode::InvalidArgument, "regularization must be nonnegative");
  }
}

namespace {

struct Selection {
  std::vector<Index> columns;
  double threshold = 0.0;
  Index discarded = 0;
};

Selection select_components(const Vector& values, int requested, Index cap) {
  Selection s;
  // Per-eigenvalue cutoff. A spectrum-wide maximum would be set by the
  // directions outside the range of Ld, whose size is 1/reg.
  s.threshold = kZeroEigenvalueThreshold;
  std::vector<Index> alive;
  for (Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (std::isfinite(v) && v >= kZeroEigenvalueThreshold * std::max(std::abs(v), 1.0)) alive.push_back(i);
  }
  s.discarded = values.size() - static_cast<Index>(alive.size());
  if (requested > cap) {
    throw Error(ErrorCode::InvalidArgument, "requested " + std::to_string(requested) +
                                                " features, the problem allows at most " +
                                                std::to_string(cap));
  }
  const Index m = requested == 0 ? std::min<Index>(20, static_cast<Index>(alive.size()))
                                 : static_cast<Index>(requested);
  if (m == 0 || m > static_cast<Index>(alive.size())) {
    throw Error(ErrorCode::TooFewNonzeroEigenvalues,
                std::to_string(alive.size()) + " components survive the zero threshold, " +
                    std::to_string(std::max<Index>(m, 1)) + " requested");
  }
  s.columns.assign(alive.begin(), alive.begin() + m);
  return s;
}

void require_dissimilarity(const JointGraphs& g) {
  if (g.wd.sum() == 0.0) {
    throw Error(ErrorCode::SingularAfterRegularization,
                "no pair of labeled samples with different classes; the dissimilarity side "
                "vanishes and only the regularizer would remain");
  }
}

struct RangeBasis {
  Matrix u;  // n x q, orthonormal columns spanning the range of K_nr
  Matrix t;  // r x q, alpha = t * gamma gives K_nr alpha = u * gamma
};

RangeBasis range_basis(const Matrix& knr, bool square) {
  RangeBasis rb;
  if (square) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (knr + knr.transpose()));
    const Vector& w = es.eigenvalues();
    const double peak = w.cwiseAbs().maxCoeff();
    std::vector<Index> keep;
    for (Index i = w.size() - 1; i >= 0; --i) {
      if (std::abs(w(i)) > kRangeTolerance * peak) keep.push_back(i);
    }
    rb.u.resize(knr.rows(), static_cast<Index>(keep.size()));
    rb.t.resize(knr.cols(), static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      const auto j = static_cast<Index>(c);
      rb.u.col(j) = es.eigenvectors().col(keep[c]);
      rb.t.col(j) = es.eigenvectors().col(keep[c]) / w(keep[c]);
    }
  } else {
    Eigen::BDCSVD<Matrix> svd(knr, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Index q = 0;
    while (q < s.size() && s(q) > kRangeTolerance * s(0)) ++q;
    rb.u = svd.matrixU().leftCols(q);
    rb.t = svd.matrixV().leftCols(q) * s.head(q).cwiseInverse().asDiagonal();
  }
  if (rb.u.cols() == 0) {
    throw Error(ErrorCode::DegenerateDomain, "kernel block of a domain vanishes");
  }
  return rb;
}

// K = X^T X = V S^2 V^T from the thin SVD of X, without forming K.
RangeBasis linear_range_basis(const Matrix& x) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  RangeBasis rb;
  Index q = 0;
  // eigenvalues of K are s^2, so the kernel cutoff applies to s^2
  while (q < s.size() && s(q) * s(q) > kRangeTolerance * s(0) * s(0)) ++q;
  if (q == 0) throw Error(ErrorCode::DegenerateDomain, "kernel block of a domain vanishes");
  rb.u = svd.matrixV().leftCols(q);
  rb.t = rb.u * s.head(q).array().square().inverse().matrix().asDiagonal();
  return rb;
}

// Orthonormal basis of the complement of the directions both pencil sides
// annihilate (their eigenvalue is 0/0). Empty when nothing is deflated.
Matrix shared_null_complement(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a + b);
  const Vector& w = es.eigenvalues();
  const double cut = kSharedNullTolerance * w.cwiseAbs().maxCoeff();
  Index first = 0;
  while (first < w.size() && w(first) <= cut) ++first;
  if (first == 0) return {};
  return es.eigenvectors().rightCols(w.size() - first);
}

// Deflates the shared null space, adds the left ridge and the right shift.
// a and b are the pencil in the coordinates mapped by to_coef.
SolvedPencil finish_pencil(Matrix a, Matrix b, Matrix to_coef, double reg) {
  a = 0.5 * (a + a.transpose()).eval();
  b = 0.5 * (b + b.transpose()).eval();
  SolvedPencil sp;
  const Matrix q = shared_null_complement(a, b);
  if (q.size() > 0) {
    sp.deflated = a.rows() - q.cols();
    a = (q.transpose() * a * q).eval();
    b = (q.transpose() * b * q).eval();
    a = 0.5 * (a + a.transpose()).eval();
    b = 0.5 * (b + b.transpose()).eval();
    to_coef = (to_coef * q).eval();
  }
  sp.left_shift = kLeftRidge * regularization_scale(a);
  a.diagonal().array() += sp.left_shift;
  sp.right_shift = reg * regularization_scale(b);
  sp.a = std::move(a);
  sp.b = std::move(b);
  sp.to_coefficients = std::move(to_coef);
  return sp;
}

void flip_to_convention(Matrix& coef, Matrix& y) {
  for (Index j = 0; j < coef.cols(); ++j) {
    Index best = 0;
    coef.col(j).cwiseAbs().maxCoeff(&best);
    if (coef(best, j) < 0.0) {
      coef.col(j) *= -1.0;
      y.col(j) *= -1.0;
    }
  }
}

struct Prepared {
  SolvedPencil pencil;
  std::vector<DomainBlock> blocks;
  Index cap = 0;
  Index total = 0;
};

Prepared prepare_dual(const AlignmentProblem& p, const std::vector<std::vector<Index>>* reps) {
  validate_problem(p, true);
  const auto kernels = resolve_kernels(p.kernels, p.datasets, p.sigma_scope);
  const JointGraphs g = build_joint_graphs(p.datasets, p.graph);
  require_dissimilarity(g);
  const std::size_t nd = p.datasets.size();
  if (reps && reps->size() != nd) {
    throw Error(ErrorCode::EmptyRepresentativeSet, "one representative list per domain is required");
  }
  Prepared out;
  out.total = g.total();
  std::vector<Matrix> us, ts;
  for (std::size_t i = 0; i < nd; ++i) {
    const auto& ds = p.datasets[i];
    DomainBlock blk;
    blk.domain_id = ds.domain_id;
    blk.dim = ds.dim();
    blk.offset = g.domain_offsets[i];
    blk.kernel = kernels[i];
    bool square = true;
    if (reps) {
      const auto& idx = (*reps)[i];
      if (idx.empty()) {
        throw Error(ErrorCode::EmptyRepresentativeSet,
                    "domain '" + ds.domain_id + "' has no representatives");
      }
      for (Index r : idx) {
        if (r < 0 || r >= ds.size()) {
          throw Error(ErrorCode::InvalidArgument, "representative index out of range");
        }
      }
      blk.representatives = idx;
      blk.retained = select_columns(ds, idx).features;
      // every sample in order: K_nr is K itself, so share the symmetric path
      square = static_cast<Index>(idx.size()) == ds.size();
      for (std::size_t j = 0; square && j < idx.size(); ++j) square = idx[j] == static_cast<Index>(j);
    } else {
      blk.retained = ds.features;
    }
    out.cap += blk.retained.cols();
    RangeBasis rb = square && blk.kernel.kind == KernelKind::Linear
                        ? linear_range_basis(ds.features)
                        : range_basis(kernel_matrix(blk.kernel, ds.features, blk.retained), square);
    blk.range_rank = rb.u.cols();
    us.push_back(std::move(rb.u));
    ts.push_back(std::move(rb.t));
    out.blocks.push_back(std::move(blk));
  }
  const Matrix ub = block_diagonal(us);
  const Matrix m_side = g.l + p.mu * g.ls;
  out.pencil = finish_pencil(ub.transpose() * (m_side * ub), ub.transpose() * (g.ld * ub),
                             block_diagonal(ts), p.reg);
  return out;
}

Prepared prepare_primal(const AlignmentProblem& p) {
  validate_problem(p, false);
  const JointGraphs g = build_joint_graphs(p.datasets, p.graph);
  require_dissimilarity(g);
  Prepared out;
  out.total = g.total();
  std::vector<Matrix> feats;
  for (std::size_t i = 0; i < p.datasets.size(); ++i) {
    const auto& ds = p.datasets[i];
    feats.push_back(ds.features);
    DomainBlock blk;
    blk.domain_id = ds.domain_id;
    blk.dim = ds.dim();
    blk.offset = g.domain_offsets[i];
    blk.kernel = KernelSpec::linear();
    blk.range_rank = blk.dim;
    out.cap += blk.dim;
    out.blocks.push_back(std::move(blk));
  }
  const Matrix z = block_diagonal(feats);
  const Matrix m_side = g.l + p.mu * g.ls;
  out.pencil = finish_pencil(z * m_side * z.transpose(), z * g.ld * z.transpose(),
                             Matrix::Identity(z.rows(), z.rows()), p.reg);
  return out;
}

AlignmentModel solve_prepared(Prepared prep, const AlignmentProblem& p, AlignmentMode mode) {
  SolvedPencil& sp = prep.pencil;
  Matrix b_reg = sp.b;
  b_reg.diagonal().array() += sp.right_shift;
  EigenPairs ep;
  try {
    ep = left_definite_eigensolve(sp.a, b_reg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularAfterRegularization) throw;
    ep = generalized_eigensolve(sp.a, sp.b, p.reg);
  }
  const Selection sel = select_components(ep.values, p.num_features, prep.cap);

  AlignmentModel model;
  model.mode = mode;
  model.mu = p.mu;
  model.reg = p.reg;
  const auto m = static_cast<Index>(sel.columns.size());
  Matrix y(ep.vectors.rows(), m);
  model.eigenvalues.resize(m);
  for (Index c = 0; c < m; ++c) {
    y.col(c) = ep.vectors.col(sel.columns[c]);
    model.eigenvalues(c) = ep.values(sel.columns[c]);
  }
  Matrix coef = sp.to_coefficients * y;
  flip_to_convention(coef, y);
  double worst = 0.0;
  for (Index c = 0; c < m; ++c) {
    worst = std::max(worst, pencil_residual(sp.a, b_reg, model.eigenvalues(c), y.col(c)));
  }
  model.domains = std::move(prep.blocks);
  Index row = 0;
  for (auto& blk : model.domains) {
    const Index rows = mode == AlignmentMode::Primal ? blk.dim : blk.retained.cols();
    blk.coefficients = coef.middleRows(row, rows);
    row += rows;
  }
  model.diagnostics = {worst, sel.threshold, ep.values.size(), sel.discarded,
                       sp.deflated, sp.right_shift, sp.left_shift, prep.total};
  return model;
}

}  // namespace

SolvedPencil solved_pencil(const AlignmentProblem& p, AlignmentMode mode,
                           const std::vector<std::vector<Index>>* representatives) {
  if (mode == AlignmentMode::Primal) return prepare_primal(p).pencil;
  if (mode == AlignmentMode::Reduced && !representatives) {
    throw Error(ErrorCode::EmptyRepresentativeSet, "reduced mode needs representatives");
  }
  return prepare_dual(p, mode == AlignmentMode::Reduced ? representatives : nullptr).pencil;
}

AlignmentModel fit_ssma(const AlignmentProblem& p) {
  return solve_prepared(prepare_primal(p), p, AlignmentMode::Primal);
}

AlignmentModel fit_kema(const AlignmentProblem& p) {
  return solve_prepared(prepare_dual(p, nullptr), p, AlignmentMode::Dual);
}

AlignmentModel fit_rekema(const AlignmentProblem& p,
                          const std::vector<std::vector<Index>>& representatives) {
  return solve_prepared(prepare_dual(p, &representatives), p, AlignmentMode::Reduced);
}

std::vector<std::vector<Index>> select_representatives(const std::vector<DomainDataset>& datasets,
                                                       double frac, std::uint64_t seed) {
  if (!(frac > 0.0 && frac <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "representative fraction must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Index>> out;
  for (const auto& ds : datasets) {
    const Index n = ds.size();
    const Index r = std::max<Index>(1, static_cast<Index>(std::floor(frac * static_cast<double>(n))));
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    // partial Fisher-Yates
    for (Index i = 0; i < r; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(r);
    std::sort(idx.begin(), idx.end());
    out.push_back(std::move(idx));
  }
  return out;
}

Matrix project(const AlignmentModel& model, std::size_t domain, const Matrix& x_new) {
  if (domain >= model.domains.size()) {
    throw Error(ErrorCode::UnknownDomain, "domain index " + std::to_string(domain));
  }
  const auto& blk = model.domains[domain];
  if (model.mode == AlignmentMode::Primal) {
    if (x_new.rows() != blk.dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "domain '" + blk.domain_id + "' expects dimension " + std::to_string(blk.dim));
    }
    require_finite(x_new, "projection input");
    return blk.coefficients.transpose() * x_new;
  }
  if (x_new.rows() != blk.retained.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "domain '" + blk.domain_id + "' expects dimension " +
                    std::to_string(blk.retained.rows()));
  }
  return blk.coefficients.transpose() * kernel_matrix(blk.kernel, blk.retained, x_new);
}

Matrix project(const AlignmentModel& model, const std::string& domain_id, const Matrix& x_new) {
  return project(model, model.domain_index(domain_id), x_new);
}

Matrix latent_basis(const AlignmentModel& model, std::size_t domain, Index m) {
  if (domain >= model.domains.size()) {
    throw Error(ErrorCode::UnknownDomain, "domain index " + std::to_string(domain));
  }
  const auto& blk = model.domains[domain];
  if (model.mode == AlignmentMode::Primal) return blk.coefficients.leftCols(m);
  if (blk.kernel.kind != KernelKind::Linear) {
    throw Error(ErrorCode::TargetKernelNotLinear,
                "domain '" + blk.domain_id + "' uses kernel " + to_string(blk.kernel) +
                    "; inversion needs a linear target");
  }
  return blk.retained * blk.coefficients.leftCols(m);
}

InversionResult invert(const AlignmentModel& model, std::size_t source, std::size_t target,
                       const Matrix& x_source, const InversionOptions& opts) {
  if (source >= model.domains.size() || target >= model.domains.size()) {
    throw Error(ErrorCode::UnknownDomain, "inversion domain out of range");
  }
  if (opts.num_features < 0) throw Error(ErrorCode::InvalidArgument, "negative feature count");
  const Index avail = model.num_features();
  Index m = opts.num_features == 0 ? std::min(model.domains[target].dim, avail)
                                   : static_cast<Index>(opts.num_features);
  if (m > avail) {
    throw Error(ErrorCode::InvalidArgument,
                "model has " + std::to_string(avail) + " features, " + std::to_string(m) +
                    " requested");
  }
  const Matrix u = latent_basis(model, target, m);
  const Matrix latent = project(model, source, x_source).topRows(m);
  InversionResult res;
  res.features_used = m;
  res.target_rank = numerical_rank(u, opts.rel_tol);
  res.rank_deficient = res.target_rank < u.rows();
  res.reconstruction = pseudo_inverse(u, opts.rel_tol).transpose() * latent;
  return res;
}

std::vector<Matrix> training_kernels(const AlignmentModel& model,
                                     const std::vector<DomainDataset>& datasets) {
  if (model.mode == AlignmentMode::Primal) {
    throw Error(ErrorCode::InvalidArgument, "primal models have no kernel blocks");
  }
  if (datasets.size() != model.domains.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset count differs from the model's");
  }
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto& blk = model.domains[i];
    out.push_back(kernel_matrix(blk.kernel, datasets[i].features, blk.retained));
  }
  return out;
}

DualPencil assemble_dual_pencil(const AlignmentProblem& problem, const AlignmentModel& model) {
  const Matrix knr = block_diagonal(training_kernels(model, problem.datasets));
  const JointGraphs g = build_joint_graphs(problem.datasets, problem.graph);
  const Matrix m_side = g.l + model.mu * g.ls;
  Matrix ld = g.ld;
  ld.diagonal().array() += model.diagnostics.right_shift;
  DualPencil dp;
  dp.a = knr.transpose() * m_side * knr;
  dp.b = knr.transpose() * ld * knr;
  Index rows = 0;
  for (const auto& blk : model.domains) rows += blk.coefficients.rows();
  dp.coefficients.resize(rows, model.num_features());
  Index r = 0;
  for (const auto& blk : model.domains) {
    dp.coefficients.middleRows(r, blk.coefficients.rows()) = blk.coefficients;
    r += blk.coefficients.rows();
  }
  return dp;
}

}  // namespace kema
