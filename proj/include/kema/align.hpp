#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kema/graphs.hpp"
#include "kema/kernels.hpp"
#include "kema/linalg.hpp"

namespace kema {

enum class AlignmentMode { Primal, Dual, Reduced };

std::string to_string(AlignmentMode mode);
AlignmentMode parse_mode(const std::string& text);

inline constexpr double kZeroEigenvalueThreshold = 1e-9;
inline constexpr double kLeftRidge = 1e-12;
// eigenvalues of A + B below this fraction of the largest mark directions
// both pencil sides annihilate; they are projected out before solving
inline constexpr double kSharedNullTolerance = 1e-9;
// relative singular value cutoff for the range basis of each kernel block
inline constexpr double kRangeTolerance = 1e-10;
// relative cutoff for the target-basis pseudo-inverse in inversion
inline constexpr double kInversionTolerance = 1e-4;

struct AlignmentProblem {
  std::vector<DomainDataset> datasets;
  // one per domain; ignored by the primal solver
  std::vector<KernelSpec> kernels;
  GraphConfig graph;
  double mu = 1.0;
  // 0 selects min(20, surviving components)
  int num_features = 0;
  double reg = kDefaultRegularization;
  SigmaScope sigma_scope = SigmaScope::Pooled;
};

void validate_problem(const AlignmentProblem& problem, bool need_kernels);

struct DomainBlock {
  std::string domain_id;
  Index dim = 0;
  // offset of the domain inside the joint sample ordering used at fit time
  Index offset = 0;
  // primal: d x m projection vectors; dual and reduced: r x m expansion
  // coefficients over the retained samples
  Matrix coefficients;
  // columns the coefficients expand over (dual and reduced)
  Matrix retained;
  KernelSpec kernel;
  // reduced mode: indices of the retained columns in the training set
  std::vector<Index> representatives;
  // rank of the kernel block after the range cutoff
  Index range_rank = 0;
};

struct FitDiagnostics {
  double max_residual = 0.0;
  double zero_threshold = 0.0;
  Index candidates = 0;
  Index discarded = 0;
  Index deflated = 0;
  // diagonal shift added to the dissimilarity side of the solved pencil
  double right_shift = 0.0;
  double left_shift = 0.0;
  Index total_samples = 0;
};

struct AlignmentModel {
  AlignmentMode mode = AlignmentMode::Primal;
  Vector eigenvalues;
  std::vector<DomainBlock> domains;
  double mu = 1.0;
  double reg = kDefaultRegularization;
  FitDiagnostics diagnostics;

  Index num_features() const { return eigenvalues.size(); }
  std::size_t domain_index(const std::string& id) const;
};

/// Primal solve over stacked feature dimensions.
AlignmentModel fit_ssma(const AlignmentProblem& problem);

/// Dual solve with every training sample as an expansion point.
AlignmentModel fit_kema(const AlignmentProblem& problem);

/// Dual solve with expansions restricted to the given per-domain sample
/// indices. With all indices it reproduces fit_kema.
AlignmentModel fit_rekema(const AlignmentProblem& problem,
                          const std::vector<std::vector<Index>>& representatives);

/// Uniform draw without replacement of max(1, floor(frac * n_i)) indices per
/// domain, returned sorted.
std::vector<std::vector<Index>> select_representatives(const std::vector<DomainDataset>& datasets,
                                                       double frac, std::uint64_t seed);

/// Latent coordinates (m x n_new) of new samples of one domain.
Matrix project(const AlignmentModel& model, std::size_t domain, const Matrix& x_new);
Matrix project(const AlignmentModel& model, const std::string& domain_id, const Matrix& x_new);

struct InversionOptions {
  // 0 selects the target dimension, capped by the model's feature count
  int num_features = 0;
  double rel_tol = kInversionTolerance;
};

struct InversionResult {
  Matrix reconstruction;
  Index features_used = 0;
  Index target_rank = 0;
  // rank of the latent basis of the target below its dimension
  bool rank_deficient = false;
};

/// Maps source samples through the latent space into the target feature space
/// with the pseudo-inverse of the target latent basis. The target domain must
/// use a linear kernel in dual and reduced modes.
InversionResult invert(const AlignmentModel& model, std::size_t source, std::size_t target,
                       const Matrix& x_source, const InversionOptions& opts = {});

/// Latent basis of the target domain (d x m): v_i or X_i alpha_i.
Matrix latent_basis(const AlignmentModel& model, std::size_t domain, Index m);

/// The pencil a fit actually solves, before the right-side shift: shared null
/// directions deflated and the left ridge added. to_coefficients maps its
/// coordinates to the stacked model coefficients (v for primal, alpha for
/// dual and reduced).
struct SolvedPencil {
  Matrix a;
  Matrix b;
  Matrix to_coefficients;
  double left_shift = 0.0;
  double right_shift = 0.0;
  Index deflated = 0;
};
SolvedPencil solved_pencil(const AlignmentProblem& problem, AlignmentMode mode,
                           const std::vector<std::vector<Index>>* representatives = nullptr);

/// Full-size dual pencil of a fitted dual or reduced model, with the
/// right-side shift used at fit time: K_rn (L + mu Ls) K_nr and
/// K_rn (Ld + shift I) K_nr. The problem must be the one the model was fitted on.
struct DualPencil {
  Matrix a;
  Matrix b;
  Matrix coefficients;  // stacked alpha, one column per component
};
DualPencil assemble_dual_pencil(const AlignmentProblem& problem, const AlignmentModel& model);

// Kernel matrices K_nr per domain between training samples and retained columns.
std::vector<Matrix> training_kernels(const AlignmentModel& model,
                                     const std::vector<DomainDataset>& datasets);

}  // namespace kema
