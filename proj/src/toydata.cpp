#include "kema/toydata.hpp"

#include <cmath>
#include <numbers>

#include "kema/errors.hpp"
#include "kema/toy_constants.hpp"

namespace kema {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Range {
  double start, end;
};

Range parameter_range(SpiralLayout layout, int classes) {
  if (layout == SpiralLayout::Arms) return {toy::kArmStart, toy::kArmStart + toy::kArmTurns * kTwoPi};
  return {toy::kSegmentStart, toy::kSegmentStart + classes * toy::kSegmentTurns * kTwoPi};
}

}  // namespace

double spiral_pitch(SpiralLayout layout, int classes) {
  return 1.0 / parameter_range(layout, classes).end;
}

std::vector<int> balanced_counts(int n, int classes) {
  std::vector<int> out(static_cast<std::size_t>(classes), n / classes);
  for (int c = 0; c < n % classes; ++c) ++out[static_cast<std::size_t>(c)];
  return out;
}

DomainDataset gen_spiral(const std::vector<int>& counts, const SpiralSpec& spec, double noise_std,
                         std::mt19937_64& rng) {
  const int classes = static_cast<int>(counts.size());
  if (classes < 2 || classes != spec.classes) {
    throw Error(ErrorCode::InvalidArgument, "spirals need at least two classes");
  }
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise must be nonnegative");
  int total = 0;
  for (int c : counts) {
    if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative class count");
    total += c;
  }
  const Range range = parameter_range(spec.layout, classes);
  const double a = 1.0 / range.end;
  const double sweep = toy::kSegmentTurns * kTwoPi;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  DomainDataset ds;
  ds.features.resize(2, total);
  ds.labels.reserve(static_cast<std::size_t>(total));
  Index col = 0;
  for (int c = 0; c < classes; ++c) {
    for (int s = 0; s < counts[static_cast<std::size_t>(c)]; ++s) {
      const double u = unif(rng);
      double t = 0.0, phase = 0.0;
      if (spec.layout == SpiralLayout::Arms) {
        t = range.start + (range.end - range.start) * u;
        phase = kTwoPi * c / classes;
      } else {
        t = range.start + sweep * (c + u);
      }
      if (spec.reverse_traversal) t = range.start + range.end - t;
      const double r = a * t;
      ds.features(0, col) = r * std::cos(t + phase);
      ds.features(1, col) = r * std::sin(t + phase);
      ds.labels.push_back(c + 1);
      ++col;
    }
  }
  if (noise_std > 0.0) {
    for (Index j = 0; j < total; ++j) {
      ds.features(0, j) += noise_std * gauss(rng);
      ds.features(1, j) += noise_std * gauss(rng);
    }
  }
  return ds;
}

DomainDataset gen_spiral(int n_per_class, int classes, double noise_std, std::uint64_t seed,
                         SpiralLayout layout, bool reverse_traversal) {
  if (n_per_class < 1) throw Error(ErrorCode::InvalidArgument, "n_per_class must be positive");
  std::mt19937_64 rng(seed);
  SpiralSpec spec{classes, layout, reverse_traversal};
  return gen_spiral(std::vector<int>(static_cast<std::size_t>(std::max(classes, 0)), n_per_class),
                    spec, noise_std, rng);
}

DomainDataset apply_distortion(const DomainDataset& ds, const DistortionSpec& spec, int classes) {
  std::mt19937_64 rng(spec.seed);
  return apply_distortion(ds, spec, classes, rng);
}

DomainDataset apply_distortion(const DomainDataset& ds, const DistortionSpec& spec, int classes,
                               std::mt19937_64& rng) {
  if (ds.dim() != 2) throw Error(ErrorCode::NotPlanar, "distortions apply to 2-D data");
  if (spec.scale && !(*spec.scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  }
  if (!(spec.noise_std >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise must be nonnegative");
  DomainDataset out = ds;
  Matrix& x = out.features;
  const Index n = x.cols();
  if (spec.as_line) {
    const double c = std::cos(toy::kLineAngle), s = std::sin(toy::kLineAngle);
    for (Index j = 0; j < n; ++j) {
      const double r = x.col(j).norm();
      x(0, j) = r * c;
      x(1, j) = r * s;
    }
  }
  if (spec.reverse_class_order) {
    for (int& l : out.labels) {
      if (l != 0) l = classes + 1 - l;
    }
  }
  if (spec.scale) x *= *spec.scale;
  if (spec.rotation) {
    const double c = std::cos(*spec.rotation), s = std::sin(*spec.rotation);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    x = rot * x;
  }
  if (spec.add_third_dim) {
    Matrix lifted(3, n);
    lifted.topRows(2) = x;
    for (Index j = 0; j < n; ++j) lifted(2, j) = toy::kLiftGain * x.col(j).squaredNorm();
    x = std::move(lifted);
  }
  if (spec.noise_std > 0.0) {
    std::normal_distribution<double> gauss(0.0, spec.noise_std);
    for (Index j = 0; j < n; ++j) {
      for (Index d = 0; d < x.rows(); ++d) x(d, j) += gauss(rng);
    }
  }
  return out;
}

ToyExperiment experiment_preset(int id, SampleSizes sizes) {
  ToyExperiment e;
  e.id = id;
  e.spiral.classes = toy::kClasses;
  e.domain1.noise_std = toy::kNoiseStd;
  e.domain2.noise_std = toy::kNoiseStd;
  switch (id) {
    case 1:
      e.spiral.layout = SpiralLayout::Arms;
      e.domain2.scale = toy::kScale;
      break;
    case 2:
      e.spiral.layout = SpiralLayout::Segments;
      e.domain1.add_third_dim = true;
      e.domain2.scale = toy::kScale;
      break;
    case 3:
      e.spiral.layout = SpiralLayout::Segments;
      e.domain1.as_line = true;
      e.domain1.add_third_dim = true;
      e.domain2.add_third_dim = true;
      break;
    case 4:
      e.spiral.layout = SpiralLayout::Segments;
      e.domain1.add_third_dim = true;
      e.domain2.scale = toy::kScale;
      e.domain2.rotation = toy::kRotation;
      e.domain2.reverse_class_order = true;
      e.domain2.add_third_dim = true;
      break;
    default:
      throw Error(ErrorCode::UnknownExperiment, "no experiment " + std::to_string(id));
  }
  if (sizes == SampleSizes::ReducedRankSweep) {
    e.labeled_per_class = toy::kSweepLabeledPerClass;
    e.unlabeled = toy::kSweepUnlabeledPerClass * toy::kClasses;
  } else {
    e.labeled_per_class = toy::kLabeledPerClass;
    e.unlabeled = toy::kUnlabeled;
  }
  e.test = toy::kTest;
  return e;
}

namespace {

DomainDataset concat(const DomainDataset& a, const DomainDataset& b) {
  DomainDataset out;
  out.features.resize(a.dim(), a.size() + b.size());
  out.features << a.features, b.features;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace

ExperimentData generate_experiment(const ToyExperiment& e, std::uint64_t seed) {
  if (e.labeled_per_class < 1 || e.unlabeled < 0 || e.test < 1) {
    throw Error(ErrorCode::InvalidArgument, "experiment sample counts are invalid");
  }
  std::mt19937_64 rng(seed);
  const int classes = e.spiral.classes;
  const std::vector<int> labeled(static_cast<std::size_t>(classes), e.labeled_per_class);
  const std::vector<int> unlabeled = balanced_counts(e.unlabeled, classes);
  ExperimentData out;
  const DistortionSpec* specs[2] = {&e.domain1, &e.domain2};
  for (int d = 0; d < 2; ++d) {
    DomainDataset lab = gen_spiral(labeled, e.spiral, 0.0, rng);
    DomainDataset unl = gen_spiral(unlabeled, e.spiral, 0.0, rng);
    std::fill(unl.labels.begin(), unl.labels.end(), 0);
    DomainDataset joint = apply_distortion(concat(lab, unl), *specs[d], classes, rng);
    joint.domain_id = std::to_string(d + 1);
    out.train.push_back(std::move(joint));
  }
  const DomainDataset base = gen_spiral(balanced_counts(e.test, classes), e.spiral, 0.0, rng);
  for (int d = 0; d < 2; ++d) {
    DomainDataset t = apply_distortion(base, *specs[d], classes, rng);
    t.domain_id = std::to_string(d + 1);
    out.test.push_back(std::move(t));
  }
  return out;
}

}  // namespace kema
