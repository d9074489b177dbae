#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "kema/graphs.hpp"

namespace kema {

enum class SpiralLayout { Arms, Segments };

struct SpiralSpec {
  int classes = 3;
  SpiralLayout layout = SpiralLayout::Segments;
  // run the curve parameter backwards (outer end first)
  bool reverse_traversal = false;
};

// Spiral constant a in r = a * t for the layout.
double spiral_pitch(SpiralLayout layout, int classes);

/// 2-D spiral samples, classes in contiguous column blocks, labels 1..C.
/// counts[c] samples of class c+1 with uniform random curve parameter.
DomainDataset gen_spiral(const std::vector<int>& counts, const SpiralSpec& spec, double noise_std,
                         std::mt19937_64& rng);
DomainDataset gen_spiral(int n_per_class, int classes, double noise_std, std::uint64_t seed,
                         SpiralLayout layout = SpiralLayout::Segments,
                         bool reverse_traversal = false);

struct DistortionSpec {
  std::optional<double> scale;
  std::optional<double> rotation;
  bool reverse_class_order = false;
  bool as_line = false;
  bool add_third_dim = false;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

/// as_line -> class reversal -> scale -> rotation -> lift -> noise.
DomainDataset apply_distortion(const DomainDataset& ds, const DistortionSpec& spec,
                               int classes = 3);
DomainDataset apply_distortion(const DomainDataset& ds, const DistortionSpec& spec, int classes,
                               std::mt19937_64& rng);

enum class SampleSizes { Standard, ReducedRankSweep };

struct ToyExperiment {
  int id = 1;
  SpiralSpec spiral;
  DistortionSpec domain1, domain2;
  int labeled_per_class = 20;
  int unlabeled = 1000;
  int test = 1000;
};

ToyExperiment experiment_preset(int id, SampleSizes sizes = SampleSizes::Standard);

struct ExperimentData {
  // domain ids "1" and "2"; unlabeled training columns carry label 0
  std::vector<DomainDataset> train;
  // test column j of both domains derives from the same curve point
  std::vector<DomainDataset> test;
};

ExperimentData generate_experiment(const ToyExperiment& exp, std::uint64_t seed);

// n split over classes as evenly as possible, earlier classes first.
std::vector<int> balanced_counts(int n, int classes);

}  // namespace kema
