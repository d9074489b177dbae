#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "kema/errors.hpp"
#include "kema/toy_constants.hpp"
#include "kema/toydata.hpp"

using namespace kema;
using kema::test::max_abs;

TEST_CASE("one point per class") {
  for (SpiralLayout layout : {SpiralLayout::Arms, SpiralLayout::Segments}) {
    const DomainDataset ds = gen_spiral(1, 3, 0.0, 5, layout);
    REQUIRE(ds.size() == 3);
    CHECK(ds.labels == std::vector<int>{1, 2, 3});
    if (layout == SpiralLayout::Segments) {
      std::set<double> radii;
      for (Index j = 0; j < 3; ++j) radii.insert(std::round(ds.features.col(j).norm() * 1e9));
      CHECK(radii.size() == 3);
    }
  }
}

TEST_CASE("spirals are deterministic per seed") {
  const DomainDataset a = gen_spiral(30, 3, 0.05, 42);
  const DomainDataset b = gen_spiral(30, 3, 0.05, 42);
  const DomainDataset c = gen_spiral(30, 3, 0.05, 43);
  CHECK(max_abs(a.features - b.features) == 0.0);
  CHECK(a.labels == b.labels);
  CHECK(max_abs(a.features - c.features) > 0.0);
}

TEST_CASE("noise-free points lie on r = a * theta") {
  const double two_pi = 2.0 * std::numbers::pi;
  {
    const double a = spiral_pitch(SpiralLayout::Segments, 3);
    const DomainDataset ds = gen_spiral(50, 3, 0.0, 1, SpiralLayout::Segments);
    for (Index j = 0; j < ds.size(); ++j) {
      const double r = ds.features.col(j).norm();
      const double phi = std::atan2(ds.features(1, j), ds.features(0, j));
      // theta is phi plus some whole number of turns
      const double turns = (r / a - phi) / two_pi;
      CHECK(std::abs(turns - std::round(turns)) < 1e-9);
      CHECK(r <= 1.0 + 1e-12);
    }
  }
  {
    const double a = spiral_pitch(SpiralLayout::Arms, 3);
    const DomainDataset ds = gen_spiral(50, 3, 0.0, 1, SpiralLayout::Arms);
    for (Index j = 0; j < ds.size(); ++j) {
      const double r = ds.features.col(j).norm();
      if (r < 1e-12) continue;
      const double rot = two_pi * (ds.labels[j] - 1) / 3.0;
      const double phi = std::atan2(ds.features(1, j), ds.features(0, j)) - rot;
      const double turns = (r / a - phi) / two_pi;
      CHECK(std::abs(turns - std::round(turns)) < 1e-9);
    }
  }
}

TEST_CASE("distortions") {
  const DomainDataset ds = gen_spiral(10, 3, 0.0, 2);
  DistortionSpec id;
  CHECK(max_abs(apply_distortion(ds, id).features - ds.features) == 0.0);

  DistortionSpec sc;
  sc.scale = 2.0;
  const DomainDataset s = apply_distortion(ds, sc);
  for (Index i = 0; i < ds.size(); ++i)
    for (Index j = 0; j < ds.size(); ++j)
      CHECK(std::abs((s.features.col(i) - s.features.col(j)).norm() -
                     2.0 * (ds.features.col(i) - ds.features.col(j)).norm()) < 1e-12);

  DistortionSpec rv;
  rv.reverse_class_order = true;
  const DomainDataset r = apply_distortion(ds, rv);
  CHECK(max_abs(r.features - ds.features) == 0.0);
  for (Index j = 0; j < ds.size(); ++j) CHECK(r.labels[j] == 4 - ds.labels[j]);

  DistortionSpec rot;
  rot.rotation = std::numbers::pi / 2.0;
  const DomainDataset ro = apply_distortion(ds, rot);
  CHECK(std::abs(ro.features(0, 3) + ds.features(1, 3)) < 1e-12);
  CHECK(std::abs(ro.features(1, 3) - ds.features(0, 3)) < 1e-12);

  DistortionSpec lift;
  lift.add_third_dim = true;
  const DomainDataset l = apply_distortion(ds, lift);
  REQUIRE(l.dim() == 3);
  for (Index j = 0; j < ds.size(); ++j)
    CHECK(std::abs(l.features(2, j) - toy::kLiftGain * ds.features.col(j).squaredNorm()) < 1e-12);
  CHECK_THROWS_AS(apply_distortion(l, lift), Error);

  DistortionSpec line;
  line.as_line = true;
  const DomainDataset li = apply_distortion(ds, line);
  for (Index j = 0; j < ds.size(); ++j) {
    CHECK(std::abs(li.features.col(j).norm() - ds.features.col(j).norm()) < 1e-12);
    CHECK(std::abs(li.features(0, j) - li.features(1, j)) < 1e-12);
  }
}

TEST_CASE("experiment presets") {
  for (int id = 1; id <= 4; ++id) {
    const ExperimentData d = generate_experiment(experiment_preset(id), 3);
    REQUIRE(d.train.size() == 2);
    CHECK(d.train[0].size() == 60 + 1000);
    CHECK(d.train[0].labeled_count() == 60);
    CHECK(d.test[0].size() == 1000);
    CHECK(d.test[0].size() == d.test[1].size());
    CHECK(d.train[0].domain_id == "1");
    CHECK(d.train[1].domain_id == "2");
  }
  auto dims = [](int id) {
    const ExperimentData d = generate_experiment(experiment_preset(id), 0);
    return std::pair{d.train[0].dim(), d.train[1].dim()};
  };
  CHECK(dims(1) == std::pair<Index, Index>{2, 2});
  CHECK(dims(2) == std::pair<Index, Index>{3, 2});
  CHECK(dims(4) == std::pair<Index, Index>{3, 3});
  CHECK(experiment_preset(4).domain2.reverse_class_order);
  CHECK(!experiment_preset(4).domain1.reverse_class_order);

  const ExperimentData sw = generate_experiment(experiment_preset(1, SampleSizes::ReducedRankSweep), 0);
  CHECK(sw.train[0].size() == 450);
  CHECK(sw.train[0].labeled_count() == 300);
  CHECK_THROWS_AS(experiment_preset(5), Error);

  const ExperimentData a = generate_experiment(experiment_preset(2), 9);
  const ExperimentData b = generate_experiment(experiment_preset(2), 9);
  CHECK(max_abs(a.train[1].features - b.train[1].features) == 0.0);
  CHECK(balanced_counts(10, 3) == std::vector<int>{4, 3, 3});
}
