#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "est/oracles.hpp"
#include "est/slicing.hpp"
#include "test_support.hpp"

using namespace est;

namespace {

// Two non-collinear three-atom measures; along e1 the atoms of weight
// 0.3 and 0.6 share a projection, as do the atoms of weight 0.3 and 0.2.
DiscreteMeasure worked_source() { return make_measure({{0, 0}, {1, 0}, {1, 1}}, {0.1, 0.3, 0.6}); }
DiscreteMeasure worked_target() { return make_measure({{0, 2}, {2, 0}, {2, 1}}, {0.5, 0.3, 0.2}); }
const std::vector<double> e1{1.0, 0.0};

ProjectedMeasure from_masses(std::vector<double> values, std::vector<double> masses) {
  ProjectedMeasure p;
  p.class_values = std::move(values);
  p.class_masses = masses;
  for (std::size_t k = 0; k <= masses.size(); ++k) p.offsets.push_back(k);
  for (std::size_t k = 0; k < masses.size(); ++k) {
    p.member_atoms.push_back(k);
    p.member_weights.push_back(masses[k]);
  }
  return p;
}

void expect_monotone(const OneDPlan& plan) {
  for (std::size_t k = 1; k < plan.entries.size(); ++k) {
    const auto& a = plan.entries[k - 1];
    const auto& b = plan.entries[k];
    EXPECT_TRUE(a.source_class < b.source_class ||
                (a.source_class == b.source_class && a.target_class < b.target_class));
    EXPECT_LE(a.target_class, b.target_class);  // no crossing
  }
}

void expect_marginals(const OneDPlan& plan, const ProjectedMeasure& s, const ProjectedMeasure& t,
                      double tol) {
  std::vector<double> rows(s.class_count(), 0.0), cols(t.class_count(), 0.0);
  for (const auto& e : plan.entries) {
    EXPECT_GT(e.mass, 0.0);
    rows[e.source_class] += e.mass;
    cols[e.target_class] += e.mass;
  }
  for (std::size_t a = 0; a < rows.size(); ++a) EXPECT_NEAR(rows[a], s.class_masses[a], tol);
  for (std::size_t b = 0; b < cols.size(); ++b) EXPECT_NEAR(cols[b], t.class_masses[b], tol);
}

}  // namespace

TEST(Project, WorkedExampleSourceClasses) {
  const auto p = project(worked_source(), e1);
  ASSERT_EQ(p.class_count(), 2u);
  EXPECT_NEAR(p.class_masses[0], 0.1, 1e-12);
  EXPECT_NEAR(p.class_masses[1], 0.9, 1e-12);
  ASSERT_EQ(p.members(1).size(), 2u);
  EXPECT_EQ(p.members(1)[0], 1u);
  EXPECT_EQ(p.members(1)[1], 2u);
}

TEST(Project, WorkedExampleTargetClasses) {
  const auto p = project(worked_target(), e1);
  ASSERT_EQ(p.class_count(), 2u);
  EXPECT_NEAR(p.class_masses[0], 0.5, 1e-12);
  EXPECT_NEAR(p.class_masses[1], 0.5, 1e-12);
}

TEST(Project, DistinctProjectionsGiveSingletons) {
  const auto m = make_measure({{3, 1}, {-1, 5}, {2, 2}, {0.5, -4}}, {0.1, 0.2, 0.3, 0.4});
  const auto p = project(m, e1);
  ASSERT_EQ(p.class_count(), 4u);
  const std::vector<std::size_t> sorted_atoms{1, 3, 2, 0};
  for (std::size_t k = 0; k < 4; ++k) {
    ASSERT_EQ(p.members(k).size(), 1u);
    EXPECT_EQ(p.members(k)[0], sorted_atoms[k]);
    EXPECT_EQ(p.class_masses[k], m.weight(sorted_atoms[k]));
  }
  EXPECT_TRUE(std::is_sorted(p.class_values.begin(), p.class_values.end()));
}

TEST(Project, RejectsNonUnitDirection) {
  try {
    project(worked_source(), std::vector<double>{1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonUnitDirection);
  }
}

TEST(Project, ClassInvariantsOnRandomMeasures) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = est_test::random_measure(rng, 1 + trial % 25, 1 + trial % 5);
    const auto p = project(m, est_test::random_direction(rng, m.dim()));
    double total = 0.0;
    std::vector<int> seen(m.size(), 0);
    for (std::size_t k = 0; k < p.class_count(); ++k) {
      if (k > 0) {
        EXPECT_LT(p.class_values[k - 1], p.class_values[k]);
      }
      double s = 0.0;
      for (std::size_t i : p.members(k)) {
        ++seen[i];
        s += m.weight(i);
      }
      EXPECT_NEAR(s, p.class_masses[k], 1e-12);
      total += p.class_masses[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(Project, ExactTiesMergeWithZeroTolerance) {
  // Integer grid: along e1 several atoms project onto exactly equal values.
  const auto m = make_measure({{0, 0}, {0, 1}, {1, 5}, {2, 3}, {1, -2}, {2, 2}},
                              {0.1, 0.2, 0.15, 0.25, 0.2, 0.1});
  const auto exact = project(m, e1, 0.0);
  const auto tolerant = project(m, e1, 1e-9);
  EXPECT_EQ(exact.class_count(), 3u);
  EXPECT_EQ(exact.class_values, tolerant.class_values);
  EXPECT_EQ(exact.class_masses, tolerant.class_masses);
  EXPECT_EQ(exact.member_atoms, tolerant.member_atoms);
  EXPECT_EQ(exact.offsets, tolerant.offsets);
}

TEST(Project, NearTiesMergeWithinRelativeTolerance) {
  const auto m = make_measure({{1000.0}, {1000.0 + 1e-7}, {1000.0 + 1e-3}}, {0.2, 0.3, 0.5});
  const std::vector<double> up{1.0};
  EXPECT_EQ(project(m, up).class_count(), 2u);       // 1e-9 · 1000 = 1e-6 absolute
  EXPECT_EQ(project(m, up, 0.0).class_count(), 3u);
}

TEST(Solve1d, WorkedExamplePlan) {
  const auto s = from_masses({0.0, 1.0}, {0.1, 0.9});
  const auto t = from_masses({0.0, 1.0}, {0.5, 0.5});
  const auto plan = solve_1d(s, t);
  ASSERT_EQ(plan.entries.size(), 3u);
  EXPECT_EQ(plan.entries[0].source_class, 0u);
  EXPECT_EQ(plan.entries[0].target_class, 0u);
  EXPECT_NEAR(plan.entries[0].mass, 0.1, 1e-12);
  EXPECT_EQ(plan.entries[1].source_class, 1u);
  EXPECT_EQ(plan.entries[1].target_class, 0u);
  EXPECT_NEAR(plan.entries[1].mass, 0.4, 1e-12);
  EXPECT_EQ(plan.entries[2].source_class, 1u);
  EXPECT_EQ(plan.entries[2].target_class, 1u);
  EXPECT_NEAR(plan.entries[2].mass, 0.5, 1e-12);
}

TEST(Solve1d, IdenticalMeasuresGiveDiagonal) {
  const auto s = from_masses({-1.0, 0.5, 2.0, 7.0}, {0.1, 0.2, 0.3, 0.4});
  const auto plan = solve_1d(s, s);
  ASSERT_EQ(plan.entries.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(plan.entries[k], (OneDEntry{k, k, s.class_masses[k]}));
  }
}

TEST(Solve1d, UniformGivesRankMatching) {
  // Along e1: x sorted order is atoms (1, 0, 2), y sorted order is atoms (0, 2, 1).
  const auto x = make_measure({{1, 0}, {0, 3}, {2, 1}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto y = make_measure({{0, 0}, {5, 1}, {1, 2}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto px = project(x, e1), py = project(y, e1);
  const auto plan = solve_1d(px, py);
  ASSERT_EQ(plan.entries.size(), 3u);
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{1, 0}, {0, 2}, {2, 1}};
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(plan.entries[k].source_class, k);
    EXPECT_EQ(plan.entries[k].target_class, k);
    EXPECT_NEAR(plan.entries[k].mass, 1.0 / 3, 1e-15);
    EXPECT_EQ(px.members(k)[0], expected[k].first);
    EXPECT_EQ(py.members(k)[0], expected[k].second);
  }
}

TEST(Solve1d, MassImbalance) {
  const auto s = from_masses({0.0}, {1.0});
  const auto t = from_masses({0.0, 1.0}, {0.5, 0.4});
  try {
    solve_1d(s, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MassImbalance);
  }
}

TEST(Solve1d, RandomInstancesMatchQuantileOracle) {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + trial % 4;
    const bool uniform = trial % 2 == 0;
    const auto a = est_test::random_measure(rng, 2 + trial % 17, d, uniform);
    const auto b = est_test::random_measure(rng, 1 + trial % 11, d, uniform);
    const auto theta = est_test::random_direction(rng, d);
    const auto pa = project(a, theta), pb = project(b, theta);
    const auto plan = solve_1d(pa, pb);
    expect_monotone(plan);
    expect_marginals(plan, pa, pb, 1e-12);
    const double w = wasserstein_1d(pa.class_values, pa.class_masses, pb.class_values, pb.class_masses, 2.0);
    EXPECT_NEAR(std::sqrt(oned_cost_pow(plan, pa, pb, 2.0)), w, 1e-10);
  }
}

TEST(Solve1d, InvariantUnderAtomPermutation) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = est_test::random_measure(rng, 9, 3);
    const auto b = est_test::random_measure(rng, 7, 3);
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a_perm = est_test::permuted(a, perm);
    const auto theta = est_test::random_direction(rng, 3);
    const auto pa = project(a, theta), pa_perm = project(a_perm, theta), pb = project(b, theta);
    EXPECT_EQ(pa.class_values, pa_perm.class_values);
    EXPECT_EQ(pa.class_masses, pa_perm.class_masses);
    EXPECT_EQ(solve_1d(pa, pb), solve_1d(pa_perm, pb));
  }
}

TEST(SampleSphere, OneDimensionalAlternates) {
  const auto dirs = sample_sphere(4, 1, 12345);
  ASSERT_EQ(dirs.size(), 4u);
  EXPECT_EQ(dirs[0][0], 1.0);
  EXPECT_EQ(dirs[1][0], -1.0);
  EXPECT_EQ(dirs[2][0], 1.0);
  EXPECT_EQ(dirs[3][0], -1.0);
}

TEST(SampleSphere, UnitNorms) {
  const auto dirs = sample_sphere(256, 3, 7);
  for (std::size_t l = 0; l < dirs.size(); ++l) {
    double sq = 0.0;
    for (double c : dirs[l]) sq += c * c;
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-12);
  }
}

TEST(SampleSphere, MeanDirectionNearZero) {
  const auto dirs = sample_sphere(4096, 2, 1);
  double mx = 0.0, my = 0.0;
  for (std::size_t l = 0; l < dirs.size(); ++l) {
    mx += dirs[l][0];
    my += dirs[l][1];
  }
  mx /= 4096.0;
  my /= 4096.0;
  EXPECT_LT(std::hypot(mx, my), 0.05);
}

TEST(SampleSphere, DeterministicPerSeed) {
  EXPECT_EQ(sample_sphere(16, 5, 99), sample_sphere(16, 5, 99));
  EXPECT_NE(sample_sphere(16, 5, 99), sample_sphere(16, 5, 100));
}
