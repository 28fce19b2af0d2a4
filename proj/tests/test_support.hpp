#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "est/measure.hpp"
#include "est/slicing.hpp"

namespace est_test {
using namespace est;

/// Gaussian atoms, exponential weights normalized to 1.
inline DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                      bool uniform_weights = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> coords(n * d);
  for (double& c : coords) c = normal(rng);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = uniform_weights ? 1.0 : 0.05 + expo(rng);
    total += x;
  }
  for (double& x : w) x /= total;
  return DiscreteMeasure::from_flat(d, std::move(coords), std::move(w));
}

inline std::vector<double> random_direction(std::mt19937_64& rng, std::size_t d) {
  const auto dirs = sample_sphere(1, d, rng());
  const auto row = dirs[0];
  return {row.begin(), row.end()};
}

/// Same atoms and weights in a shuffled order; perm[k] is the original index of new atom k.
inline DiscreteMeasure permuted(const DiscreteMeasure& m, const std::vector<std::size_t>& perm) {
  std::vector<double> coords, weights;
  for (std::size_t k : perm) {
    const auto a = m.atom(k);
    coords.insert(coords.end(), a.begin(), a.end());
    weights.push_back(m.weight(k));
  }
  return DiscreteMeasure::from_flat(m.dim(), std::move(coords), std::move(weights));
}

inline std::vector<double> row_sums(const TransportPlan& plan) {
  std::vector<double> rows(plan.source_size, 0.0);
  for (const auto& e : plan.entries) rows[e.source] += e.mass;
  return rows;
}

}  // namespace est_test
