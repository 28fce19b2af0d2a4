#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "est/error.hpp"
#include "est/measure.hpp"

namespace est {

/// Relative grouping tolerance: projections closer than
/// kDefaultGroupingTol · max(1, max |θ·x|) share an equivalence class.
inline constexpr double kDefaultGroupingTol = 1e-9;
inline constexpr double kUnitNormTolerance = 1e-12;
inline constexpr double kResidualClamp = 1e-15;

/// One-dimensional quotient of a measure along a direction. Atoms with the
/// same projection form one class; members are stored in CSR layout.
struct ProjectedMeasure {
  std::vector<double> class_values;    // strictly increasing
  std::vector<double> class_masses;    // P(class) = sum of member weights
  std::vector<std::size_t> offsets;    // class k owns members [offsets[k], offsets[k+1])
  std::vector<std::size_t> member_atoms;
  std::vector<double> member_weights;

  std::size_t class_count() const noexcept { return class_values.size(); }
  std::span<const std::size_t> members(std::size_t k) const noexcept {
    return {member_atoms.data() + offsets[k], offsets[k + 1] - offsets[k]};
  }
  std::span<const double> member_weights_of(std::size_t k) const noexcept {
    return {member_weights.data() + offsets[k], offsets[k + 1] - offsets[k]};
  }
};

struct OneDEntry {
  std::size_t source_class = 0;
  std::size_t target_class = 0;
  double mass = 0.0;

  friend bool operator==(const OneDEntry&, const OneDEntry&) = default;
};

/// Monotone coupling between the classes of two projected measures,
/// entries in lexicographic (source_class, target_class) order.
struct OneDPlan {
  std::vector<OneDEntry> entries;

  friend bool operator==(const OneDPlan&, const OneDPlan&) = default;
};

/// L unit vectors in R^d, row-major.
class Directions {
 public:
  Directions() = default;
  Directions(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 || coords_.size() % dim_ != 0) {
      throw Error(ErrorCode::DimensionMismatch, "direction buffer is not a multiple of dim");
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }
  std::span<const double> operator[](std::size_t l) const noexcept {
    return {coords_.data() + l * dim_, dim_};
  }
  std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const Directions&, const Directions&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

inline void check_unit(std::span<const double> direction) {
  double sq = 0.0;
  for (double c : direction) sq += c * c;
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::NonUnitDirection, "direction norm is " + std::to_string(std::sqrt(sq)));
  }
}

/// Pushes the measure forward under x ↦ θ·x and groups equal projections.
///
/// Atoms are sorted by (θ·x, index). A class opens at its smallest value and
/// absorbs every following projection within the absolute tolerance of that
/// representative. Exact ties always merge, even with grouping_tol = 0.
inline ProjectedMeasure project(const DiscreteMeasure& measure, std::span<const double> direction,
                                double grouping_tol = kDefaultGroupingTol) {
  if (direction.size() != measure.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "direction and measure dimensions differ");
  }
  check_unit(direction);
  if (!(grouping_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "grouping_tol must be >= 0");

  const std::size_t n = measure.size();
  std::vector<double> values(n);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = measure.atom(i);
    double v = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) v += direction[k] * x[k];
    values[i] = v;
    scale = std::max(scale, std::abs(v));
  }
  const double tol = grouping_tol * scale;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });

  ProjectedMeasure out;
  out.member_atoms = order;
  out.member_weights.resize(n);
  out.offsets.push_back(0);
  double rep = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    out.member_weights[k] = measure.weight(i);
    if (k == 0 || values[i] - rep > tol) {
      if (k != 0) out.offsets.push_back(k);
      rep = values[i];
      out.class_values.push_back(rep);
      out.class_masses.push_back(0.0);
    }
    out.class_masses.back() += measure.weight(i);
  }
  out.offsets.push_back(n);
  return out;
}

/// North-west-corner sweep over sorted classes: the unique monotone (and
/// optimal) coupling of two one-dimensional measures.
inline OneDPlan solve_1d(const ProjectedMeasure& source, const ProjectedMeasure& target) {
  double total_s = 0.0, total_t = 0.0;
  for (double m : source.class_masses) total_s += m;
  for (double m : target.class_masses) total_t += m;
  if (std::abs(total_s - total_t) > kWeightSumTolerance) {
    throw Error(ErrorCode::MassImbalance, "projected masses " + std::to_string(total_s) + " and " +
                                              std::to_string(total_t) + " differ");
  }

  OneDPlan plan;
  const std::size_t ns = source.class_count();
  const std::size_t nt = target.class_count();
  plan.entries.reserve(ns + nt);
  std::size_t a = 0, b = 0;
  double ra = ns ? source.class_masses[0] : 0.0;
  double rb = nt ? target.class_masses[0] : 0.0;
  while (a < ns && b < nt) {
    const double m = std::min(ra, rb);
    if (m > 0.0) plan.entries.push_back({a, b, m});
    ra -= m;
    rb -= m;
    if (ra <= kResidualClamp) {
      if (++a < ns) ra = source.class_masses[a];
    }
    if (rb <= kResidualClamp) {
      if (++b < nt) rb = target.class_masses[b];
    }
  }
  return plan;
}

/// ∑ mass · |u_a − v_b|^p over a one-dimensional plan.
inline double oned_cost_pow(const OneDPlan& plan, const ProjectedMeasure& source,
                            const ProjectedMeasure& target, double p) {
  double total = 0.0;
  for (const auto& e : plan.entries) {
    const double diff = std::abs(source.class_values[e.source_class] - target.class_values[e.target_class]);
    total += e.mass * (p == 2.0 ? diff * diff : std::pow(diff, p));
  }
  return total;
}

/// L i.i.d. directions, uniform on S^{d-1}: normalized standard-normal draws.
/// For d = 1 the sphere is {+1, −1} and the directions alternate.
inline Directions sample_sphere(std::size_t count, std::size_t dim, std::uint64_t seed) {
  if (count == 0 || dim == 0) throw Error(ErrorCode::InvalidArgument, "need L >= 1 and d >= 1");
  std::vector<double> coords(count * dim);
  if (dim == 1) {
    for (std::size_t l = 0; l < count; ++l) coords[l] = (l % 2 == 0) ? 1.0 : -1.0;
    return Directions(1, std::move(coords));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < count; ++l) {
    double* row = coords.data() + l * dim;
    double norm = 0.0;
    do {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        row[k] = normal(rng);
        sq += row[k] * row[k];
      }
      norm = std::sqrt(sq);
    } while (norm < 1e-12);
    for (std::size_t k = 0; k < dim; ++k) row[k] /= norm;
  }
  return Directions(dim, std::move(coords));
}

}  // namespace est
