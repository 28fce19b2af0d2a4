#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "est/error.hpp"

namespace est {

inline constexpr double kWeightSumTolerance = 1e-9;
inline constexpr double kCouplingTolerance = 1e-9;

/// Finite discrete probability measure: atoms x_i in R^d with weights p(x_i) > 0.
///
/// Atoms are stored row-major in one flat buffer. Duplicate coordinates are
/// kept as distinct atoms; everything downstream addresses atoms by index.
class DiscreteMeasure {
 public:
  /// Validates and normalizes. Zero-weight atoms are dropped, the remaining
  /// weights are rescaled to sum to exactly 1, and atom order is preserved.
  static DiscreteMeasure from_flat(std::size_t dim, std::vector<double> coords,
                                   std::vector<double> weights) {
    if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be at least 1");
    if (coords.size() != dim * weights.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "coordinate buffer holds " + std::to_string(coords.size()) + " values, expected " +
                      std::to_string(dim * weights.size()));
    }
    for (double c : coords) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite atom coordinate");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
      }
      total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::NonPositiveTotalMass, "total mass is zero");
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw Error(ErrorCode::WeightSumOutOfTolerance,
                  "weights sum to " + std::to_string(total) + ", expected 1");
    }

    DiscreteMeasure m;
    m.dim_ = dim;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] == 0.0) continue;
      m.weights_.push_back(weights[i]);
      m.coords_.insert(m.coords_.end(), coords.begin() + static_cast<std::ptrdiff_t>(i * dim),
                       coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    }
    m.renormalize();
    return m;
  }

  static DiscreteMeasure from_atoms(const std::vector<std::vector<double>>& atoms,
                                    std::vector<double> weights) {
    if (atoms.empty()) throw Error(ErrorCode::NonPositiveTotalMass, "measure has no atoms");
    if (atoms.size() != weights.size()) {
      throw Error(ErrorCode::DimensionMismatch, "atom and weight counts differ");
    }
    const std::size_t dim = atoms.front().size();
    std::vector<double> coords;
    coords.reserve(dim * atoms.size());
    for (const auto& a : atoms) {
      if (a.size() != dim) throw Error(ErrorCode::DimensionMismatch, "atoms have mixed dimensions");
      coords.insert(coords.end(), a.begin(), a.end());
    }
    return from_flat(dim, std::move(coords), std::move(weights));
  }

  /// Equal mass 1/n on every atom.
  static DiscreteMeasure uniform(std::size_t dim, std::vector<double> coords) {
    if (dim == 0 || coords.size() % dim != 0) {
      throw Error(ErrorCode::DimensionMismatch, "coordinate buffer is not a multiple of dim");
    }
    const std::size_t n = coords.size() / dim;
    return from_flat(dim, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> atom(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  DiscreteMeasure() = default;

  // Sum in ascending order so the result does not depend on atom order.
  static double ordered_sum(std::vector<double> w) {
    std::sort(w.begin(), w.end());
    double s = 0.0;
    for (double v : w) s += v;
    return s;
  }

  void renormalize() {
    const double total = ordered_sum(weights_);
    if (total == 1.0) return;
    for (double& w : weights_) w /= total;
    // Push the rounding residual into the heaviest atom until the
    // ordered sum is exactly 1.
    const auto heaviest = static_cast<std::size_t>(
        std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
    for (int pass = 0; pass < 4; ++pass) {
      const double s = ordered_sum(weights_);
      if (s == 1.0) break;
      weights_[heaviest] += 1.0 - s;
    }
  }

  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

inline DiscreteMeasure make_measure(const std::vector<std::vector<double>>& atoms,
                                    std::vector<double> weights) {
  return DiscreteMeasure::from_atoms(atoms, std::move(weights));
}

struct PlanEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

/// Sparse coupling between two measures, addressed by atom index.
struct TransportPlan {
  std::size_t source_size = 0;
  std::size_t target_size = 0;
  std::vector<PlanEntry> entries;

  friend bool operator==(const TransportPlan&, const TransportPlan&) = default;
};

/// Sorts entries by (source, target) and merges repeated pairs.
inline void canonicalize(TransportPlan& plan) {
  auto& e = plan.entries;
  std::sort(e.begin(), e.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  std::size_t out = 0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (out > 0 && e[out - 1].source == e[k].source && e[out - 1].target == e[k].target) {
      e[out - 1].mass += e[k].mass;
    } else {
      e[out++] = e[k];
    }
  }
  e.resize(out);
}

inline TransportPlan transpose(const TransportPlan& plan) {
  TransportPlan t{plan.target_size, plan.source_size, {}};
  t.entries.reserve(plan.entries.size());
  for (const auto& e : plan.entries) t.entries.push_back({e.target, e.source, e.mass});
  canonicalize(t);
  return t;
}

/// ‖x − y‖^p, exact for p = 2.
inline double ground_cost(std::span<const double> x, std::span<const double> y, double p) {
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    sq += diff * diff;
  }
  if (p == 2.0) return sq;
  return std::pow(sq, 0.5 * p);
}

/// Sum of mass · ‖x_i − y_j‖^p, without the final root.
inline double plan_cost_pow(const TransportPlan& plan, const DiscreteMeasure& source,
                            const DiscreteMeasure& target, double p) {
  if (plan.source_size != source.size() || plan.target_size != target.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "plan shape does not match the measures");
  }
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  double total = 0.0;
  for (const auto& e : plan.entries) {
    if (e.source >= source.size() || e.target >= target.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "plan entry index out of range");
    }
    total += e.mass * ground_cost(source.atom(e.source), target.atom(e.target), p);
  }
  return total;
}

/// (∑ mass · ‖x_i − y_j‖^p)^{1/p}.
inline double plan_cost(const TransportPlan& plan, const DiscreteMeasure& source,
                        const DiscreteMeasure& target, double p = 2.0) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "cost exponent must be >= 1");
  return std::pow(plan_cost_pow(plan, source, target, p), 1.0 / p);
}

struct CouplingCheck {
  bool valid = false;
  double max_deviation = 0.0;
};

/// Compares row and column sums of the plan with the two weight vectors.
/// Out-of-range or nonpositive entries make the plan invalid with infinite deviation.
inline CouplingCheck validate_coupling(const TransportPlan& plan, const DiscreteMeasure& source,
                                       const DiscreteMeasure& target,
                                       double tolerance = kCouplingTolerance) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (plan.source_size != source.size() || plan.target_size != target.size()) return {false, inf};
  std::vector<double> rows(source.size(), 0.0);
  std::vector<double> cols(target.size(), 0.0);
  for (const auto& e : plan.entries) {
    if (e.source >= source.size() || e.target >= target.size() || !(e.mass > 0.0) ||
        !std::isfinite(e.mass)) {
      return {false, inf};
    }
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) dev = std::max(dev, std::abs(rows[i] - source.weight(i)));
  for (std::size_t j = 0; j < cols.size(); ++j) dev = std::max(dev, std::abs(cols[j] - target.weight(j)));
  return {dev <= tolerance, dev};
}

}  // namespace est
