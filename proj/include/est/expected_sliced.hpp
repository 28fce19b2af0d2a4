#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "est/error.hpp"
#include "est/lifting.hpp"
#include "est/measure.hpp"
#include "est/parallel.hpp"
#include "est/slicing.hpp"

namespace est {

/// Directions θ^1..θ^L with the probability each one carries.
struct SliceSet {
  Directions directions;
  std::vector<double> weights;

  static SliceSet uniform(Directions directions) {
    const std::size_t n = directions.size();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "slice set is empty");
    return {std::move(directions), std::vector<double>(n, 1.0 / static_cast<double>(n))};
  }

  std::size_t size() const noexcept { return directions.size(); }

  void validate() const {
    if (directions.empty()) throw Error(ErrorCode::InvalidArgument, "slice set is empty");
    if (weights.size() != directions.size()) {
      throw Error(ErrorCode::InvalidArgument, "slice weight count differs from direction count");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error(ErrorCode::InvalidArgument, "slice weights must be finite and nonnegative");
      }
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw Error(ErrorCode::WeightSumOutOfTolerance, "slice weights do not sum to 1");
    }
    }
};

struct EstOptions {
  double grouping_tol = kDefaultGroupingTol;
  unsigned threads = 0;  // 0: default_thread_count()
};

struct EstResult {
  TransportPlan plan;                  // expected sliced plan γ̄
  double distance = 0.0;               // D_p
  std::vector<double> per_slice_costs; // D_p(μ, ν; θ^l), not raised to p
  std::vector<double> slice_weights;
};

/// Softmax of −τ · cost over slices, shifted by the minimum cost.
/// τ = 0 gives uniform weights; a large τ concentrates on the cheapest slice.
inline std::vector<double> sigma_tau_weights(std::span<const double> costs_pow, double tau) {
  if (costs_pow.empty()) throw Error(ErrorCode::InvalidArgument, "no slice costs");
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be >= 0");
  double lo = std::numeric_limits<double>::infinity();
  for (double c : costs_pow) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "slice cost is not finite");
    lo = std::min(lo, c);
  }
  std::vector<double> w(costs_pow.size());
  double total = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    const double shifted = costs_pow[l] - lo;
    w[l] = shifted == 0.0 ? 1.0 : std::exp(-tau * shifted);
    total += w[l];
  }
  for (double& x : w) x /= total;
  return w;
}

namespace detail {

inline void check_pair(const DiscreteMeasure& source, const DiscreteMeasure& target,
                       const Directions& directions) {
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  if (directions.empty()) throw Error(ErrorCode::InvalidArgument, "no slice directions");
  if (directions.dim() != source.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "directions and measures differ in dimension");
  }
}

inline std::vector<SlicePlan> slice_plans(const DiscreteMeasure& source, const DiscreteMeasure& target,
                                          const Directions& directions, double p,
                                          const EstOptions& opts) {
  check_pair(source, target, directions);
  std::vector<SlicePlan> out(directions.size());
  parallel_for(directions.size(), opts.threads, [&](std::size_t l) {
    out[l] = lift_for_direction(source, target, directions[l], p, opts.grouping_tol);
  });
  return out;
}

/// Weighted sum of per-slice plans. Contributions to each (i, j) are added
/// in slice order; keys come out in lexicographic order.
inline EstResult aggregate(const std::vector<SlicePlan>& slices, std::vector<double> weights,
                           std::size_t n, std::size_t m, double p) {
  struct Piece {
    std::size_t source, target, slice;
    double mass;
  };
  std::size_t total = 0;
  for (const auto& s : slices) total += s.plan.entries.size();
  std::vector<Piece> pieces;
  pieces.reserve(total);
  double cost_pow = 0.0;
  EstResult result;
  result.per_slice_costs.reserve(slices.size());
  for (std::size_t l = 0; l < slices.size(); ++l) {
    result.per_slice_costs.push_back(slices[l].cost);
    cost_pow += weights[l] * slices[l].cost_pow;
    if (weights[l] == 0.0) continue;
    for (const auto& e : slices[l].plan.entries) {
      const double mass = weights[l] * e.mass;
      if (mass > 0.0) pieces.push_back({e.source, e.target, l, mass});
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.target != b.target) return a.target < b.target;
    return a.slice < b.slice;
  });
  result.plan = TransportPlan{n, m, {}};
  for (const auto& piece : pieces) {
    auto& entries = result.plan.entries;
    if (!entries.empty() && entries.back().source == piece.source &&
        entries.back().target == piece.target) {
      entries.back().mass += piece.mass;
    } else {
      entries.push_back({piece.source, piece.target, piece.mass});
    }
  }
  result.distance = std::pow(cost_pow, 1.0 / p);
  result.slice_weights = std::move(weights);
  return result;
}

}  // namespace detail

/// Expected sliced transport plan and distance for an explicit slice measure.
inline EstResult est_plan(const DiscreteMeasure& source, const DiscreteMeasure& target,
                          const SliceSet& slices, double p = 2.0, const EstOptions& opts = {}) {
  slices.validate();
  const auto plans = detail::slice_plans(source, target, slices.directions, p, opts);
  return detail::aggregate(plans, slices.weights, source.size(), target.size(), p);
}

/// Two passes: per-slice costs first, then aggregation under σ_τ weights
/// reusing the same per-slice plans.
inline EstResult est_plan_tempered(const DiscreteMeasure& source, const DiscreteMeasure& target,
                                   const Directions& directions, double p, double tau,
                                   const EstOptions& opts = {}) {
  const auto plans = detail::slice_plans(source, target, directions, p, opts);
  std::vector<double> costs_pow;
  costs_pow.reserve(plans.size());
  for (const auto& s : plans) costs_pow.push_back(s.cost_pow);
  auto weights = sigma_tau_weights(costs_pow, tau);
  return detail::aggregate(plans, std::move(weights), source.size(), target.size(), p);
}

struct MinSwggResult {
  std::size_t best_index = 0;
  TransportPlan plan;
  double cost = 0.0;
};

/// Cheapest single slice; ties go to the lowest index.
inline MinSwggResult min_swgg(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const Directions& directions, double p = 2.0,
                              const EstOptions& opts = {}) {
  auto plans = detail::slice_plans(source, target, directions, p, opts);
  std::size_t best = 0;
  for (std::size_t l = 1; l < plans.size(); ++l) {
    if (plans[l].cost_pow < plans[best].cost_pow) best = l;
  }
  return {best, std::move(plans[best].plan), plans[best].cost};
}

}  // namespace est
