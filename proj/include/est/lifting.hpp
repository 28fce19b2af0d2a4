#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "est/error.hpp"
#include "est/measure.hpp"
#include "est/slicing.hpp"

namespace est {

inline constexpr double kLiftedMassFloor = 1e-15;

/// Lifts a coupling of projected classes to a coupling of the original atoms.
///
/// A 1D entry (a, b, m) is spread over every member pair (i ∈ a, j ∈ b) as
/// m · (p_i / P_a) · (q_j / Q_b). Pieces lighter than kLiftedMassFloor are
/// dropped and their mass is returned proportionally to the surviving pieces
/// of the same 1D entry. The result is sorted by (source, target).
inline TransportPlan lift(const DiscreteMeasure& source, const DiscreteMeasure& target,
                          const ProjectedMeasure& proj_source, const ProjectedMeasure& proj_target,
                          const OneDPlan& plan1d) {
  TransportPlan plan{source.size(), target.size(), {}};
  plan.entries.reserve(plan1d.entries.size());
  for (const auto& e : plan1d.entries) {
    if (e.source_class >= proj_source.class_count() || e.target_class >= proj_target.class_count()) {
      throw Error(ErrorCode::ClassMismatch, "1D plan references a class that does not exist");
    }
    const auto src_atoms = proj_source.members(e.source_class);
    const auto src_w = proj_source.member_weights_of(e.source_class);
    const auto tgt_atoms = proj_target.members(e.target_class);
    const auto tgt_w = proj_target.member_weights_of(e.target_class);
    const double src_mass = proj_source.class_masses[e.source_class];
    const double tgt_mass = proj_target.class_masses[e.target_class];

    // Singleton classes on both sides: the whole 1D mass moves atom to atom.
    if (src_atoms.size() == 1 && tgt_atoms.size() == 1) {
      if (src_atoms[0] >= source.size() || tgt_atoms[0] >= target.size()) {
        throw Error(ErrorCode::ClassMismatch, "class member outside the measure");
      }
      plan.entries.push_back({src_atoms[0], tgt_atoms[0], e.mass});
      continue;
    }

    const std::size_t first = plan.entries.size();
    double kept = 0.0, dropped = 0.0;
    for (std::size_t s = 0; s < src_atoms.size(); ++s) {
      if (src_atoms[s] >= source.size()) {
        throw Error(ErrorCode::ClassMismatch, "class member outside the measure");
      }
      const double src_share = src_w[s] / src_mass;
      for (std::size_t t = 0; t < tgt_atoms.size(); ++t) {
        if (tgt_atoms[t] >= target.size()) {
          throw Error(ErrorCode::ClassMismatch, "class member outside the measure");
        }
        const double mass = e.mass * (src_share * (tgt_w[t] / tgt_mass));
        if (mass < kLiftedMassFloor) {
          dropped += mass;
          continue;
        }
        kept += mass;
        plan.entries.push_back({src_atoms[s], tgt_atoms[t], mass});
      }
    }
    if (dropped > 0.0 && kept > 0.0) {
      const double factor = (kept + dropped) / kept;
      for (std::size_t k = first; k < plan.entries.size(); ++k) plan.entries[k].mass *= factor;
    }
  }
  canonicalize(plan);
  return plan;
}

/// Lifted plan for a single direction together with its cost D_p(μ, ν; θ).
struct SlicePlan {
  TransportPlan plan;
  double cost = 0.0;      // D_p(μ, ν; θ)
  double cost_pow = 0.0;  // D_p(μ, ν; θ)^p
};

inline SlicePlan lift_for_direction(const DiscreteMeasure& source, const DiscreteMeasure& target,
                                    std::span<const double> direction, double p = 2.0,
                                    double grouping_tol = kDefaultGroupingTol) {
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  const auto ps = project(source, direction, grouping_tol);
  const auto pt = project(target, direction, grouping_tol);
  const auto plan1d = solve_1d(ps, pt);
  SlicePlan out;
  out.plan = lift(source, target, ps, pt, plan1d);
  out.cost_pow = plan_cost_pow(out.plan, source, target, p);
  out.cost = std::pow(out.cost_pow, 1.0 / p);
  return out;
}

}  // namespace est
