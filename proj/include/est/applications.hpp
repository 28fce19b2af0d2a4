#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "est/error.hpp"
#include "est/expected_sliced.hpp"
#include "est/measure.hpp"
#include "est/oracles.hpp"
#include "est/slicing.hpp"

namespace est {

/// Displacement interpolation ((1 − t)x + ty)_# γ. Every plan entry becomes
/// its own atom, so coincident atoms stay distinct.
inline DiscreteMeasure interpolate(const TransportPlan& plan, const DiscreteMeasure& source,
                                   const DiscreteMeasure& target, double t,
                                   double coupling_tol = kCouplingTolerance) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidT, "t must lie in [0, 1]");
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  const auto check = validate_coupling(plan, source, target, coupling_tol);
  if (!check.valid) {
    throw Error(ErrorCode::InvalidCoupling,
                "plan marginals deviate by " + std::to_string(check.max_deviation));
  }
  const std::size_t d = source.dim();
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(plan.entries.size() * d);
  weights.reserve(plan.entries.size());
  for (const auto& e : plan.entries) {
    const auto x = source.atom(e.source);
    const auto y = target.atom(e.target);
    for (std::size_t k = 0; k < d; ++k) coords.push_back((1.0 - t) * x[k] + t * y[k]);
    weights.push_back(e.mass);
  }
  return DiscreteMeasure::from_flat(d, std::move(coords), std::move(weights));
}

/// Point on the W_p geodesic, pushed along an exact optimal plan.
inline DiscreteMeasure geodesic(const DiscreteMeasure& source, const DiscreteMeasure& target, double t,
                                double p = 2.0) {
  const auto exact = wasserstein_exact(source, target, p);
  return interpolate(exact.plan, source, target, t);
}

/// b_i = (1 / α_i) ∑_j γ_ij y_j for every reference atom i.
inline std::vector<std::vector<double>> barycentric_projection(const TransportPlan& plan,
                                                               const DiscreteMeasure& reference,
                                                               const DiscreteMeasure& target,
                                                               double coupling_tol = kCouplingTolerance) {
  if (reference.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  const auto check = validate_coupling(plan, reference, target, coupling_tol);
  if (!check.valid) {
    throw Error(ErrorCode::InvalidCoupling,
                "plan marginals deviate by " + std::to_string(check.max_deviation));
  }
  const std::size_t d = reference.dim();
  std::vector<std::vector<double>> out(reference.size(), std::vector<double>(d, 0.0));
  for (const auto& e : plan.entries) {
    const auto y = target.atom(e.target);
    for (std::size_t k = 0; k < d; ++k) out[e.source][k] += e.mass * y[k];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (double& c : out[i]) c /= reference.weight(i);
  }
  return out;
}

/// LOT embedding: one displacement b_i − x_i per reference atom, row-major.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * dim, dim}; }
};

struct EstMethod {
  std::size_t slices = 128;
  double tau = 0.0;
  std::uint64_t seed = 0;
};
struct ExactMethod {};
struct SinkhornMethod {
  double lambda = 10.0;
  std::size_t max_iters = 10'000;
  double stop_tol = 1e-9;
};
using EmbedMethod = std::variant<EstMethod, ExactMethod, SinkhornMethod>;

inline EmbeddingMatrix lot_embed(const DiscreteMeasure& reference, const DiscreteMeasure& measure,
                                 const EmbedMethod& method, double p = 2.0, const EstOptions& opts = {}) {
  if (reference.dim() != measure.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "reference and measure differ in dimension");
  }
  TransportPlan plan;
  double tol = kCouplingTolerance;
  if (const auto* m = std::get_if<EstMethod>(&method)) {
    const auto directions = sample_sphere(m->slices, reference.dim(), m->seed);
    plan = est_plan_tempered(reference, measure, directions, p, m->tau, opts).plan;
  } else if (std::holds_alternative<ExactMethod>(method)) {
    plan = wasserstein_exact(reference, measure, p).plan;
  } else {
    const auto& s = std::get<SinkhornMethod>(method);
    auto result = sinkhorn(reference, measure, p, s.lambda, s.max_iters, s.stop_tol);
    if (!std::isfinite(result.marginal_error)) {
      throw Error(ErrorCode::InvalidCoupling, "Sinkhorn diverged");
    }
    tol = std::max(tol, 2.0 * result.marginal_error);
    plan = std::move(result.plan);
  }
  const auto bary = barycentric_projection(plan, reference, measure, tol);
  EmbeddingMatrix out{reference.size(), reference.dim(), {}};
  out.values.reserve(out.rows * out.dim);
  for (std::size_t i = 0; i < out.rows; ++i) {
    const auto x = reference.atom(i);
    for (std::size_t k = 0; k < out.dim; ++k) out.values.push_back(bary[i][k] - x[k]);
  }
  return out;
}

}  // namespace est
