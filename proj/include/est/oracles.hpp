#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "est/detail/transport_simplex.hpp"
#include "est/error.hpp"
#include "est/measure.hpp"

namespace est {

/// Largest n · m accepted by wasserstein_exact.
inline constexpr std::size_t kExactMaxCells = 250'000;

struct ExactResult {
  TransportPlan plan;
  double distance = 0.0;  // W_p
};

inline std::vector<double> cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target,
                                       double p) {
  std::vector<double> cost(source.size() * target.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      cost[i * target.size() + j] = ground_cost(source.atom(i), target.atom(j), p);
    }
  }
  return cost;
}

// Basic flows at or below this are pivoting round-off on degenerate cells.
inline constexpr double kExactFlowFloor = 1e-14;

/// Exact W_p by network simplex on the ‖x − y‖^p cost matrix. Returns an
/// optimal basic plan; zero-flow basic cells are omitted.
inline ExactResult wasserstein_exact(const DiscreteMeasure& source, const DiscreteMeasure& target,
                                     double p = 2.0) {
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "cost exponent must be >= 1");
  const std::size_t n = source.size(), m = target.size();
  if (n * m > kExactMaxCells) {
    throw Error(ErrorCode::InstanceTooLarge,
                std::to_string(n) + " x " + std::to_string(m) + " exceeds the exact solver bound");
  }
  detail::TransportSimplex simplex(source.weights(), target.weights(), cost_matrix(source, target, p));
  simplex.solve(100 * (n + m) * (n + m) + 1000);

  ExactResult out;
  out.plan = TransportPlan{n, m, {}};
  for (const auto& c : simplex.basis()) {
    if (c.flow > kExactFlowFloor) out.plan.entries.push_back({c.row, c.col, c.flow});
  }
  canonicalize(out.plan);
  out.distance = std::pow(plan_cost_pow(out.plan, source, target, p), 1.0 / p);
  return out;
}

/// One-dimensional W_p by inverting both CDFs on the merged set of
/// cumulative-mass breakpoints.
inline double wasserstein_1d(std::span<const double> source_values, std::span<const double> source_weights,
                             std::span<const double> target_values, std::span<const double> target_weights,
                             double p = 2.0) {
  if (source_values.size() != source_weights.size() || target_values.size() != target_weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "value and weight counts differ");
  }
  if (source_values.empty() || target_values.empty()) {
    throw Error(ErrorCode::NonPositiveTotalMass, "empty one-dimensional measure");
  }
  auto sorted_cdf = [](std::span<const double> values, std::span<const double> weights,
                       std::vector<double>& xs, std::vector<double>& cdf) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double run = 0.0;
    for (std::size_t k : order) {
      run += weights[k];
      xs.push_back(values[k]);
      cdf.push_back(run);
    }
    return run;
  };
  std::vector<double> xs, fs, ys, gs;
  const double total_s = sorted_cdf(source_values, source_weights, xs, fs);
  const double total_t = sorted_cdf(target_values, target_weights, ys, gs);
  if (std::abs(total_s - total_t) > kWeightSumTolerance) {
    throw Error(ErrorCode::MassImbalance, "one-dimensional masses differ");
  }

  double total = 0.0, level = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double next = std::min(fs[i], gs[j]);
    if (next > level) {
      const double gap = std::abs(xs[i] - ys[j]);
      total += (next - level) * std::pow(gap, p);
      level = next;
    }
    if (fs[i] <= next) ++i;
    if (gs[j] <= next) ++j;
  }
  return std::pow(total, 1.0 / p);
}

inline double wasserstein_1d(const DiscreteMeasure& source, const DiscreteMeasure& target, double p = 2.0) {
  if (source.dim() != 1 || target.dim() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "wasserstein_1d needs one-dimensional measures");
  }
  return wasserstein_1d(source.coords(), source.weights(), target.coords(), target.weights(), p);
}

struct SinkhornResult {
  TransportPlan plan;                // every cell with nonzero mass
  double marginal_error = 0.0;       // max of the row and column L1 errors
  std::size_t iterations = 0;
  std::vector<double> error_trace;   // marginal_error after each iteration
};

/// Entropic OT with kernel exp(−cost / lambda), solved by Sinkhorn updates on
/// the dual potentials in the log domain. lambda is in units of the raw
/// ‖x − y‖^p costs.
inline SinkhornResult sinkhorn(const DiscreteMeasure& source, const DiscreteMeasure& target, double p,
                               double lambda, std::size_t max_iters = 10'000, double stop_tol = 1e-9) {
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  }
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  const std::size_t n = source.size(), m = target.size();
  const auto cost = cost_matrix(source, target, p);
  std::vector<double> log_a(n), log_b(m), f(n, 0.0), g(m, 0.0), scratch(std::max(n, m));
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(source.weight(i));
  for (std::size_t j = 0; j < m; ++j) log_b[j] = std::log(target.weight(j));

  auto log_sum_exp = [](std::span<const double> x) {
    const double hi = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double v : x) s += std::exp(v - hi);
    return hi + std::log(s);
  };

  SinkhornResult out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row_sum(n), col_sum(m);
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) scratch[j] = (g[j] - cost[i * m + j]) / lambda;
      f[i] = lambda * (log_a[i] - log_sum_exp({scratch.data(), m}));
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) scratch[i] = (f[i] - cost[i * m + j]) / lambda;
      g[j] = lambda * (log_b[j] - log_sum_exp({scratch.data(), n}));
    }
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double mass = std::exp((f[i] + g[j] - cost[i * m + j]) / lambda);
        row_sum[i] += mass;
        col_sum[j] += mass;
      }
    }
    double row_err = 0.0, col_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) row_err += std::abs(row_sum[i] - source.weight(i));
    for (std::size_t j = 0; j < m; ++j) col_err += std::abs(col_sum[j] - target.weight(j));
    double err = std::max(row_err, col_err);
    if (!std::isfinite(err)) err = inf;
    out.error_trace.push_back(err);
    out.marginal_error = err;
    out.iterations = it + 1;
    if (err == inf) return out;
    if (row_err < stop_tol && col_err < stop_tol) break;
  }

  out.plan = TransportPlan{n, m, {}};
  out.plan.entries.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double mass = std::exp((f[i] + g[j] - cost[i * m + j]) / lambda);
      if (mass > 0.0) out.plan.entries.push_back({i, j, mass});
    }
  }
  return out;
}

}  // namespace est
