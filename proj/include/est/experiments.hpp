#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "est/applications.hpp"
#include "est/classify.hpp"
#include "est/expected_sliced.hpp"
#include "est/io.hpp"
#include "est/measure.hpp"
#include "est/oracles.hpp"

namespace est::experiments {

/// n uniform-mass atoms drawn from N(mean, sigma² I).
inline DiscreteMeasure gaussian_cloud(std::size_t n, std::span<const double> mean, double sigma,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> coords;
  coords.reserve(n * mean.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (double m : mean) coords.push_back(m + sigma * normal(rng));
  }
  return DiscreteMeasure::uniform(mean.size(), std::move(coords));
}

/// Product coupling μ ⊗ ν.
inline TransportPlan product_plan(const DiscreteMeasure& source, const DiscreteMeasure& target) {
  TransportPlan plan{source.size(), target.size(), {}};
  plan.entries.reserve(source.size() * target.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      plan.entries.push_back({i, j, source.weight(i) * target.weight(j)});
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Weak convergence along a W2 geodesic μ_t → ν.

struct WeakConvergenceConfig {
  std::size_t atoms = 50;
  std::size_t slices = 512;
  std::uint64_t seed = 0;
  std::vector<double> times{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
  std::vector<double> taus{0.0, 1.0, 10.0, 100.0};
  std::vector<double> lambdas{1.0, 10.0};
  std::vector<double> source_mean{0.0, 0.0};
  // Means 3σ apart along the diagonal. The spread is kept at 0.5 so that the
  // entropic columns (λ in raw cost units) stay visibly blurred near t = 1.
  std::vector<double> target_mean{1.5, 1.5};
  double sigma = 0.5;
  EstOptions est_options{};
};

/// All columns are plan costs (∑ mass · ‖x − y‖²)^{1/2} between μ_t and ν.
struct WeakConvergenceRow {
  double t = 0.0;
  std::vector<double> est;       // one per tau
  double exact = 0.0;
  std::vector<double> sinkhorn;  // one per lambda
  double product = 0.0;
};

inline std::vector<WeakConvergenceRow> weak_convergence(const WeakConvergenceConfig& cfg) {
  constexpr double p = 2.0;
  std::mt19937_64 rng(cfg.seed);
  const auto mu = gaussian_cloud(cfg.atoms, cfg.source_mean, cfg.sigma, rng);
  const auto nu = gaussian_cloud(cfg.atoms, cfg.target_mean, cfg.sigma, rng);
  const auto directions = sample_sphere(cfg.slices, mu.dim(), cfg.seed + 1);
  const auto geodesic_plan = wasserstein_exact(mu, nu, p).plan;

  std::vector<WeakConvergenceRow> rows;
  for (double t : cfg.times) {
    const auto mu_t = interpolate(geodesic_plan, mu, nu, t);
    WeakConvergenceRow row;
    row.t = t;
    for (double tau : cfg.taus) {
      row.est.push_back(est_plan_tempered(mu_t, nu, directions, p, tau, cfg.est_options).distance);
    }
    row.exact = wasserstein_exact(mu_t, nu, p).distance;
    for (double lambda : cfg.lambdas) {
      const auto s = sinkhorn(mu_t, nu, p, lambda);
      row.sinkhorn.push_back(plan_cost(s.plan, mu_t, nu, p));
    }
    row.product = plan_cost(product_plan(mu_t, nu), mu_t, nu, p);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_weak_convergence_csv(std::ostream& out, const WeakConvergenceConfig& cfg,
                                       const std::vector<WeakConvergenceRow>& rows) {
  out << 't';
  for (double tau : cfg.taus) out << ",D2_est_tau_" << io::format_double(tau);
  out << ",W2_exact";
  for (double lambda : cfg.lambdas) out << ",sinkhorn_lambda_" << io::format_double(lambda);
  out << ",product\n";
  for (const auto& r : rows) {
    out << io::format_double(r.t);
    for (double v : r.est) out << ',' << io::format_double(v);
    out << ',' << io::format_double(r.exact);
    for (double v : r.sinkhorn) out << ',' << io::format_double(v);
    out << ',' << io::format_double(r.product) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Temperature sweep: plan sparsity and distance as τ grows.

struct TemperatureSweepConfig {
  std::size_t source_atoms = 20;
  std::size_t target_atoms = 30;
  std::size_t slices = 128;
  std::uint64_t seed = 0;
  std::vector<double> taus{0.0, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e12};
  EstOptions est_options{};
};

struct TemperatureRow {
  double tau = 0.0;
  std::size_t entries = 0;
  double distance = 0.0;
  double max_weight = 0.0;
};

struct TemperatureSweep {
  std::vector<TemperatureRow> rows;
  std::size_t min_swgg_entries = 0;
  double min_swgg_cost = 0.0;
  std::size_t exact_entries = 0;
  double exact_distance = 0.0;
};

inline TemperatureSweep temperature_sweep(const TemperatureSweepConfig& cfg) {
  constexpr double p = 2.0;
  std::mt19937_64 rng(cfg.seed);
  const std::vector<double> a{0.0, 0.0}, b{2.0, 1.0};
  const auto mu = gaussian_cloud(cfg.source_atoms, a, 1.0, rng);
  const auto nu = gaussian_cloud(cfg.target_atoms, b, 0.5, rng);
  const auto directions = sample_sphere(cfg.slices, 2, cfg.seed + 1);

  TemperatureSweep sweep;
  for (double tau : cfg.taus) {
    const auto r = est_plan_tempered(mu, nu, directions, p, tau, cfg.est_options);
    double top = 0.0;
    for (double w : r.slice_weights) top = std::max(top, w);
    sweep.rows.push_back({tau, r.plan.entries.size(), r.distance, top});
  }
  const auto best = min_swgg(mu, nu, directions, p, cfg.est_options);
  sweep.min_swgg_entries = best.plan.entries.size();
  sweep.min_swgg_cost = best.cost;
  const auto exact = wasserstein_exact(mu, nu, p);
  sweep.exact_entries = exact.plan.entries.size();
  sweep.exact_distance = exact.distance;
  return sweep;
}

inline void write_temperature_csv(std::ostream& out, const TemperatureSweep& sweep) {
  out << "label,tau,entries,distance,max_slice_weight\n";
  for (const auto& r : sweep.rows) {
    out << "est," << io::format_double(r.tau) << ',' << r.entries << ',' << io::format_double(r.distance)
        << ',' << io::format_double(r.max_weight) << '\n';
  }
  out << "min-swgg,inf," << sweep.min_swgg_entries << ',' << io::format_double(sweep.min_swgg_cost) << ",1\n";
  out << "exact,," << sweep.exact_entries << ',' << io::format_double(sweep.exact_distance) << ",\n";
}

// ---------------------------------------------------------------------------
// Synthetic two-class embedding benchmark.

struct EmbedBenchConfig {
  std::size_t clouds_per_class = 20;
  std::size_t atoms = 30;
  std::size_t reference_atoms = 50;
  double sigma = 1.0;
  double separation = 4.0;  // distance between class means, in units of sigma
  std::uint64_t seed = 0;
  EstOptions est_options{};
};

struct LabeledClouds {
  std::vector<DiscreteMeasure> clouds;
  std::vector<int> labels;
};

/// Class −1 clouds are centered at the origin, class +1 at (separation·σ, 0).
inline LabeledClouds two_class_clouds(const EmbedBenchConfig& cfg, std::mt19937_64& rng) {
  LabeledClouds out;
  const std::vector<double> m0{0.0, 0.0}, m1{cfg.separation * cfg.sigma, 0.0};
  for (std::size_t k = 0; k < 2 * cfg.clouds_per_class; ++k) {
    const bool positive = k % 2 == 1;
    out.clouds.push_back(gaussian_cloud(cfg.atoms, positive ? m1 : m0, cfg.sigma, rng));
    out.labels.push_back(positive ? 1 : -1);
  }
  return out;
}

/// Uniform-mass reference drawn from a standard Gaussian.
inline DiscreteMeasure default_reference(std::size_t atoms, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> origin(dim, 0.0);
  return gaussian_cloud(atoms, origin, 1.0, rng);
}

inline std::vector<std::vector<double>> embed_all(const DiscreteMeasure& reference,
                                                  const std::vector<DiscreteMeasure>& clouds,
                                                  const EmbedMethod& method, const EstOptions& opts) {
  std::vector<std::vector<double>> features(clouds.size());
  for (std::size_t k = 0; k < clouds.size(); ++k) features[k] = lot_embed(reference, clouds[k], method, 2.0, opts).values;
  return features;
}

struct EmbedBenchRow {
  std::string method;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

inline std::vector<EmbedBenchRow> embed_bench(const EmbedBenchConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const auto reference = default_reference(cfg.reference_atoms, 2, cfg.seed + 1);
  const auto train = two_class_clouds(cfg, rng);
  const auto test = two_class_clouds(cfg, rng);
  const std::vector<std::pair<std::string, EmbedMethod>> methods{
      {"est_tau_0", EstMethod{128, 0.0, cfg.seed + 2}},
      {"est_tau_1e6", EstMethod{128, 1e6, cfg.seed + 2}},
      {"exact", ExactMethod{}},
      {"sinkhorn_lambda_10", SinkhornMethod{10.0, 10'000, 1e-9}},
  };
  std::vector<EmbedBenchRow> rows;
  for (const auto& [name, method] : methods) {
    const auto train_features = embed_all(reference, train.clouds, method, cfg.est_options);
    LeastSquaresClassifier clf;
    clf.fit(train_features, train.labels);
    rows.push_back({name, clf.accuracy(train_features, train.labels),
                    clf.accuracy(embed_all(reference, test.clouds, method, cfg.est_options), test.labels)});
  }
  return rows;
}

inline void write_embed_bench_csv(std::ostream& out, const std::vector<EmbedBenchRow>& rows) {
  out << "method,train_accuracy,test_accuracy\n";
  for (const auto& r : rows) {
    out << r.method << ',' << io::format_double(r.train_accuracy) << ',' << io::format_double(r.test_accuracy)
        << '\n';
  }
}

}  // namespace est::experiments
