// est_cli: expected sliced transport from the command line.
//
// Exit codes: 0 ok, 1 usage or runtime error, 2 input parse error,
// 3 dimension mismatch, 4 unwritable output, 5 unknown experiment.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "est/est.hpp"
#include "est/experiments.hpp"
#include "est/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string message;
};

struct RunConfig {
  double p = 2.0;
  std::size_t slices = 128;
  double tau = 0.0;
  std::uint64_t seed = 0;
  double grouping_tol = est::kDefaultGroupingTol;
  std::string format = "csv";
  std::string method = "est";
  double lambda = 10.0;
  bool per_slice = false;

  est::EstOptions options() const { return {grouping_tol, 0}; }
};

std::string sig12(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

est::DiscreteMeasure load(const std::string& path) {
  try {
    return est::io::load_measure(path);
  } catch (const est::Error& e) {
    throw Failure{2, path + ": " + e.what()};
  }
}

std::pair<est::DiscreteMeasure, est::DiscreteMeasure> load_pair(const std::string& a, const std::string& b) {
  auto x = load(a);
  auto y = load(b);
  if (x.dim() != y.dim()) {
    throw Failure{3, b + ": dimension " + std::to_string(y.dim()) + " does not match " + a + " (dimension " +
                         std::to_string(x.dim()) + ")"};
  }
  return {std::move(x), std::move(y)};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{4, "cannot write " + path.string()};
  out << content;
  out.close();
  if (!out) throw Failure{4, "failed writing " + path.string()};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Failure{4, "cannot create directory " + dir.string()};
}

fs::path sidecar_for(fs::path out) { return out.replace_extension(".meta.json"); }

json config_json(const RunConfig& cfg) {
  return {{"p", cfg.p},          {"slices", cfg.slices}, {"tau", cfg.tau},
          {"seed", cfg.seed},    {"grouping_tol", cfg.grouping_tol}, {"method", cfg.method},
          {"lambda", cfg.lambda}};
}

struct PlanOutcome {
  est::TransportPlan plan;
  double cost = 0.0;
  double coupling_tol = est::kCouplingTolerance;
  double marginal_error = 0.0;
};

PlanOutcome compute_plan(const est::DiscreteMeasure& x, const est::DiscreteMeasure& y, const RunConfig& cfg) {
  PlanOutcome out;
  if (cfg.method == "est") {
    const auto dirs = est::sample_sphere(cfg.slices, x.dim(), cfg.seed);
    auto r = est::est_plan_tempered(x, y, dirs, cfg.p, cfg.tau, cfg.options());
    out.plan = std::move(r.plan);
    out.cost = r.distance;
  } else if (cfg.method == "min-swgg") {
    const auto dirs = est::sample_sphere(cfg.slices, x.dim(), cfg.seed);
    auto r = est::min_swgg(x, y, dirs, cfg.p, cfg.options());
    out.plan = std::move(r.plan);
    out.cost = r.cost;
  } else if (cfg.method == "exact") {
    auto r = est::wasserstein_exact(x, y, cfg.p);
    out.plan = std::move(r.plan);
    out.cost = r.distance;
  } else {
    auto r = est::sinkhorn(x, y, cfg.p, cfg.lambda);
    if (!std::isfinite(r.marginal_error)) throw Failure{1, "Sinkhorn diverged; try a larger --lambda"};
    out.plan = std::move(r.plan);
    out.marginal_error = r.marginal_error;
    out.coupling_tol = std::max(out.coupling_tol, 2.0 * r.marginal_error);
    out.cost = est::plan_cost(out.plan, x, y, cfg.p);
  }
  return out;
}

void add_config(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--p", cfg.p, "Cost exponent (> 1)")
      ->check(CLI::Validator(
          [](std::string& s) {
            double v = 0.0;
            return CLI::detail::lexical_cast(s, v) && v > 1.0 ? std::string() : std::string("p must be > 1");
          },
          "> 1", "p > 1"));
  cmd->add_option("--slices", cfg.slices, "Number of slice directions")->check(CLI::PositiveNumber);
  cmd->add_option("--tau", cfg.tau, "Slice temperature")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", cfg.seed, "Seed for direction sampling and synthetic data");
  cmd->add_option("--grouping-tol", cfg.grouping_tol, "Relative tolerance for merging projections")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_method(CLI::App* cmd, RunConfig& cfg, std::vector<std::string> methods) {
  cmd->add_option("--method", cfg.method, "Plan method")->check(CLI::IsMember(methods));
  cmd->add_option("--lambda", cfg.lambda, "Entropic regularization, in cost units")->check(CLI::PositiveNumber);
}

int cmd_distance(const std::string& a, const std::string& b, const RunConfig& cfg) {
  const auto [x, y] = load_pair(a, b);
  const auto dirs = est::sample_sphere(cfg.slices, x.dim(), cfg.seed);
  const auto r = est::est_plan_tempered(x, y, dirs, cfg.p, cfg.tau, cfg.options());
  if (cfg.format == "json") {
    json doc{{"distance", r.distance}, {"config", config_json(cfg)}};
    if (cfg.per_slice) {
      doc["per_slice"] = json::array();
      for (std::size_t l = 0; l < r.per_slice_costs.size(); ++l) {
        doc["per_slice"].push_back({{"slice", l}, {"cost", r.per_slice_costs[l]}, {"weight", r.slice_weights[l]}});
      }
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
  }
  std::cout << sig12(r.distance) << '\n';
  if (cfg.per_slice) {
    std::cout << "slice,cost,weight\n";
    for (std::size_t l = 0; l < r.per_slice_costs.size(); ++l) {
      std::cout << l << ',' << sig12(r.per_slice_costs[l]) << ',' << sig12(r.slice_weights[l]) << '\n';
    }
  }
  return 0;
}

int cmd_exact(const std::string& a, const std::string& b, const RunConfig& cfg) {
  const auto [x, y] = load_pair(a, b);
  const auto r = est::wasserstein_exact(x, y, cfg.p);
  if (cfg.format == "json") {
    std::cout << json{{"distance", r.distance}, {"p", cfg.p}}.dump(2) << '\n';
  } else {
    std::cout << sig12(r.distance) << '\n';
  }
  return 0;
}

int cmd_plan(const std::string& a, const std::string& b, const std::string& out, const RunConfig& cfg) {
  const auto [x, y] = load_pair(a, b);
  const auto r = compute_plan(x, y, cfg);
  std::ostringstream plan_csv;
  est::io::write_plan_csv(plan_csv, r.plan);
  write_file(out, plan_csv.str());
  json meta{{"source", a}, {"target", b}, {"config", config_json(cfg)}, {"entries", r.plan.entries.size()},
            {"cost", r.cost}};
  if (cfg.method == "sinkhorn") meta["marginal_error"] = r.marginal_error;
  write_file(sidecar_for(out), meta.dump(2) + "\n");

  std::cout << "entries " << r.plan.entries.size() << '\n' << "cost " << sig12(r.cost) << '\n';
  if (cfg.method == "sinkhorn") std::cout << "marginal_error " << sig12(r.marginal_error) << '\n';
  return 0;
}

int cmd_interpolate(const std::string& a, const std::string& b, const std::string& out_dir, std::size_t steps,
                    const RunConfig& cfg) {
  const auto [x, y] = load_pair(a, b);
  ensure_dir(out_dir);
  const auto r = compute_plan(x, y, cfg);
  const auto format = cfg.format == "json" ? est::io::Format::Json : est::io::Format::Csv;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = k == steps ? 1.0 : static_cast<double>(k) / static_cast<double>(steps);
    const auto frame = est::interpolate(r.plan, x, y, t, r.coupling_tol);
    std::ostringstream body;
    if (format == est::io::Format::Json) {
      est::io::write_measure_json(body, frame);
    } else {
      est::io::write_measure_csv(body, frame);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "t_%03zu.%s", k, cfg.format.c_str());
    write_file(fs::path(out_dir) / name, body.str());
  }
  json meta{{"source", a}, {"target", b}, {"steps", steps}, {"config", config_json(cfg)}};
  write_file(fs::path(out_dir) / "frames.meta.json", meta.dump(2) + "\n");
  return 0;
}

int cmd_embed(const std::string& ref_path, const std::string& m_path, const std::string& out,
              const RunConfig& cfg) {
  const auto [ref, m] = load_pair(ref_path, m_path);
  est::EmbedMethod method;
  if (cfg.method == "exact") {
    method = est::ExactMethod{};
  } else if (cfg.method == "sinkhorn") {
    method = est::SinkhornMethod{cfg.lambda};
  } else {
    method = est::EstMethod{cfg.slices, cfg.tau, cfg.seed};
  }
  const auto e = est::lot_embed(ref, m, method, cfg.p, cfg.options());
  std::ostringstream body;
  est::io::write_embedding_csv(body, e);
  write_file(out, body.str());
  auto meta = est::io::method_to_json(method, cfg.p);
  meta["seed"] = cfg.seed;
  meta["grouping_tol"] = cfg.grouping_tol;
  meta["reference"] = ref_path;
  meta["measure"] = m_path;
  meta["rows"] = e.rows;
  meta["dim"] = e.dim;
  write_file(sidecar_for(out), meta.dump(2) + "\n");
  return 0;
}

json doubles(const std::vector<double>& v) { return json(v); }

int cmd_experiment(const std::string& name, const std::string& out_dir, const RunConfig& cfg,
                   bool slices_given) {
  namespace ex = est::experiments;
  if (name != "weak-convergence" && name != "temperature-sweep" && name != "embed-bench") {
    throw Failure{5, "unknown experiment '" + name + "' (weak-convergence, temperature-sweep, embed-bench)"};
  }
  ensure_dir(out_dir);
  std::ostringstream body;
  json meta{{"experiment", name}, {"seed", cfg.seed}, {"grouping_tol", cfg.grouping_tol}};
  if (name == "weak-convergence") {
    ex::WeakConvergenceConfig c;
    c.seed = cfg.seed;
    if (slices_given) c.slices = cfg.slices;
    c.est_options = cfg.options();
    ex::write_weak_convergence_csv(body, c, ex::weak_convergence(c));
    meta.update({{"atoms", c.atoms},
                 {"slices", c.slices},
                 {"times", doubles(c.times)},
                 {"taus", doubles(c.taus)},
                 {"lambdas", doubles(c.lambdas)},
                 {"source_mean", doubles(c.source_mean)},
                 {"target_mean", doubles(c.target_mean)},
                 {"sigma", c.sigma}});
  } else if (name == "temperature-sweep") {
    ex::TemperatureSweepConfig c;
    c.seed = cfg.seed;
    if (slices_given) c.slices = cfg.slices;
    c.est_options = cfg.options();
    ex::write_temperature_csv(body, ex::temperature_sweep(c));
    meta.update({{"source_atoms", c.source_atoms},
                 {"target_atoms", c.target_atoms},
                 {"slices", c.slices},
                 {"taus", doubles(c.taus)}});
  } else {
    ex::EmbedBenchConfig c;
    c.seed = cfg.seed;
    c.est_options = cfg.options();
    ex::write_embed_bench_csv(body, ex::embed_bench(c));
    meta.update({{"clouds_per_class", c.clouds_per_class},
                 {"atoms", c.atoms},
                 {"reference_atoms", c.reference_atoms},
                 {"sigma", c.sigma},
                 {"separation", c.separation},
                 {"slices", 128}});
  }
  write_file(fs::path(out_dir) / (name + ".csv"), body.str());
  write_file(fs::path(out_dir) / (name + ".meta.json"), meta.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected sliced transport plans and distances"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string a, b, out;
  std::size_t steps = 10;

  auto* distance = app.add_subcommand("distance", "EST discrepancy D_p between two measures");
  distance->add_option("source", a)->required();
  distance->add_option("target", b)->required();
  distance->add_flag("--per-slice", cfg.per_slice, "Append per-slice cost and weight rows");
  add_config(distance, cfg);

  auto* plan = app.add_subcommand("plan", "Write a transport plan as CSV");
  plan->add_option("source", a)->required();
  plan->add_option("target", b)->required();
  plan->add_option("out", out)->required();
  add_config(plan, cfg);
  add_method(plan, cfg, {"est", "min-swgg", "exact", "sinkhorn"});

  auto* exact = app.add_subcommand("exact", "Exact W_p by network simplex");
  exact->add_option("source", a)->required();
  exact->add_option("target", b)->required();
  add_config(exact, cfg);

  auto* interp = app.add_subcommand("interpolate", "Displacement interpolation frames t_000 ... t_<steps>");
  interp->add_option("source", a)->required();
  interp->add_option("target", b)->required();
  interp->add_option("out_dir", out)->required();
  interp->add_option("--steps", steps, "Number of intervals")->check(CLI::PositiveNumber);
  add_config(interp, cfg);
  add_method(interp, cfg, {"est", "min-swgg", "exact", "sinkhorn"});

  auto* embed = app.add_subcommand("embed", "LOT embedding of a measure against a reference");
  embed->add_option("reference", a)->required();
  embed->add_option("measure", b)->required();
  embed->add_option("out", out)->required();
  add_config(embed, cfg);
  add_method(embed, cfg, {"est", "exact", "sinkhorn"});

  auto* experiment = app.add_subcommand("experiment", "Run a synthetic experiment and write CSV");
  std::string name;
  experiment->add_option("name", name, "weak-convergence | temperature-sweep | embed-bench")->required();
  experiment->add_option("out_dir", out)->required();
  add_config(experiment, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*distance) return cmd_distance(a, b, cfg);
    if (*plan) return cmd_plan(a, b, out, cfg);
    if (*exact) return cmd_exact(a, b, cfg);
    if (*interp) return cmd_interpolate(a, b, out, steps, cfg);
    if (*embed) return cmd_embed(a, b, out, cfg);
    if (*experiment) return cmd_experiment(name, out, cfg, experiment->count("--slices") > 0);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const est::Error& e) {
    std::cerr << "error: " << est::to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == est::ErrorCode::DimensionMismatch ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
