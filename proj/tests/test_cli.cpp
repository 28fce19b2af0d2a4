#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "est/experiments.hpp"
#include "est/io.hpp"
#include "est/oracles.hpp"
#include "test_support.hpp"

using namespace est;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + EST_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("est_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string save(const std::string& name, const DiscreteMeasure& m) {
    const auto path = dir_ / name;
    io::save_measure(path, m, io::format_for(path));
    return path.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, IdenticalFilesGiveZero) {
  std::mt19937_64 rng(1);
  const auto a = save("a.csv", est_test::random_measure(rng, 10, 3));
  const auto r = run("distance " + a + " " + a);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::stod(r.out), 0.0);
}

TEST_F(Cli, DiracsAtDistanceFive) {
  const auto a = save("a.csv", make_measure({{0, 0}}, {1.0}));
  const auto b = save("b.json", make_measure({{3, 4}}, {1.0}));
  const auto r = run("distance " + a + " " + b);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "5\n");
}

TEST_F(Cli, OneDimensionalMatchesExact) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = save("a.csv", est_test::random_measure(rng, 7 + trial, 1));
    const auto b = save("b.csv", est_test::random_measure(rng, 4 + trial, 1));
    const auto d = run("distance " + a + " " + b + " --slices 5 --tau 3 --seed " + std::to_string(trial));
    const auto e = run("exact " + a + " " + b);
    ASSERT_EQ(d.code, 0);
    ASSERT_EQ(e.code, 0);
    EXPECT_NEAR(std::stod(d.out), std::stod(e.out), 1e-9);
  }
}

TEST_F(Cli, PerSliceRows) {
  std::mt19937_64 rng(3);
  const auto a = save("a.csv", est_test::random_measure(rng, 6, 2));
  const auto b = save("b.csv", est_test::random_measure(rng, 5, 2));
  const auto r = run("distance " + a + " " + b + " --slices 7 --per-slice");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1u + 1u + 7u);  // distance, header, one row per slice
}

TEST_F(Cli, ExitCodes) {
  const auto a = save("a.csv", make_measure({{0, 0}}, {1.0}));
  const auto c = save("c.csv", make_measure({{0, 0, 0}}, {1.0}));
  std::ofstream(path("bad.csv")) << "w,x1\n1,oops\n";
  EXPECT_EQ(run("distance " + a + " " + path("bad.csv")).code, 2);
  EXPECT_EQ(run("distance " + a + " " + path("missing.csv")).code, 2);
  EXPECT_EQ(run("distance " + a + " " + c).code, 3);
  EXPECT_EQ(run("interpolate " + a + " " + a + " /proc/est_no_such_dir").code, 4);
  EXPECT_EQ(run("experiment nonsense " + path("x")).code, 5);
  EXPECT_EQ(run("distance " + a + " " + a + " --p 1").code, 1);
  EXPECT_EQ(run("distance " + a + " " + a + " --slices 0").code, 1);
  EXPECT_EQ(run("").code, 1);
}

TEST_F(Cli, DimensionMismatchMessageNamesTheFile) {
  const auto a = save("a.csv", make_measure({{0, 0}}, {1.0}));
  const auto c = save("c3.csv", make_measure({{0, 0, 0}}, {1.0}));
  const std::string cmd = std::string(EST_CLI_PATH) + " distance " + a + " " + c + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[512] = {};
  const auto n = std::fread(buf, 1, sizeof(buf) - 1, pipe);
  pclose(pipe);
  EXPECT_NE(std::string(buf, n).find("c3.csv"), std::string::npos);
}

TEST_F(Cli, PlanFilesAreValidCouplings) {
  std::mt19937_64 rng(4);
  const auto x = est_test::random_measure(rng, 12, 2), y = est_test::random_measure(rng, 9, 2);
  const auto a = save("a.csv", x), b = save("b.csv", y);
  for (const std::string method : {"est", "min-swgg", "exact", "sinkhorn"}) {
    const auto out = path("plan_" + method + ".csv");
    const auto r = run("plan " + a + " " + b + " " + out + " --method " + method);
    ASSERT_EQ(r.code, 0) << method;
    std::ifstream in(out);
    const auto plan = io::read_plan_csv(in, x.size(), y.size());
    const double tol = method == "sinkhorn" ? 1e-6 : 1e-9;
    EXPECT_TRUE(validate_coupling(plan, x, y, tol).valid) << method;
    EXPECT_TRUE(fs::exists(path("plan_" + method + ".meta.json")));
    if (method == "sinkhorn") {
      EXPECT_NE(r.out.find("marginal_error"), std::string::npos);
    }
    if (method == "exact") {
      EXPECT_NEAR(plan_cost(plan, x, y), wasserstein_exact(x, y).distance, 1e-12);
    }
  }
}

TEST_F(Cli, MinSwggPlanIsSparserThanEst) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = save("a.csv", est_test::random_measure(rng, 15, 2, true));
    const auto b = save("b.csv", est_test::random_measure(rng, 15, 2, true));
    run("plan " + a + " " + b + " " + path("est.csv") + " --method est");
    run("plan " + a + " " + b + " " + path("swgg.csv") + " --method min-swgg");
    std::ifstream e(path("est.csv")), s(path("swgg.csv"));
    EXPECT_LE(io::read_plan_csv(s, 15, 15).entries.size(), io::read_plan_csv(e, 15, 15).entries.size());
  }
}

TEST_F(Cli, InterpolationFrames) {
  std::mt19937_64 rng(6);
  const auto x = est_test::random_measure(rng, 8, 2), y = est_test::random_measure(rng, 6, 2);
  const auto a = save("a.csv", x), b = save("b.csv", y);
  ASSERT_EQ(run("interpolate " + a + " " + b + " " + path("frames") + " --steps 4 --method exact").code, 0);
  std::vector<DiscreteMeasure> frames;
  for (int k = 0; k <= 4; ++k) {
    char name[16];
    std::snprintf(name, sizeof(name), "t_%03d.csv", k);
    frames.push_back(io::load_measure(dir_ / "frames" / name));
  }
  EXPECT_NEAR(wasserstein_exact(frames.front(), x).distance, 0.0, 1e-12);
  EXPECT_NEAR(wasserstein_exact(frames.back(), y).distance, 0.0, 1e-12);
  for (const auto& f : frames) {
    double total = 0.0;
    for (double w : f.weights()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  // Atom k moves by the same displacement in every step.
  for (std::size_t i = 0; i < frames[0].size(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double step = frames[1].atom(i)[c] - frames[0].atom(i)[c];
      for (std::size_t k = 1; k < 4; ++k) {
        EXPECT_NEAR(frames[k + 1].atom(i)[c] - frames[k].atom(i)[c], step, 1e-12);
      }
    }
  }
}

TEST_F(Cli, EmbedWritesMatrixAndSidecar) {
  std::mt19937_64 rng(7);
  const auto ref = save("ref.csv", est_test::random_measure(rng, 10, 2, true));
  const auto m = save("m.csv", est_test::random_measure(rng, 14, 2));
  ASSERT_EQ(run("embed " + ref + " " + m + " " + path("e.csv") + " --seed 9").code, 0);
  std::ifstream in(path("e.csv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 1);
  }
  EXPECT_EQ(rows, 10u);
  const auto meta = nlohmann::json::parse(slurp(path("e.meta.json")));
  EXPECT_EQ(meta["seed"], 9);
  EXPECT_EQ(meta["method"], "est");
}

TEST_F(Cli, WeakConvergenceExperiment) {
  ASSERT_EQ(run("experiment weak-convergence " + path("wc") + " --slices 64").code, 0);
  std::ifstream in(dir_ / "wc" / "weak-convergence.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t,D2_est_tau_0,", 0), 0u);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  ASSERT_EQ(rows.size(), 11u);
  const std::size_t exact_col = 5, product_col = 8;
  for (const auto& r : rows) {
    EXPECT_NEAR(r[exact_col], (1.0 - r[0]) * rows[0][exact_col], 1e-6 * rows[0][exact_col]);
  }
  EXPECT_GT(rows.back()[product_col], 0.0);
  const auto meta = nlohmann::json::parse(slurp(dir_ / "wc" / "weak-convergence.meta.json"));
  EXPECT_EQ(meta["seed"], 0);
  EXPECT_EQ(meta["slices"], 64);
}

TEST_F(Cli, ProductCostAtTimeOneIsPositive) {
  experiments::WeakConvergenceConfig cfg;
  cfg.times = {1.0};
  cfg.slices = 8;
  EXPECT_GT(experiments::weak_convergence(cfg).front().product, 0.0);
}

TEST_F(Cli, TemperatureSweepEntriesShrink) {
  ASSERT_EQ(run("experiment temperature-sweep " + path("ts")).code, 0);
  std::ifstream in(dir_ / "ts" / "temperature-sweep.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "label,tau,entries,distance,max_slice_weight");
  std::vector<std::size_t> entries;
  while (std::getline(in, line)) {
    if (line.rfind("est,", 0) != 0) continue;
    std::stringstream cells(line);
    std::string cell;
    for (int k = 0; k < 3; ++k) std::getline(cells, cell, ',');
    entries.push_back(std::stoul(cell));
  }
  ASSERT_GE(entries.size(), 3u);
  // Past the crossover (τ ≥ 100) the plan only gets sparser.
  for (std::size_t k = 5; k < entries.size(); ++k) EXPECT_LE(entries[k], entries[k - 1]);
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossThreadCounts) {
  std::mt19937_64 rng(8);
  const auto a = save("a.csv", est_test::random_measure(rng, 40, 3));
  const auto b = save("b.csv", est_test::random_measure(rng, 35, 3));
  std::string first_distance;
  std::string first_plan;
  for (const char* threads : {"1", "2", "4"}) {
    const std::string env = std::string("EST_THREADS=") + threads;
    const auto d = run("distance " + a + " " + b + " --per-slice --tau 2", env);
    ASSERT_EQ(run("plan " + a + " " + b + " " + path("p.csv") + " --tau 2", env).code, 0);
    const auto plan = slurp(path("p.csv"));
    if (first_distance.empty()) {
      first_distance = d.out;
      first_plan = plan;
    } else {
      EXPECT_EQ(d.out, first_distance) << "EST_THREADS=" << threads;
      EXPECT_EQ(plan, first_plan) << "EST_THREADS=" << threads;
    }
  }
  ASSERT_EQ(run("experiment temperature-sweep " + path("t1"), "EST_THREADS=1").code, 0);
  ASSERT_EQ(run("experiment temperature-sweep " + path("t4"), "EST_THREADS=4").code, 0);
  EXPECT_EQ(slurp(dir_ / "t1" / "temperature-sweep.csv"), slurp(dir_ / "t4" / "temperature-sweep.csv"));
}
