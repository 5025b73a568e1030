#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "ridgefind/harness.hpp"
#include "test_util.hpp"

using namespace ridgefind;
using namespace ridgefind::testing;
namespace fs = std::filesystem;

namespace {

// Two sine features in the plane, quadrature backend.
ExperimentConfig small_config() {
  return experiment_config_from_json(Json::parse(R"({
    "seed": 3,
    "instance": {"dim": 2, "n": 2, "gamma": 0.6,
                 "activations": [{"kind": "sine", "params": [1.0]}],
                 "coeff_min": 0.5, "coeff_max": 1.0, "seed": 4},
    "oracle": {"kind": "none", "eps": 0.0, "seed": 0},
    "pipeline": {
      "mode": "bounded", "backend": "quadrature",
      "search": {"preset": "tuned", "ell": 64.0, "C1": 1024.0, "C2": 2048.0, "tau": 2.0,
                 "heavy_multiplier": 5.0, "radius2_min": 0.09, "radius2_max": 2.25,
                 "grid_step": 0.02, "t_step": 0.01, "t_range": 2.0, "separation": 0.3,
                 "prune_sine": 0.25, "theta": 0.2, "selection": "mass-descending"},
      "recovery": {"ell": 16.0, "delta": 0.015625, "R": 1.0},
      "test_mode": true, "threads": 1, "trace": false},
    "metrics": {"R": 1.0, "eval_points": 500, "direction_tolerance": 0.05, "sup_tolerance": 0.1}
  })"));
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ridgefind_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(GenerateInstance, EmptyInstance) {
  InstanceSpec s;
  s.n = 0;
  EXPECT_EQ(generate_instance(s, RngStream(1)).size(), 0u);
}

TEST(GenerateInstance, RespectsGammaAndCoefficientRange) {
  InstanceSpec s;
  s.dim = 4;
  s.n = 5;
  s.gamma = 0.6;
  s.coeff_min = 0.5;
  s.coeff_max = 1.0;
  s.activations = {Activation::sine(1.0), Activation::tanh_like(0.6)};
  const auto m = generate_instance(s, RngStream(2));
  ASSERT_EQ(m.size(), 5u);
  EXPECT_GE(min_pairwise_sine(m.directions()), 0.6);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_GE(std::abs(m.features()[i].coeff), 0.5);
    EXPECT_LE(std::abs(m.features()[i].coeff), 1.0);
    EXPECT_NEAR(m.features()[i].direction.norm(), 1.0, 1e-12);
    EXPECT_EQ(m.features()[i].activation.kind(), s.activations[i % 2].kind());
  }
}

TEST(GenerateInstance, DeterministicInSeed) {
  InstanceSpec s;
  const auto a = generate_instance(s, RngStream(9)), b = generate_instance(s, RngStream(9));
  EXPECT_EQ(dump_json(instance_to_json(a, {})), dump_json(instance_to_json(b, {})));
  EXPECT_NE(dump_json(instance_to_json(a, {})), dump_json(instance_to_json(generate_instance(s, RngStream(10)), {})));
}

TEST(GenerateInstance, InfeasibleGammaIsGenerationError) {
  InstanceSpec s;
  s.dim = 2;
  s.n = 4;
  s.gamma = 0.95;
  s.max_attempts = 2000;
  EXPECT_THROW(generate_instance(s, RngStream(1)), GenerationError);
}

TEST(DirectionError, IdenticalAndNegated) {
  const std::vector<Eigen::VectorXd> t{vec({1, 0, 0}), vec({0, 0.6, 0.8})};
  auto r = direction_error(t, t);
  EXPECT_EQ(r.max_cost(), 0.0);
  EXPECT_TRUE(r.missed.empty() && r.extraneous.empty());
  r = direction_error({-t[1], -t[0]}, t);
  EXPECT_EQ(r.max_cost(), 0.0);
  EXPECT_EQ(r.matches.size(), 2u);
}

TEST(DirectionError, MissedAndExtraneous) {
  const auto r = direction_error({vec({1, 0})}, {vec({0, 1}), vec({1, 0.01}) / std::hypot(1, 0.01)}, 0.05);
  EXPECT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.missed, std::vector<std::size_t>{0});
  const auto s = direction_error({vec({1, 0}), vec({0, 1})}, {vec({1, 0})}, 0.05);
  EXPECT_EQ(s.extraneous, std::vector<std::size_t>{1});
}

TEST(DirectionError, OptimalOnWellSeparatedSets) {
  // With perturbations far below the separation the greedy matching is the
  // optimal assignment; compare against brute force over permutations.
  std::mt19937_64 g(5);
  for (std::size_t n : {4, 6}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto t = separated_directions(n, n, 0.7, g);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), g);
      std::vector<Eigen::VectorXd> rec;
      for (std::size_t k : perm) {
        Eigen::VectorXd u = t[k] + 0.02 * random_unit(n, g);
        rec.push_back((trial % 2 ? -1.0 : 1.0) * u / u.norm());
      }
      const auto r = direction_error(rec, t);
      double total = 0.0;
      for (const auto& m : r.matches) total += m.cost;
      std::vector<std::size_t> p(n);
      std::iota(p.begin(), p.end(), 0);
      double best = 1e9;
      do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += std::min((rec[i] - t[p[i]]).norm(), (rec[i] + t[p[i]]).norm());
        best = std::min(best, c);
      } while (std::next_permutation(p.begin(), p.end()));
      EXPECT_NEAR(total, best, 1e-12);
      EXPECT_EQ(r.matches.size() + r.missed.size(), n);
      EXPECT_EQ(r.matches.size() + r.extraneous.size(), rec.size());
    }
  }
}

TEST(SupError, KnownDifferences) {
  auto zero = [](const Eigen::VectorXd&) { return 0.0; };
  auto c = [](const Eigen::VectorXd&) { return 0.07; };
  EXPECT_EQ(sup_error_estimate(zero, zero, 3, 1.0, 100, RngStream(1)), 0.0);
  EXPECT_DOUBLE_EQ(sup_error_estimate(c, zero, 3, 1.0, 100, RngStream(1)), 0.07);
  auto s = [](const Eigen::VectorXd& x) { return 0.1 * std::sin(5 * x[0]); };
  const double e = sup_error_estimate(s, zero, 2, 1.0, 10000, RngStream(2));
  EXPECT_GE(e, 0.099);
  EXPECT_LE(e, 0.1);
}

TEST(ExperimentConfig, JsonRoundTripAndValidation) {
  const auto c = small_config();
  const auto b = experiment_config_from_json(Json::parse(dump_json(to_json(c))));
  EXPECT_EQ(dump_json(to_json(b)), dump_json(to_json(c)));
  auto bad = to_json(c);
  bad["metrics"]["eval_points"] = 0;
  EXPECT_THROW(experiment_config_from_json(bad).validate(), ConfigError);
}

TEST(RunExperiment, EmptyInstancePasses) {
  auto c = small_config();
  c.instance->n = 0;
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.passed) << r.error;
  EXPECT_TRUE(r.directions.empty());
  EXPECT_EQ(*r.sup_error, 0.0);
}

TEST(RunExperiment, SmallInstanceRecoveredAndPersisted) {
  const auto dir = scratch_dir("small");
  RunOptions o;
  o.out_dir = dir;
  const auto r = run_experiment(small_config(), o);
  ASSERT_TRUE(r.failed_stage.empty()) << r.error;
  EXPECT_TRUE(r.passed) << dump_json(r.stable_json());
  EXPECT_EQ(r.directions.size(), 2u);
  EXPECT_LE(r.match.max_cost(), 0.05);
  EXPECT_LE(*r.sup_error, 0.1);
  for (const char* f : {"config.json", "model.json", "directions.json", "assembled.json", "report.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_TRUE(fs::exists(dir / "ridges" / "ridge_0.json"));

  // Stage query counts add up to the total.
  std::uint64_t q = 0;
  for (const auto& s : r.stages) q += s.queries;
  EXPECT_EQ(q, r.total_queries);

  const auto again = render_report(dir);
  EXPECT_EQ(again.passed, r.passed);
  EXPECT_EQ(*again.sup_error, *r.sup_error);
  EXPECT_EQ(again.match.max_cost(), r.match.max_cost());
  fs::remove_all(dir);
}

TEST(RunExperiment, ReplayIsBitIdentical) {
  const auto a = run_experiment(small_config());
  const auto b = run_experiment(small_config());
  EXPECT_EQ(dump_json(a.stable_json()), dump_json(b.stable_json()));
}

TEST(RunExperiment, SearchThenRecoverMatchesFullRun) {
  const auto dir = scratch_dir("split");
  RunOptions o;
  o.out_dir = dir;
  o.scope = RunScope::kSearch;
  const auto s = run_experiment(small_config(), o);
  ASSERT_TRUE(s.failed_stage.empty()) << s.error;
  o.scope = RunScope::kRecover;
  const auto r = run_experiment(small_config(), o);
  const auto full = run_experiment(small_config());
  ASSERT_TRUE(r.failed_stage.empty()) << r.error;
  EXPECT_EQ(*r.sup_error, *full.sup_error);
  fs::remove_all(dir);
}

TEST(RunExperiment, QuadratureAboveThreeDimensionsIsUnsupported) {
  auto c = small_config();
  c.instance->dim = 4;
  const auto r = run_experiment(c);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.error_kind, ErrorKind::kUnsupported);
}

TEST(RunExperiment, InfeasibleInstanceReportsGenerationStage) {
  auto c = small_config();
  c.instance->n = 4;
  c.instance->gamma = 0.95;
  c.instance->max_attempts = 1000;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.failed_stage, "generate");
  EXPECT_EQ(r.error_kind, ErrorKind::kGeneration);
}

TEST(RenderReport, MissingDirectoryIsIoError) {
  EXPECT_THROW(render_report(scratch_dir("missing")), IoError);
}
