#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ridgefind/error.hpp"
#include "ridgefind/json_io.hpp"
#include "ridgefind/model.hpp"
#include "ridgefind/recovery.hpp"
#include "ridgefind/reduction.hpp"
#include "ridgefind/rng.hpp"
#include "ridgefind/search.hpp"

namespace ridgefind {

struct InstanceSpec {
  std::size_t dim = 3;
  std::size_t n = 3;
  double gamma = 0.5;
  std::vector<Activation> activations{Activation::sine(1.0)};  // assigned cyclically
  double coeff_min = 0.1;  // |a_i| drawn uniformly from [coeff_min, coeff_max], random sign
  double coeff_max = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_attempts = 100000;
};

Json to_json(const InstanceSpec& s);
InstanceSpec instance_spec_from_json(const Json& j);

enum class PipelineMode { kBounded, kReduction };

struct PipelineSpec {
  PipelineMode mode = PipelineMode::kBounded;
  OracleBackend backend = OracleBackend::kQuadrature;
  SearchConfig search;
  RecoveryConfig recovery;
  ReductionConfig reduction;
  std::uint64_t mass_samples = 200000;  // Monte-Carlo backend
  std::uint64_t value_samples = 100000;
  bool test_mode = true;  // ground truth available: basis retries, model.json written
  int threads = 1;
  bool trace = true;
};

struct MetricsSpec {
  double R = 1.0;
  std::size_t eval_points = 1000;
  double direction_tolerance = 0.05;
  double sup_tolerance = 0.1;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;  // pipeline and metric randomness
  std::optional<InstanceSpec> instance;
  std::string instance_file;        // used when no inline spec is given
  std::optional<NoiseSpec> noise;   // overrides the instance file's noise
  PipelineSpec pipeline;
  MetricsSpec metrics;

  void validate() const;
};

Json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Rejection-samples directions until every pair has line sine >= gamma.
SumOfFeaturesModel generate_instance(const InstanceSpec& spec, const RngStream& rng);

struct DirectionMatch {
  std::size_t recovered = 0;
  std::size_t truth = 0;
  double cost = 0.0;  // min(|u - v|, |u + v|)
};

struct MatchReport {
  std::vector<DirectionMatch> matches;
  std::vector<std::size_t> missed;      // truth indices
  std::vector<std::size_t> extraneous;  // recovered indices
  double max_cost() const;
};

// Greedy minimum-cost matching; pairs costlier than tolerance stay unmatched.
MatchReport direction_error(const std::vector<Eigen::VectorXd>& recovered, const std::vector<Eigen::VectorXd>& truth,
                            double tolerance = std::numeric_limits<double>::infinity());

Json to_json(const MatchReport& m);

// Max of |f - g| over N points uniform in the radius-R ball; a lower bound on the sup.
double sup_error_estimate(const std::function<double(const Eigen::VectorXd&)>& f,
                          const std::function<double(const Eigen::VectorXd&)>& g, std::size_t dim, double R,
                          std::size_t N, const RngStream& rng);

struct StageRecord {
  std::string name;
  double seconds = 0.0;
  std::uint64_t queries = 0;       // QueryOracle counter delta
  std::uint64_t oracle_calls = 0;  // mass or value oracle calls
};

struct RunReport {
  bool passed = false;
  std::string failed_stage;  // empty on success
  ErrorKind error_kind = ErrorKind::kInput;
  std::string error;
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> direction_mass;
  MatchReport match;
  std::optional<double> sup_error;
  std::uint64_t total_queries = 0;
  std::vector<StageRecord> stages;
  Json parameters;  // config echo
  Json diagnostics;  // search stats, reduction report

  // The report without wall-clock fields.
  Json stable_json() const;
};

Json to_json(const RunReport& r);

std::string to_string(ErrorKind kind);

enum class RunScope {
  kFull,
  kSearch,   // stop after directions.json
  kRecover,  // read directions.json from out_dir, recover and score
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  RunScope scope = RunScope::kFull;
};

// generate -> (reduce) -> search -> recover -> assemble -> metrics. Stage
// failures are recorded in the report rather than thrown.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& opt = {});

// Loads the instance named by the config (inline spec or file).
Instance resolve_instance(const ExperimentConfig& config);

// Re-renders metrics from a run directory's persisted artifacts.
RunReport render_report(const std::filesystem::path& run_dir);

}  // namespace ridgefind
