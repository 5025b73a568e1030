#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ridgefind/estimators.hpp"
#include "ridgefind/json_io.hpp"
#include "ridgefind/model.hpp"
#include "ridgefind/recovery.hpp"
#include "ridgefind/rng.hpp"
#include "ridgefind/search.hpp"

namespace ridgefind {

enum class OracleBackend { kMonteCarlo, kQuadrature };

std::string to_string(OracleBackend backend);
OracleBackend oracle_backend_from_string(const std::string& name);

// Learning an unbounded Lipschitz sum through directional derivatives of the
// Gaussian-smoothed function g = E[f(x + eta Z)].
struct ReductionConfig {
  double eta = 0.1;
  std::optional<double> alpha;  // finite-difference step; eps^0.5 when unset
  std::uint64_t smoothing_samples = 20000;
  // Largest admissible noise term 4 eps / alpha of the derivative oracle.
  double derivative_tolerance = 0.05;
  double lipschitz = 1.0;  // declared L; derivative ridges are scaled by eta / L
  std::vector<Eigen::VectorXd> probes;  // empty means e_1 .. e_d
  SearchConfig search;                  // thresholds in units of the unscaled derivative
  RecoveryConfig recovery;
  OracleBackend backend = OracleBackend::kQuadrature;
  std::uint64_t search_samples = 50000;  // Monte-Carlo backend only
  std::uint64_t value_samples = 50000;
  double low_signal = 0.1;  // flag a direction when max |u . w| < low_signal / sqrt(d)

  double alpha_for(double eps) const;
  double scale() const { return eta / lipschitz; }
  std::vector<Eigen::VectorXd> probes_for(std::size_t d) const;
  void validate(std::size_t d, double eps) const;
};

Json to_json(const ReductionConfig& c);
ReductionConfig reduction_config_from_json(const Json& j);

struct SmoothedValue {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t m = 0;
};

// Monte-Carlo mean of f~(x + z), z ~ N(0, eta^2 I).
SmoothedValue smoothed_query(QueryAccess& oracle, double eta, const Eigen::VectorXd& x, std::uint64_t m,
                             const RngStream& rng);

// Query access to scale * (<u, grad g(x)> - <u, grad g(0)>). Every call reuses
// one fixed set of smoothing offsets, so the simulated function is a fixed
// function of x. Each answer costs 2 m base queries.
class DerivativeOracle final : public QueryAccess {
 public:
  DerivativeOracle(QueryAccess& base, Eigen::VectorXd u, double eta, double alpha, std::uint64_t m, double scale,
                   const RngStream& rng);

  std::size_t dim() const override { return base_.dim(); }
  // Declared accuracy: scale * (4 eps / alpha), the part a learner can bound.
  double eps() const override;
  double query_raw(const double* x) override;
  std::uint64_t query_count() const override { return count_.load(std::memory_order_relaxed); }

  // Unshifted, unscaled centred difference (g(x + alpha u / 2) - g(x - alpha u / 2)) / alpha.
  double raw_difference(const double* x) const;
  double origin_slope() const { return origin_; }
  const Eigen::VectorXd& probe() const { return u_; }

 private:
  QueryAccess& base_;
  Eigen::VectorXd u_;
  double eta_;
  double alpha_;
  double scale_;
  Eigen::MatrixXd offsets_;  // m x d, rows eta Z_k
  double origin_ = 0.0;
  std::atomic<std::uint64_t> count_{0};
};

// Ground-truth derivative model for the quadrature backend:
// x -> scale * sum_i a_i (u . v_i) (s_i(v_i . x) - s_i(0)), s_i the smoothed slope.
// Features whose contribution vanishes identically are dropped.
std::shared_ptr<SumOfFeaturesModel> derivative_model(const SumOfFeaturesModel& model, const Eigen::VectorXd& u,
                                                     double eta, double scale, double half_range);

// Cumulative trapezoid antiderivative of the ridge's table, anchored at 0.
RecoveredRidge integrate_ridge(const RecoveredRidge& derivative);

struct ProbeReport {
  Eigen::VectorXd probe;
  std::vector<CandidateDirection> directions;
  SearchStats stats;
  std::uint64_t base_queries = 0;
};

struct MergedDirection {
  Eigen::VectorXd w;
  double mass = 0.0;
  std::vector<std::size_t> sources;  // probe indices that reported this line
  std::size_t best_probe = 0;
  double best_projection = 0.0;  // u . w for the chosen probe
  bool low_signal = false;
};

struct ReductionResult {
  AssembledModel model;  // g(0) + grad g(0) . x + sum_j G_j(w_j . x)
  std::vector<ProbeReport> probes;
  std::vector<MergedDirection> merged;
  double g0 = 0.0;
  Eigen::VectorXd gradient0;
  std::uint64_t base_queries = 0;
};

Json to_json(const ReductionResult& r);

struct ReductionOptions {
  int threads = 1;
  std::optional<std::vector<Eigen::VectorXd>> truth;  // basis retries in test mode
};

// Monte-Carlo backend: everything is simulated from queries.
ReductionResult recover_unbounded(QueryAccess& oracle, const ReductionConfig& cfg, const RngStream& rng,
                                  const ReductionOptions& opt = {});

// Quadrature backend: derivative oracles are exact references built from the
// instance, and g(0), grad g(0) are evaluated by one-dimensional quadrature.
ReductionResult recover_unbounded_reference(std::shared_ptr<const SumOfFeaturesModel> model,
                                            const ReductionConfig& cfg, const RngStream& rng,
                                            const ReductionOptions& opt = {});

}  // namespace ridgefind
