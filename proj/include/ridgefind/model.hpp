#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ridgefind/activation.hpp"

namespace ridgefind {

struct Feature {
  double coeff = 0.0;
  Eigen::VectorXd direction;
  Activation activation;
};

// f(x) = sum_i a_i sigma_i(v_i . x) with unit directions v_i.
class SumOfFeaturesModel {
 public:
  SumOfFeaturesModel() = default;
  // Directions are renormalized; a zero direction or a dimension mismatch is an input error.
  SumOfFeaturesModel(std::size_t dim, std::vector<Feature> features, double lipschitz, double gamma);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return features_.size(); }
  const std::vector<Feature>& features() const { return features_; }
  double lipschitz() const { return lipschitz_; }
  double gamma() const { return gamma_; }

  double evaluate(const Eigen::VectorXd& x) const;
  // Unchecked: x must point to dim() values.
  double evaluate_raw(const double* x) const;

  SumOfFeaturesModel with_coefficients(const std::vector<double>& coeffs) const;
  std::vector<Eigen::VectorXd> directions() const;

 private:
  std::size_t dim_ = 0;
  std::vector<Feature> features_;
  double lipschitz_ = 1.0;
  double gamma_ = 1.0;
};

enum class NoiseKind { kNone, kDeterministicBounded, kUniformBounded };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double eps = 0.0;
  std::uint64_t seed = 0;
};

// Perturbation added to f(x): a fixed function of the bit pattern of x.
//   uniform-bounded:        eps * (2 h(x) - 1), spread over [-eps, eps]
//   deterministic-bounded:  +eps or -eps according to the sign of 2 h(x) - 1
double noise_value(const NoiseSpec& noise, const double* x, std::size_t dim);

// The only channel through which learner code sees the unknown function.
class QueryAccess {
 public:
  virtual ~QueryAccess() = default;
  virtual std::size_t dim() const = 0;
  // Declared sup-norm accuracy of the answers.
  virtual double eps() const = 0;
  // Unchecked: x must point to dim() values.
  virtual double query_raw(const double* x) = 0;
  virtual std::uint64_t query_count() const = 0;

  double query(const Eigen::VectorXd& x);
};

class QueryOracle final : public QueryAccess {
 public:
  QueryOracle(std::shared_ptr<const SumOfFeaturesModel> model, NoiseSpec noise);

  std::size_t dim() const override { return model_->dim(); }
  double eps() const override { return noise_.kind == NoiseKind::kNone ? 0.0 : noise_.eps; }
  double query_raw(const double* x) override;
  std::uint64_t query_count() const override { return count_.load(std::memory_order_relaxed); }
  const NoiseSpec& noise() const { return noise_; }

 private:
  std::shared_ptr<const SumOfFeaturesModel> model_;
  NoiseSpec noise_;
  std::atomic<std::uint64_t> count_{0};
};

// A ground-truth instance as stored on disk: the model plus the oracle's noise.
struct Instance {
  SumOfFeaturesModel model;
  NoiseSpec noise;
};

double min_pairwise_sine(const std::vector<Eigen::VectorXd>& dirs);

struct ValidationOptions {
  double radius = 1.0;           // Lipschitz sampling covers [-4R, 4R]
  double lipschitz_step = 1e-4;
  double lipschitz_grid = 1e-3;  // spacing between sampled difference pairs
  bool check_bounded = false;
};

struct FeatureCheck {
  std::size_t index = 0;
  bool coefficient_ok = true;
  bool zero_at_origin = true;
  double sampled_lipschitz = 0.0;
  bool lipschitz_ok = true;
  std::optional<bool> bounded_ok;
};

struct ValidationReport {
  bool coefficients_ok = true;
  bool zero_at_origin_ok = true;
  bool lipschitz_ok = true;
  bool separation_ok = true;
  std::optional<bool> bounded_ok;
  double min_pairwise_sine = 1.0;
  double max_sampled_lipschitz = 0.0;
  std::vector<FeatureCheck> features;

  bool ok() const {
    return coefficients_ok && zero_at_origin_ok && lipschitz_ok && separation_ok && bounded_ok.value_or(true);
  }
};

ValidationReport validate_assumptions(const SumOfFeaturesModel& model, const ValidationOptions& opt = {});

double gaussian_reweight_eval(const std::function<double(const Eigen::VectorXd&)>& fn, double ell,
                              const Eigen::VectorXd& x);

}  // namespace ridgefind
