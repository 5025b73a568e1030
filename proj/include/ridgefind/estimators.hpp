#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ridgefind/fourier.hpp"
#include "ridgefind/json_io.hpp"
#include "ridgefind/model.hpp"
#include "ridgefind/rng.hpp"

namespace ridgefind {

// Center v and precision matrix A of the window exp(-(y - v)^T A (y - v)).
class GaussianWeight {
 public:
  GaussianWeight(Eigen::VectorXd v, Eigen::MatrixXd A);

  const Eigen::VectorXd& v() const { return v_; }
  const Eigen::MatrixXd& A() const { return A_; }
  // Eigen form with eigenvalues clamped at zero.
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Eigen::MatrixXd& eigenvectors() const { return evecs_; }
  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }

 private:
  Eigen::VectorXd v_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

enum class ScaleRole { kDirectionSearch, kFunctionRecovery };

struct SmoothingScale {
  double ell = 1.0;
  ScaleRole role = ScaleRole::kDirectionSearch;
  SmoothingScale() = default;
  SmoothingScale(double l, ScaleRole r);
};

struct Estimate {
  std::complex<double> value;
  std::uint64_t m = 0;
  double radius = 0.0;
  double delta = 0.05;
};

// 8 (pi ell^2)^{d/2} (eps + sqrt(2 log(8/delta) / m))
double weight_radius(double ell, std::size_t d, double eps, double delta, std::uint64_t m);
// 4 ell^d (eps + sqrt(2 log(8/delta) / m))
double value_radius(double ell, std::size_t d, double eps, double delta, std::uint64_t m);

struct SampleBudget {
  std::uint64_t max_samples = 10'000'000;
};

// Smallest m whose radius is <= tau; BudgetError when above the cap or unreachable.
std::uint64_t weight_samples_for(double tau, double ell, std::size_t d, double eps, double delta,
                                 const SampleBudget& budget = {});
std::uint64_t value_samples_for(double tau, double ell, std::size_t d, double eps, double delta,
                                const SampleBudget& budget = {});

// Monte-Carlo estimate of the reweighted Fourier mass from queries.
Estimate est_weight(QueryAccess& oracle, const SmoothingScale& ell, const GaussianWeight& w, std::uint64_t m,
                    const RngStream& rng, double delta = 0.05, int threads = 1);

// Monte-Carlo estimate of the transform of f^(ell) at y.
Estimate est_val(QueryAccess& oracle, const SmoothingScale& ell, const Eigen::VectorXd& y, std::uint64_t m,
                 const RngStream& rng, double delta = 0.05, int threads = 1);

// tau-accurate (with probability 1 - delta) mass; real part of est_weight.
double fourier_mass_oracle(QueryAccess& oracle, const SmoothingScale& ell, const GaussianWeight& w, double tau,
                           double delta, const RngStream& rng, const SampleBudget& budget = {}, int threads = 1);
std::complex<double> fourier_value_oracle(QueryAccess& oracle, const SmoothingScale& ell, const Eigen::VectorXd& y,
                                          double tau, double delta, const RngStream& rng,
                                          const SampleBudget& budget = {}, int threads = 1);

// Line-delimited record sink, safe to share between threads.
class TraceLog {
 public:
  explicit TraceLog(std::string path) : path_(std::move(path)) {}
  void write(const Json& record);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mu_;
};

// Source of mass values I*(v, A) for the search.
class MassOracle {
 public:
  virtual ~MassOracle() = default;
  virtual std::size_t dim() const = 0;
  virtual double ell() const = 0;
  virtual double mass(const Eigen::VectorXd& v, const Eigen::MatrixXd& A) = 0;
  // out[k] = mass(base + cs[k] * dir, A).
  virtual void mass_line(const Eigen::VectorXd& base, const Eigen::VectorXd& dir, const std::vector<double>& cs,
                         const Eigen::MatrixXd& A, std::vector<double>& out);
  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
  void set_trace(TraceLog* trace) { trace_ = trace; }

 protected:
  std::atomic<std::uint64_t> calls_{0};
  TraceLog* trace_ = nullptr;
};

// Source of transform values of f^(ell) for recovery.
class ValueOracle {
 public:
  virtual ~ValueOracle() = default;
  virtual std::size_t dim() const = 0;
  virtual double ell() const = 0;
  virtual std::complex<double> value(const Eigen::VectorXd& y) = 0;
  // out[k] = value(ts[k] * u).
  virtual void value_ray(const Eigen::VectorXd& u, const std::vector<double>& ts, std::vector<std::complex<double>>& out);
  // True for exact references: value(-y) = conj(value(y)) may be used instead of a query.
  virtual bool noise_free() const = 0;
  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
  void set_trace(TraceLog* trace) { trace_ = trace; }

 protected:
  std::atomic<std::uint64_t> calls_{0};
  TraceLog* trace_ = nullptr;
};

// How Monte-Carlo oracles draw samples.
//   per-call: fresh samples for every request (the plain estimator per call).
//   shared:   one sample batch per window matrix A (mass) or per scale (value)
//             is drawn once and reused for every center; each individual
//             answer has the same distribution as a per-call answer.
enum class SamplingMode { kPerCall, kShared };

struct McOracleOptions {
  std::uint64_t samples = 0;  // fixed m; 0 means derive m from (tau, delta)
  double tau = 0.0;
  double delta = 0.05;
  SampleBudget budget;
  SamplingMode mode = SamplingMode::kShared;
  int threads = 1;
};

class McMassOracle final : public MassOracle {
 public:
  McMassOracle(QueryAccess& oracle, double ell, McOracleOptions opt, RngStream rng);

  std::size_t dim() const override { return oracle_.dim(); }
  double ell() const override { return ell_; }
  double mass(const Eigen::VectorXd& v, const Eigen::MatrixXd& A) override;
  void mass_line(const Eigen::VectorXd& base, const Eigen::VectorXd& dir, const std::vector<double>& cs,
                 const Eigen::MatrixXd& A, std::vector<double>& out) override;
  std::uint64_t samples_per_call() const { return m_; }
  double radius() const;

 private:
  struct Batch {
    Eigen::MatrixXd delta;        // m x d
    std::vector<double> weight;   // exp(-|D|^2/(4 ell^2)) f(Z - D/2) f(Z + D/2)
  };
  struct Rotation {
    std::vector<double> re, im;  // exp(i h D_j . dir)
  };
  std::shared_ptr<const Batch> batch_for(const Eigen::MatrixXd& A);
  std::shared_ptr<const Batch> build_batch(const Eigen::MatrixXd& A);
  std::shared_ptr<const Rotation> rotation_for(const Eigen::MatrixXd& A, const Batch& batch,
                                               const Eigen::VectorXd& dir, double h);

  QueryAccess& oracle_;
  double ell_;
  McOracleOptions opt_;
  RngStream rng_;
  std::uint64_t m_;
  double scale_;  // (pi ell^2)^{d/2}
  std::mutex mu_;
  std::map<std::vector<double>, std::shared_future<std::shared_ptr<const Batch>>> batches_;
  std::map<std::vector<double>, std::shared_ptr<const Rotation>> rotations_;
};

class McValueOracle final : public ValueOracle {
 public:
  McValueOracle(QueryAccess& oracle, double ell, McOracleOptions opt, RngStream rng);

  std::size_t dim() const override { return oracle_.dim(); }
  double ell() const override { return ell_; }
  std::complex<double> value(const Eigen::VectorXd& y) override;
  void value_ray(const Eigen::VectorXd& u, const std::vector<double>& ts,
                 std::vector<std::complex<double>>& out) override;
  bool noise_free() const override { return false; }
  std::uint64_t samples_per_call() const { return m_; }

 private:
  struct Batch {
    Eigen::MatrixXd x;          // m x d
    std::vector<double> f;      // query values
  };
  std::shared_ptr<const Batch> batch();

  QueryAccess& oracle_;
  double ell_;
  McOracleOptions opt_;
  RngStream rng_;
  std::uint64_t m_;
  std::mutex mu_;
  std::shared_ptr<const Batch> batch_;
};

struct QuadratureMassOptions {
  double rel_tol = 1e-8;
  double t_table = 8.0;  // extent of the sigma_hat tables
};

// Reference mass: integrates |f^(ell) transform|^2 against the window using the
// ridge structure. Along each ridge line the orthogonal directions are
// Gaussian and integrated in closed form; the remaining one-dimensional
// (own terms) and two-dimensional (cross terms) integrals are adaptive.
// Cross terms whose closed-form magnitude bound is negligible are skipped.
class QuadratureMassOracle final : public MassOracle {
 public:
  QuadratureMassOracle(std::shared_ptr<const SumOfFeaturesModel> model, double ell,
                       QuadratureMassOptions opt = {});
  ~QuadratureMassOracle() override;

  std::size_t dim() const override { return model_->dim(); }
  double ell() const override { return ell_; }
  double mass(const Eigen::VectorXd& v, const Eigen::MatrixXd& A) override;
  const ModelSpectrum& spectrum() const { return spectrum_; }

  struct Prepared;

 private:
  std::shared_ptr<const Prepared> prepare(const Eigen::MatrixXd& A);

  std::shared_ptr<const SumOfFeaturesModel> model_;
  double ell_;
  QuadratureMassOptions opt_;
  ModelSpectrum spectrum_;
  double floor_;
  std::mutex mu_;
  std::map<std::vector<double>, std::shared_ptr<const Prepared>> cache_;
};

// Reference mass for an arbitrary one-dimensional function (no normalization
// at the origin): int |f^(ell) transform(y)|^2 exp(-a (y - v)^2) dy, transform
// by quadrature in x. Needs a > 0.
double quadrature_mass_1d(const std::function<double(double)>& fn, double ell, double v, double a,
                          const std::vector<double>& breakpoints = {});

// Exact transform values of f^(ell).
class QuadratureValueOracle final : public ValueOracle {
 public:
  QuadratureValueOracle(std::shared_ptr<const SumOfFeaturesModel> model, double ell, double t_table = 8.0);
  std::size_t dim() const override { return spectrum_.model().dim(); }
  double ell() const override { return spectrum_.ell(); }
  std::complex<double> value(const Eigen::VectorXd& y) override;
  bool noise_free() const override { return true; }

 private:
  ModelSpectrum spectrum_;
};

}  // namespace ridgefind
