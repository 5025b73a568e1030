#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "ridgefind/activation.hpp"
#include "ridgefind/estimators.hpp"
#include "ridgefind/json_io.hpp"

namespace ridgefind {

struct RecoveryConfig {
  double ell = 16.0;
  double delta = 1.0 / 64.0;  // grid step of the frequency samples and table mesh
  double R = 1.0;             // table covers [-R, R]
  // Frequency band [ell^-0.9, delta^-0.1] unless overridden.
  std::optional<double> t_min;
  std::optional<double> t_max;

  double band_low() const;
  double band_high() const;
  void validate() const;
};

Json to_json(const RecoveryConfig& c);
RecoveryConfig recovery_config_from_json(const Json& j);

// Estimate of a_i sigma_i along u. A Fourier ridge evaluates the truncated
// inversion sum; a tabulated ridge (integrated derivatives) interpolates
// linearly between table nodes.
class RecoveredRidge {
 public:
  enum class Kind { kFourier, kTabulated };

  RecoveredRidge() = default;
  static RecoveredRidge fourier(Eigen::VectorXd u, double ell, double delta, std::vector<double> ts,
                                std::vector<std::complex<double>> values, double R, int threads = 1);
  static RecoveredRidge tabulated(Eigen::VectorXd u, double R, double mesh, std::vector<double> values);

  Kind kind() const { return kind_; }
  const Eigen::VectorXd& u() const { return u_; }
  std::size_t dim() const { return static_cast<std::size_t>(u_.size()); }
  double ell() const { return ell_; }
  double delta() const { return delta_; }
  double shift() const { return shift_; }
  double table_radius() const { return R_; }
  double mesh() const { return mesh_; }
  const std::vector<double>& ts() const { return ts_; }
  const std::vector<std::complex<double>>& samples() const { return values_; }
  const std::vector<double>& table() const { return table_; }  // node k at z = -R + k * mesh

  // Real part of the inversion sum; out-of-range z is an input error.
  double operator()(double z) const;
  // Imaginary part of the un-shifted sum (realness diagnostic); Fourier ridges only.
  double imaginary(double z) const;

 private:
  std::complex<double> series(double z) const;  // (delta / sqrt(2 pi)) sum e^{itz} V(tu) / ell^{d-1}
  double analytic(double z) const;

  Kind kind_ = Kind::kTabulated;
  Eigen::VectorXd u_;
  double ell_ = 1.0;
  double delta_ = 1.0;
  std::vector<double> ts_;
  std::vector<std::complex<double>> values_;
  double shift_ = 0.0;
  double R_ = 0.0;
  double mesh_ = 1.0;
  std::vector<double> table_;
};

Json to_json(const RecoveredRidge& r);
RecoveredRidge recovered_ridge_from_json(const Json& j);

// Queries V(t u) on the band (both signs, or positive t plus conjugate symmetry
// for noise-free oracles) and builds the ridge.
RecoveredRidge recover_ridge(ValueOracle& oracle, const Eigen::VectorXd& u, const RecoveryConfig& cfg, int threads = 1);

double eval_recovered(const RecoveredRidge& r, double z);

// x -> constant + linear . x + sum_j ridge_j(u_j . x)
class AssembledModel {
 public:
  AssembledModel() = default;
  AssembledModel(std::size_t dim, std::vector<RecoveredRidge> ridges, double constant = 0.0,
                 std::optional<Eigen::VectorXd> linear = std::nullopt);

  std::size_t dim() const { return dim_; }
  const std::vector<RecoveredRidge>& ridges() const { return ridges_; }
  double constant() const { return constant_; }
  const Eigen::VectorXd& linear() const { return linear_; }
  double operator()(const Eigen::VectorXd& x) const;

 private:
  std::size_t dim_ = 0;
  std::vector<RecoveredRidge> ridges_;
  double constant_ = 0.0;
  Eigen::VectorXd linear_;
};

AssembledModel assemble_model(std::size_t dim, std::vector<RecoveredRidge> ridges);

Json to_json(const AssembledModel& m);
AssembledModel assembled_model_from_json(const Json& j);

// e^{x^2/(2 ell^2)} (2 pi)^{-1/2} int_{-B}^{B} e^{i y x} sigma_hat(y) dy by quadrature.
double truncated_inversion_reference(const Activation& sigma, double ell, double B, double x);

}  // namespace ridgefind
