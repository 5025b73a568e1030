#pragma once

// Transforms under the Gaussian weight exp(-|x|^2 / (2 ell^2)), with the
// convention g^(y) = (2 pi)^{-d/2} int g(x) exp(-i y.x) dx.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "ridgefind/activation.hpp"
#include "ridgefind/model.hpp"

namespace ridgefind {

using Complex = std::complex<double>;

struct SigmaHatOptions {
  double abs_tol = 1e-10;
  int max_panels = 2000000;
};

// Adaptive quadrature of (2 pi)^{-1/2} int_{|x| <= 12 ell} sigma(x) exp(-x^2/(2 ell^2)) exp(-i t x) dx.
// Throws NumericalError if the tolerance is not reached.
Complex sigma_hat_quadrature(const Activation& sigma, double ell, double t, const SigmaHatOptions& opt = {});

// The same transform for an arbitrary function, with optional kinks for the quadrature.
Complex function_hat_quadrature(const std::function<double(double)>& fn, double ell, double t,
                               const std::vector<double>& breakpoints = {}, const SigmaHatOptions& opt = {});

// Upper bound on sup_t |sigma_hat(t)|: (2 pi)^{-1/2} int |sigma(x)| exp(-x^2/(2 ell^2)) dx.
double sigma_hat_sup_bound(const Activation& sigma, double ell);

// Fast evaluator of sigma_hat at one scale: closed form where available,
// otherwise a 10-point Lagrange interpolant on a table of quadrature values
// (conjugate symmetry covers negative t) and zero beyond the spectral cutoff.
// The table reaches the cutoff when it is finite (up to 64), else t_table;
// direct quadrature covers anything between the table end and the cutoff.
class SigmaHat {
 public:
  SigmaHat(const Activation& sigma, double ell, double t_table);

  Complex operator()(double t) const;
  double ell() const { return ell_; }
  double sup_bound() const { return sup_bound_; }
  double cutoff() const { return cutoff_; }
  const Activation& activation() const { return sigma_; }

 private:
  Activation sigma_;
  double ell_;
  double cutoff_;
  double sup_bound_;
  bool closed_form_;
  double step_ = 0.0;
  std::vector<Complex> table_;  // index k + kPad holds t = k * step_
};

// sigma_hat(v.y) ell^{d-1} exp(-ell^2 |y - (v.y) v|^2 / 2), sigma_hat by quadrature.
Complex ridge_fourier_transform(const Activation& sigma, double ell, const Eigen::VectorXd& v,
                                const Eigen::VectorXd& y);

// The transform of f^(ell) for a whole model, using fast per-feature evaluators.
class ModelSpectrum {
 public:
  ModelSpectrum(std::shared_ptr<const SumOfFeaturesModel> model, double ell, double t_table);

  Complex operator()(const Eigen::VectorXd& y) const;
  // Contribution of feature i alone (including its coefficient).
  Complex feature(std::size_t i, const Eigen::VectorXd& y) const;

  const SumOfFeaturesModel& model() const { return *model_; }
  const SigmaHat& sigma_hat(std::size_t i) const { return hats_[i]; }
  double ell() const { return ell_; }

 private:
  std::shared_ptr<const SumOfFeaturesModel> model_;
  double ell_;
  std::vector<SigmaHat> hats_;
};

}  // namespace ridgefind
