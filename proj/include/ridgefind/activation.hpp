#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace ridgefind {

enum class ActivationKind {
  kSine,            // sin(w x)
  kCosineBump,      // raised cosine of half-width w, shifted so sigma(0) = 0
  kTanh,            // tanh(k x)
  kHinge,           // max(0, x - c)
  kPiecewiseLinear, // interpolates (x_k, y_k), constant outside
  kGaussianBump,    // exp(-(x - c)^2 / (2 s^2))
  kAbsolute,        // |x - c|
  kTabulated,       // uniform table, linear interpolation, clamped
  kLinear,          // p x
  kTrigLinear,      // p x + q cos(w x) + r sin(w x)
};

std::string to_string(ActivationKind kind);
ActivationKind activation_kind_from_string(const std::string& name);

// A univariate activation with sigma(0) = 0. The raw shape's value at the
// origin is subtracted at construction.
//
// Parameter layouts:
//   sine            [w]
//   cosine-bump     [w]
//   tanh-like       [k]
//   hinge           [c]
//   piecewise-linear[x0, y0, x1, y1, ...]   (x strictly increasing)
//   gaussian-bump   [s, c]                  (c optional, default 0)
//   absolute-value  [c]                     (optional, default 0)
//   tabulated       [x0, step, v0, v1, ...] (step <= 1e-3)
//   linear          [p]
//   trig-linear     [p, q, r, w]
class Activation {
 public:
  Activation();  // the zero activation
  static Activation make(ActivationKind kind, std::vector<double> params);

  static Activation sine(double w = 1.0) { return make(ActivationKind::kSine, {w}); }
  static Activation cosine_bump(double w = 1.0) { return make(ActivationKind::kCosineBump, {w}); }
  static Activation tanh_like(double k = 1.0) { return make(ActivationKind::kTanh, {k}); }
  static Activation hinge(double c = 0.0) { return make(ActivationKind::kHinge, {c}); }
  static Activation piecewise_linear(const std::vector<double>& xs, const std::vector<double>& ys);
  static Activation gaussian_bump(double s = 1.0, double c = 0.0) {
    return make(ActivationKind::kGaussianBump, {s, c});
  }
  static Activation absolute(double c = 0.0) { return make(ActivationKind::kAbsolute, {c}); }
  static Activation tabulated(double x0, double step, const std::vector<double>& values);
  static Activation linear(double p) { return make(ActivationKind::kLinear, {p}); }
  static Activation trig_linear(double p, double q, double r, double w) {
    return make(ActivationKind::kTrigLinear, {p, q, r, w});
  }

  double operator()(double x) const { return raw(x) - offset_; }

  ActivationKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double lipschitz() const { return lipschitz_; }
  // sup |sigma| over the real line; infinity when unbounded.
  double sup_abs() const { return sup_abs_; }
  bool bounded() const { return sup_abs_ <= 1.0 + 1e-12; }
  // Points where sigma is not smooth.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  // |t| beyond which the Gaussian-weighted transform at scale ell is below
  // roughly 1e-17 of its peak; infinity when no such cutoff is known.
  double spectral_cutoff(double ell) const;
  bool has_closed_form_transform() const;
  // (2 pi)^{-1/2} int sigma(x) exp(-x^2/(2 ell^2)) exp(-i t x) dx in closed form.
  std::complex<double> transform_closed_form(double ell, double t) const;

  // E[sigma(t + eta Z)] and its derivative in t, Z standard normal.
  double smoothed_value(double eta, double t) const;
  double smoothed_slope(double eta, double t) const;
  // t -> smoothed_slope(eta, t) - smoothed_slope(eta, 0), tabulated on
  // [-half_range, half_range] when no closed form is available.
  Activation smoothed_derivative(double eta, double half_range) const;

 private:
  Activation(ActivationKind kind, std::vector<double> params);
  double raw(double x) const;
  void finalize();

  ActivationKind kind_;
  std::vector<double> params_;
  double offset_ = 0.0;
  double lipschitz_ = 0.0;
  double sup_abs_ = 0.0;
  std::vector<double> breakpoints_;
};

}  // namespace ridgefind
