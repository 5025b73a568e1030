#include "ridgefind/activation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "ridgefind/error.hpp"
#include "ridgefind/quadrature.hpp"

namespace ridgefind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kMaxTableStep = 1e-3;

struct KindName {
  ActivationKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ActivationKind::kSine, "sine"},
    {ActivationKind::kCosineBump, "cosine-bump"},
    {ActivationKind::kTanh, "tanh-like"},
    {ActivationKind::kHinge, "hinge"},
    {ActivationKind::kPiecewiseLinear, "piecewise-linear"},
    {ActivationKind::kGaussianBump, "gaussian-bump"},
    {ActivationKind::kAbsolute, "absolute-value"},
    {ActivationKind::kTabulated, "tabulated"},
    {ActivationKind::kLinear, "linear"},
    {ActivationKind::kTrigLinear, "trig-linear"},
};

// Transform of exp(i w x) under the Gaussian weight: ell * exp(-ell^2 (t - w)^2 / 2).
double shifted_gaussian(double ell, double t, double w) {
  const double u = ell * (t - w);
  return ell * std::exp(-0.5 * u * u);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw InputError("activation: " + msg);
}

double gauss_expectation(const std::function<double(double)>& g, const std::vector<double>& kinks) {
  // E[g(Z)] for standard normal Z; the weight is below 1e-31 outside |z| <= 12.
  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-12;
  opt.initial_panels = 24;
  opt.breakpoints = kinks;
  const double c = 1.0 / std::sqrt(2 * kPi);
  auto r = quad::integrate([&](double z) { return g(z) * c * std::exp(-0.5 * z * z); }, -12.0, 12.0, opt);
  return r.value;
}

}  // namespace

std::string to_string(ActivationKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "unknown";
}

ActivationKind activation_kind_from_string(const std::string& name) {
  for (const auto& kn : kKindNames)
    if (name == kn.name) return kn.kind;
  throw InputError("unknown activation kind '" + name + "'");
}

Activation::Activation() : Activation(ActivationKind::kLinear, {0.0}) {}

Activation::Activation(ActivationKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  finalize();
}

Activation Activation::make(ActivationKind kind, std::vector<double> params) {
  for (double p : params) require(std::isfinite(p), "non-finite parameter");
  switch (kind) {
    case ActivationKind::kSine:
    case ActivationKind::kTanh:
    case ActivationKind::kLinear:
      require(params.size() == 1, "expected one parameter");
      break;
    case ActivationKind::kCosineBump:
      require(params.size() == 1 && params[0] > 0, "cosine-bump needs a positive half-width");
      break;
    case ActivationKind::kHinge:
      require(params.size() == 1, "hinge needs a knot");
      break;
    case ActivationKind::kAbsolute:
      if (params.empty()) params.push_back(0.0);
      require(params.size() == 1, "absolute-value takes at most one parameter");
      break;
    case ActivationKind::kGaussianBump:
      if (params.size() == 1) params.push_back(0.0);
      require(params.size() == 2 && params[0] > 0, "gaussian-bump needs a positive width");
      break;
    case ActivationKind::kPiecewiseLinear: {
      require(params.size() >= 4 && params.size() % 2 == 0, "piecewise-linear needs >= 2 (x, y) pairs");
      for (std::size_t k = 2; k < params.size(); k += 2)
        require(params[k] > params[k - 2], "piecewise-linear breakpoints must increase");
      break;
    }
    case ActivationKind::kTabulated:
      require(params.size() >= 4, "tabulated needs x0, step and at least two values");
      require(params[1] > 0 && params[1] <= kMaxTableStep * (1 + 1e-12), "tabulated step must be in (0, 1e-3]");
      break;
    case ActivationKind::kTrigLinear:
      require(params.size() == 4, "trig-linear needs [p, q, r, w]");
      break;
  }
  return Activation(kind, std::move(params));
}

Activation Activation::piecewise_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), "piecewise-linear x/y size mismatch");
  std::vector<double> p;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    p.push_back(xs[k]);
    p.push_back(ys[k]);
  }
  return make(ActivationKind::kPiecewiseLinear, std::move(p));
}

Activation Activation::tabulated(double x0, double step, const std::vector<double>& values) {
  std::vector<double> p{x0, step};
  p.insert(p.end(), values.begin(), values.end());
  return make(ActivationKind::kTabulated, std::move(p));
}

double Activation::raw(double x) const {
  const auto& p = params_;
  switch (kind_) {
    case ActivationKind::kSine:
      return std::sin(p[0] * x);
    case ActivationKind::kCosineBump: {
      const double w = p[0];
      if (std::abs(x) >= w) return 0.0;
      return 0.5 * (1.0 + std::cos(kPi * x / w));
    }
    case ActivationKind::kTanh:
      return std::tanh(p[0] * x);
    case ActivationKind::kHinge:
      return std::max(0.0, x - p[0]);
    case ActivationKind::kPiecewiseLinear: {
      const std::size_t m = p.size() / 2;
      if (x <= p[0]) return p[1];
      if (x >= p[2 * (m - 1)]) return p[2 * (m - 1) + 1];
      std::size_t lo = 0, hi = m - 1;
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (p[2 * mid] <= x) lo = mid; else hi = mid;
      }
      const double x0 = p[2 * lo], y0 = p[2 * lo + 1], x1 = p[2 * hi], y1 = p[2 * hi + 1];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    case ActivationKind::kGaussianBump: {
      const double u = (x - p[1]) / p[0];
      return std::exp(-0.5 * u * u);
    }
    case ActivationKind::kAbsolute:
      return std::abs(x - p[0]);
    case ActivationKind::kTabulated: {
      const std::size_t n = p.size() - 2;
      const double s = (x - p[0]) / p[1];
      if (s <= 0) return p[2];
      if (s >= static_cast<double>(n - 1)) return p[n + 1];
      const std::size_t k = static_cast<std::size_t>(s);
      const double f = s - static_cast<double>(k);
      return p[2 + k] + f * (p[3 + k] - p[2 + k]);
    }
    case ActivationKind::kLinear:
      return p[0] * x;
    case ActivationKind::kTrigLinear:
      return p[0] * x + p[1] * std::cos(p[3] * x) + p[2] * std::sin(p[3] * x);
  }
  return 0.0;
}

void Activation::finalize() {
  offset_ = 0.0;
  offset_ = raw(0.0);
  const auto& p = params_;
  breakpoints_.clear();
  switch (kind_) {
    case ActivationKind::kSine:
      lipschitz_ = std::abs(p[0]);
      sup_abs_ = p[0] == 0 ? 0.0 : 1.0;
      break;
    case ActivationKind::kCosineBump:
      lipschitz_ = kPi / (2 * p[0]);
      sup_abs_ = 1.0;
      breakpoints_ = {-p[0], p[0]};
      break;
    case ActivationKind::kTanh:
      lipschitz_ = std::abs(p[0]);
      sup_abs_ = p[0] == 0 ? 0.0 : 1.0;
      break;
    case ActivationKind::kHinge:
      lipschitz_ = 1.0;
      sup_abs_ = kInf;
      breakpoints_ = {p[0]};
      break;
    case ActivationKind::kPiecewiseLinear: {
      lipschitz_ = 0.0;
      sup_abs_ = 0.0;
      for (std::size_t k = 0; k < p.size(); k += 2) {
        breakpoints_.push_back(p[k]);
        sup_abs_ = std::max(sup_abs_, std::abs(p[k + 1] - offset_));
        if (k >= 2) lipschitz_ = std::max(lipschitz_, std::abs((p[k + 1] - p[k - 1]) / (p[k] - p[k - 2])));
      }
      break;
    }
    case ActivationKind::kGaussianBump: {
      lipschitz_ = 1.0 / (p[0] * std::sqrt(std::numbers::e));
      sup_abs_ = std::max(offset_, 1.0 - offset_);
      break;
    }
    case ActivationKind::kAbsolute:
      lipschitz_ = 1.0;
      sup_abs_ = kInf;
      breakpoints_ = {p[0]};
      break;
    case ActivationKind::kTabulated: {
      lipschitz_ = 0.0;
      sup_abs_ = 0.0;
      for (std::size_t k = 2; k < p.size(); ++k) {
        sup_abs_ = std::max(sup_abs_, std::abs(p[k] - offset_));
        if (k > 2) lipschitz_ = std::max(lipschitz_, std::abs(p[k] - p[k - 1]) / p[1]);
      }
      const double n = static_cast<double>(p.size() - 2);
      breakpoints_ = {p[0], p[0] + (n - 1) * p[1]};
      break;
    }
    case ActivationKind::kLinear:
      lipschitz_ = std::abs(p[0]);
      sup_abs_ = p[0] == 0 ? 0.0 : kInf;
      break;
    case ActivationKind::kTrigLinear: {
      const double amp = std::hypot(p[1], p[2]);
      lipschitz_ = std::abs(p[0]) + std::abs(p[3]) * amp;
      sup_abs_ = p[0] != 0 ? kInf : (p[3] == 0 ? 0.0 : amp + std::abs(p[1]));
      break;
    }
  }
}

double Activation::spectral_cutoff(double ell) const {
  const auto& p = params_;
  switch (kind_) {
    case ActivationKind::kSine:
      return std::abs(p[0]) + 9.0 / ell;
    case ActivationKind::kLinear:
      return 10.0 / ell;
    case ActivationKind::kTrigLinear:
      return std::max(std::abs(p[3]) + 9.0 / ell, 10.0 / ell);
    case ActivationKind::kGaussianBump: {
      const double a = 1.0 / (p[0] * p[0]) + 1.0 / (ell * ell);
      return std::max(9.0 * std::sqrt(a), 9.0 / ell);
    }
    case ActivationKind::kTanh:
      return 26.0 * std::abs(p[0]) + 9.0 / ell;
    default:
      return kInf;
  }
}

bool Activation::has_closed_form_transform() const {
  switch (kind_) {
    case ActivationKind::kSine:
    case ActivationKind::kLinear:
    case ActivationKind::kTrigLinear:
    case ActivationKind::kGaussianBump:
      return true;
    default:
      return false;
  }
}

std::complex<double> Activation::transform_closed_form(double ell, double t) const {
  using C = std::complex<double>;
  const auto& p = params_;
  switch (kind_) {
    case ActivationKind::kSine: {
      const double w = p[0];
      return C(0.0, -0.5 * (shifted_gaussian(ell, t, w) - shifted_gaussian(ell, t, -w)));
    }
    case ActivationKind::kLinear: {
      const double u = ell * t;
      return C(0.0, -p[0] * ell * ell * ell * t * std::exp(-0.5 * u * u));
    }
    case ActivationKind::kTrigLinear: {
      const double w = p[3];
      const double gp = shifted_gaussian(ell, t, w), gm = shifted_gaussian(ell, t, -w);
      const double g0 = shifted_gaussian(ell, t, 0.0);
      const double re = p[1] * 0.5 * (gp + gm) - p[1] * g0;
      const double im = -p[0] * ell * ell * ell * t * std::exp(-0.5 * ell * ell * t * t) - p[2] * 0.5 * (gp - gm);
      return C(re, im);
    }
    case ActivationKind::kGaussianBump: {
      const double s = p[0], c = p[1];
      const double a = 1.0 / (s * s) + 1.0 / (ell * ell);
      const C bm(c / (s * s), -t);
      const C e = bm * bm / (2 * a) - C(c * c / (2 * s * s), 0.0);
      return std::exp(e) / std::sqrt(a) - offset_ * shifted_gaussian(ell, t, 0.0);
    }
    default:
      throw UnsupportedError("no closed-form transform for " + to_string(kind_));
  }
}

double Activation::smoothed_value(double eta, double t) const {
  const auto& p = params_;
  if (eta <= 0) throw InputError("smoothing width must be positive");
  switch (kind_) {
    case ActivationKind::kSine:
      return std::exp(-0.5 * eta * eta * p[0] * p[0]) * std::sin(p[0] * t);
    case ActivationKind::kLinear:
      return p[0] * t;
    case ActivationKind::kTrigLinear: {
      const double damp = std::exp(-0.5 * eta * eta * p[3] * p[3]);
      return p[0] * t + damp * (p[1] * std::cos(p[3] * t) + p[2] * std::sin(p[3] * t)) - p[1];
    }
    default: {
      std::vector<double> kinks;
      for (double b : breakpoints_) kinks.push_back((b - t) / eta);
      return gauss_expectation([&](double z) { return (*this)(t + eta * z); }, kinks);
    }
  }
}

double Activation::smoothed_slope(double eta, double t) const {
  const auto& p = params_;
  if (eta <= 0) throw InputError("smoothing width must be positive");
  switch (kind_) {
    case ActivationKind::kSine:
      return p[0] * std::exp(-0.5 * eta * eta * p[0] * p[0]) * std::cos(p[0] * t);
    case ActivationKind::kLinear:
      return p[0];
    case ActivationKind::kTrigLinear: {
      const double damp = std::exp(-0.5 * eta * eta * p[3] * p[3]);
      return p[0] + damp * p[3] * (-p[1] * std::sin(p[3] * t) + p[2] * std::cos(p[3] * t));
    }
    default: {
      // d/dt E[sigma(t + eta Z)] = E[sigma(t + eta Z) Z] / eta.
      std::vector<double> kinks;
      for (double b : breakpoints_) kinks.push_back((b - t) / eta);
      return gauss_expectation([&](double z) { return (*this)(t + eta * z) * z; }, kinks) / eta;
    }
  }
}

Activation Activation::smoothed_derivative(double eta, double half_range) const {
  const auto& p = params_;
  if (eta <= 0) throw InputError("smoothing width must be positive");
  switch (kind_) {
    case ActivationKind::kSine: {
      const double damp = std::exp(-0.5 * eta * eta * p[0] * p[0]);
      return trig_linear(0.0, p[0] * damp, 0.0, p[0]);
    }
    case ActivationKind::kLinear:
      return Activation();
    case ActivationKind::kTrigLinear: {
      const double damp = std::exp(-0.5 * eta * eta * p[3] * p[3]);
      return trig_linear(0.0, damp * p[3] * p[2], -damp * p[3] * p[1], p[3]);
    }
    default: {
      if (!(half_range > 0)) throw InputError("smoothed_derivative needs a positive half range");
      const double step = kMaxTableStep;
      const std::size_t n = static_cast<std::size_t>(std::ceil(2 * half_range / step)) + 1;
      const double x0 = -step * static_cast<double>(n - 1) / 2;
      std::vector<double> v(n);
      for (std::size_t k = 0; k < n; ++k) v[k] = smoothed_slope(eta, x0 + step * static_cast<double>(k));
      return tabulated(x0, step, v);
    }
  }
}

}  // namespace ridgefind
