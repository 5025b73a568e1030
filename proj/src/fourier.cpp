#include "ridgefind/fourier.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ridgefind/error.hpp"
#include "ridgefind/quadrature.hpp"

namespace ridgefind {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr int kPad = 5;  // extra nodes on each side of the table for the 10-point stencil
constexpr int kStencil = 10;
constexpr double kMaxTable = 64.0;

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// Transform at t = k * dt, k < count, by the trapezoid rule on |x| <= 12 ell.
// For an integrand analytic in a strip the error is the aliased transform at
// t +- 2 pi / h, negligible once 2 pi / h exceeds the table end plus the cutoff.
std::vector<Complex> trapezoid_table(const Activation& sigma, double ell, double dt, int count, double cutoff) {
  const double top = dt * count;
  const double h = std::min(2.0 * std::numbers::pi / (top + cutoff + 20.0 / ell) , ell / 8.0);
  const long J = static_cast<long>(std::ceil(12.0 * ell / h));
  std::vector<double> even(static_cast<std::size_t>(J + 1)), odd(static_cast<std::size_t>(J + 1)), xs(static_cast<std::size_t>(J + 1));
  for (long j = 0; j <= J; ++j) {
    const double x = static_cast<double>(j) * h;
    const double g = std::exp(-x * x / (2 * ell * ell));
    const double gp = sigma(x) * g, gm = sigma(-x) * g;
    xs[static_cast<std::size_t>(j)] = x;
    even[static_cast<std::size_t>(j)] = j == 0 ? gp : gp + gm;
    odd[static_cast<std::size_t>(j)] = j == 0 ? 0.0 : gp - gm;
  }
  std::vector<Complex> out(static_cast<std::size_t>(count));
  std::vector<double> zr(xs.size()), zi(xs.size()), rr(xs.size()), ri(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    rr[j] = std::cos(dt * xs[j]);
    ri[j] = std::sin(dt * xs[j]);
  }
  constexpr int kReanchor = 128;
  for (int k = 0; k < count; ++k) {
    if (k % kReanchor == 0) {
      for (std::size_t j = 0; j < xs.size(); ++j) {
        zr[j] = std::cos(k * dt * xs[j]);
        zi[j] = std::sin(k * dt * xs[j]);
      }
    }
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      re += even[j] * zr[j];
      im -= odd[j] * zi[j];
    }
    out[static_cast<std::size_t>(k)] = Complex(re, im) * (h * kInvSqrt2Pi);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double nr = zr[j] * rr[j] - zi[j] * ri[j];
      zi[j] = zr[j] * ri[j] + zi[j] * rr[j];
      zr[j] = nr;
    }
  }
  return out;
}

}  // namespace

Complex function_hat_quadrature(const std::function<double(double)>& fn, double ell, double t,
                               const std::vector<double>& breakpoints, const SigmaHatOptions& opt) {
  if (!(ell > 0)) throw InputError("transform quadrature: ell must be positive");
  const double half = 12.0 * ell;
  const double inv2l2 = 1.0 / (2 * ell * ell);
  quad::Options q;
  q.abs_tol = opt.abs_tol;
  q.max_panels = opt.max_panels;
  // Two panels per oscillation of exp(-i t x).
  q.initial_panels = std::max(16, static_cast<int>(std::ceil(std::abs(t) * 2 * half / std::numbers::pi)));
  q.breakpoints = breakpoints;
  q.breakpoints.push_back(0.0);
  auto r = quad::integrate(
      [&](double x) {
        const double w = fn(x) * std::exp(-x * x * inv2l2) * kInvSqrt2Pi;
        return Complex(w * std::cos(t * x), -w * std::sin(t * x));
      },
      -half, half, q);
  if (!r.converged) {
    std::ostringstream os;
    os << "transform quadrature did not converge: ell=" << ell << " t=" << t << " error=" << r.error
       << " panels=" << r.panels;
    throw NumericalError(os.str());
  }
  return r.value;
}

Complex sigma_hat_quadrature(const Activation& sigma, double ell, double t, const SigmaHatOptions& opt) {
  try {
    return function_hat_quadrature([&](double x) { return sigma(x); }, ell, t, sigma.breakpoints(), opt);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " kind=" + to_string(sigma.kind()));
  }
}

double sigma_hat_sup_bound(const Activation& sigma, double ell) {
  const double half = 12.0 * ell;
  quad::Options q;
  q.abs_tol = 1e-12 * ell;
  q.rel_tol = 1e-10;
  q.initial_panels = 32;
  q.breakpoints = sigma.breakpoints();
  q.breakpoints.push_back(0.0);
  auto r = quad::integrate(
      [&](double x) { return std::abs(sigma(x)) * std::exp(-x * x / (2 * ell * ell)) * kInvSqrt2Pi; }, -half, half, q);
  return r.value * (1 + 1e-8) + 1e-300;
}

SigmaHat::SigmaHat(const Activation& sigma, double ell, double t_table)
    : sigma_(sigma), ell_(ell), cutoff_(sigma.spectral_cutoff(ell)), closed_form_(sigma.has_closed_form_transform()) {
  if (!(ell > 0)) throw InputError("SigmaHat: ell must be positive");
  sup_bound_ = closed_form_ && sigma.kind() == ActivationKind::kSine ? ell * (1 + 1e-12) : sigma_hat_sup_bound(sigma, ell);
  if (closed_form_) return;
  // Finite cutoffs are tabulated all the way out, so evaluation never falls back to quadrature.
  const double top = std::isfinite(cutoff_) ? std::min(cutoff_, kMaxTable) : t_table;
  if (!(top > 0)) return;
  step_ = 1.0 / (8.0 * ell);
  const int n = static_cast<int>(std::ceil(top / step_)) + 1;
  table_.resize(static_cast<std::size_t>(n + 2 * kPad));
  std::vector<Complex> vals;
  if (sigma.kind() == ActivationKind::kTanh) {
    vals = trapezoid_table(sigma, ell, step_, n + kPad, cutoff_);
  } else {
    SigmaHatOptions opt;
    opt.abs_tol = 1e-12 * std::max(1.0, ell);
    for (int k = 0; k < n + kPad; ++k) vals.push_back(sigma_hat_quadrature(sigma, ell, k * step_, opt));
  }
  for (int k = 0; k < n + kPad; ++k) {
    const Complex v = vals[static_cast<std::size_t>(k)];
    table_[static_cast<std::size_t>(k + kPad)] = v;
    if (k > 0 && k <= kPad) table_[static_cast<std::size_t>(kPad - k)] = std::conj(v);
  }
}

Complex SigmaHat::operator()(double t) const {
  if (closed_form_) return sigma_.transform_closed_form(ell_, t);
  const double at = std::abs(t);
  if (at > cutoff_) return 0.0;
  const int n_nodes = static_cast<int>(table_.size()) - 2 * kPad;
  if (table_.empty() || at > (n_nodes - 1) * step_) return sigma_hat_quadrature(sigma_, ell_, t);

  const double s = at / step_;
  const int base = static_cast<int>(std::floor(s)) - kStencil / 2 + 1;  // stencil covers base .. base+9
  Complex num = 0.0;
  double den = 0.0;
  Complex val;
  bool exact = false;
  for (int j = 0; j < kStencil; ++j) {
    const int k = base + j;
    const double diff = s - k;
    const Complex fk = table_[static_cast<std::size_t>(k + kPad)];
    if (diff == 0.0) {
      val = fk;
      exact = true;
      break;
    }
    const double w = ((j % 2) ? -1.0 : 1.0) * binomial(kStencil - 1, j) / diff;
    num += w * fk;
    den += w;
  }
  if (!exact) val = num / den;
  return t < 0 ? std::conj(val) : val;
}

Complex ridge_fourier_transform(const Activation& sigma, double ell, const Eigen::VectorXd& v, const Eigen::VectorXd& y) {
  if (v.size() != y.size()) throw InputError("ridge_fourier_transform: dimension mismatch");
  const double p = v.dot(y);
  const double perp2 = std::max(0.0, (y - p * v).squaredNorm());
  const int d = static_cast<int>(v.size());
  return sigma_hat_quadrature(sigma, ell, p) * std::pow(ell, d - 1) * std::exp(-0.5 * ell * ell * perp2);
}

ModelSpectrum::ModelSpectrum(std::shared_ptr<const SumOfFeaturesModel> model, double ell, double t_table)
    : model_(std::move(model)), ell_(ell) {
  hats_.reserve(model_->size());
  for (const auto& f : model_->features()) hats_.emplace_back(f.activation, ell, t_table);
}

Complex ModelSpectrum::feature(std::size_t i, const Eigen::VectorXd& y) const {
  const auto& f = model_->features()[i];
  const double p = f.direction.dot(y);
  const double perp2 = std::max(0.0, y.squaredNorm() - p * p);
  const int d = static_cast<int>(y.size());
  const double damp = std::exp(-0.5 * ell_ * ell_ * perp2);
  if (damp == 0.0 || f.coeff == 0.0) return 0.0;
  return f.coeff * hats_[i](p) * std::pow(ell_, d - 1) * damp;
}

Complex ModelSpectrum::operator()(const Eigen::VectorXd& y) const {
  Complex s = 0.0;
  for (std::size_t i = 0; i < model_->size(); ++i) s += feature(i, y);
  return s;
}

}  // namespace ridgefind
