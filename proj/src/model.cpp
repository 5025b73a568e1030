#include "ridgefind/model.hpp"

#include <algorithm>
#include <cmath>

#include "ridgefind/error.hpp"
#include "ridgefind/rng.hpp"

namespace ridgefind {

SumOfFeaturesModel::SumOfFeaturesModel(std::size_t dim, std::vector<Feature> features, double lipschitz,
                                       double gamma)
    : dim_(dim), features_(std::move(features)), lipschitz_(lipschitz), gamma_(gamma) {
  if (dim_ == 0) throw InputError("model dimension must be positive");
  for (auto& f : features_) {
    if (static_cast<std::size_t>(f.direction.size()) != dim_)
      throw InputError("feature direction has wrong dimension");
    const double norm = f.direction.norm();
    if (!(norm > 0) || !std::isfinite(norm)) throw InputError("feature direction must be nonzero and finite");
    // Already-unit vectors are left untouched so that serialization round-trips bit-exactly.
    if (std::abs(norm - 1.0) > 1e-14) f.direction /= norm;
    if (!std::isfinite(f.coeff)) throw InputError("feature coefficient must be finite");
  }
}

double SumOfFeaturesModel::evaluate_raw(const double* x) const {
  double s = 0.0;
  for (const auto& f : features_) {
    double p = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) p += f.direction[k] * x[k];
    s += f.coeff * f.activation(p);
  }
  return s;
}

double SumOfFeaturesModel::evaluate(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw InputError("evaluate: dimension mismatch");
  return evaluate_raw(x.data());
}

SumOfFeaturesModel SumOfFeaturesModel::with_coefficients(const std::vector<double>& coeffs) const {
  if (coeffs.size() != features_.size()) throw InputError("with_coefficients: size mismatch");
  auto feats = features_;
  for (std::size_t i = 0; i < feats.size(); ++i) feats[i].coeff = coeffs[i];
  return SumOfFeaturesModel(dim_, std::move(feats), lipschitz_, gamma_);
}

std::vector<Eigen::VectorXd> SumOfFeaturesModel::directions() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& f : features_) out.push_back(f.direction);
  return out;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kDeterministicBounded: return "deterministic-bounded";
    case NoiseKind::kUniformBounded: return "uniform-bounded";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::kNone;
  if (name == "deterministic-bounded") return NoiseKind::kDeterministicBounded;
  if (name == "uniform-bounded") return NoiseKind::kUniformBounded;
  throw InputError("unknown noise kind '" + name + "'");
}

double noise_value(const NoiseSpec& noise, const double* x, std::size_t dim) {
  if (noise.kind == NoiseKind::kNone || noise.eps == 0.0) return 0.0;
  const double u = 2.0 * unit_interval(hash_doubles(noise.seed, x, dim)) - 1.0;
  if (noise.kind == NoiseKind::kUniformBounded) return noise.eps * u;
  return u < 0 ? -noise.eps : noise.eps;
}

double QueryAccess::query(const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != dim()) throw InputError("query: dimension mismatch");
  return query_raw(x.data());
}

QueryOracle::QueryOracle(std::shared_ptr<const SumOfFeaturesModel> model, NoiseSpec noise)
    : model_(std::move(model)), noise_(noise) {
  if (!model_) throw InputError("query oracle needs a model");
  if (!(noise_.eps >= 0) || !std::isfinite(noise_.eps)) throw InputError("noise eps must be finite and >= 0");
}

double QueryOracle::query_raw(const double* x) {
  count_.fetch_add(1, std::memory_order_relaxed);
  return model_->evaluate_raw(x) + noise_value(noise_, x, model_->dim());
}

double min_pairwise_sine(const std::vector<Eigen::VectorXd>& dirs) {
  double best = 1.0;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double c = std::min(1.0, std::abs(dirs[i].dot(dirs[j])) / (dirs[i].norm() * dirs[j].norm()));
      best = std::min(best, std::sqrt(std::max(0.0, 1.0 - c * c)));
    }
  return best;
}

ValidationReport validate_assumptions(const SumOfFeaturesModel& model, const ValidationOptions& opt) {
  ValidationReport rep;
  const double lo = -4 * opt.radius, hi = 4 * opt.radius;
  const double L = model.lipschitz();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& f = model.features()[i];
    FeatureCheck fc;
    fc.index = i;
    fc.coefficient_ok = std::abs(f.coeff) <= 1.0;
    fc.zero_at_origin = f.activation(0.0) == 0.0;
    double slope = 0.0;
    for (double x = lo; x + opt.lipschitz_step <= hi; x += opt.lipschitz_grid) {
      const double d = std::abs(f.activation(x + opt.lipschitz_step) - f.activation(x)) / opt.lipschitz_step;
      slope = std::max(slope, d);
    }
    fc.sampled_lipschitz = slope;
    fc.lipschitz_ok = slope <= L * (1 + 1e-6);
    if (opt.check_bounded) fc.bounded_ok = f.activation.bounded();
    rep.coefficients_ok = rep.coefficients_ok && fc.coefficient_ok;
    rep.zero_at_origin_ok = rep.zero_at_origin_ok && fc.zero_at_origin;
    rep.lipschitz_ok = rep.lipschitz_ok && fc.lipschitz_ok;
    rep.max_sampled_lipschitz = std::max(rep.max_sampled_lipschitz, slope);
    if (opt.check_bounded) rep.bounded_ok = rep.bounded_ok.value_or(true) && *fc.bounded_ok;
    rep.features.push_back(fc);
  }
  if (opt.check_bounded && !rep.bounded_ok) rep.bounded_ok = true;
  rep.min_pairwise_sine = min_pairwise_sine(model.directions());
  rep.separation_ok = rep.min_pairwise_sine >= model.gamma();
  return rep;
}

double gaussian_reweight_eval(const std::function<double(const Eigen::VectorXd&)>& fn, double ell,
                              const Eigen::VectorXd& x) {
  if (!(ell > 0)) throw InputError("gaussian_reweight_eval: ell must be positive");
  return fn(x) * std::exp(-x.squaredNorm() / (2 * ell * ell));
}

}  // namespace ridgefind
