#include "ridgefind/recovery.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ridgefind/error.hpp"
#include "ridgefind/fourier.hpp"
#include "ridgefind/parallel.hpp"
#include "ridgefind/quadrature.hpp"

namespace ridgefind {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr std::size_t kReanchor = 64;

}  // namespace

double RecoveryConfig::band_low() const { return t_min ? *t_min : std::pow(ell, -0.9); }
double RecoveryConfig::band_high() const { return t_max ? *t_max : std::pow(delta, -0.1); }

void RecoveryConfig::validate() const {
  if (!(ell > 0) || !std::isfinite(ell)) throw ConfigError("recovery config: ell must be positive");
  if (!(delta > 0) || !std::isfinite(delta)) throw ConfigError("recovery config: delta must be positive");
  if (!(R > 0) || !std::isfinite(R)) throw ConfigError("recovery config: R must be positive");
  if (!(band_low() < band_high())) throw ConfigError("recovery config: empty frequency band");
  if (band_high() / delta > 5e7) throw ConfigError("recovery config: too many frequency samples");
}

Json to_json(const RecoveryConfig& c) {
  Json j{{"ell", c.ell}, {"delta", c.delta}, {"R", c.R}};
  j["t_min"] = c.t_min ? Json(*c.t_min) : Json(nullptr);
  j["t_max"] = c.t_max ? Json(*c.t_max) : Json(nullptr);
  return j;
}

RecoveryConfig recovery_config_from_json(const Json& j) {
  RecoveryConfig c;
  try {
    c.ell = j.at("ell").get<double>();
    c.delta = j.at("delta").get<double>();
    c.R = j.value("R", c.R);
    if (j.contains("t_min") && !j["t_min"].is_null()) c.t_min = j["t_min"].get<double>();
    if (j.contains("t_max") && !j["t_max"].is_null()) c.t_max = j["t_max"].get<double>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("recovery config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------

std::complex<double> RecoveredRidge::series(double z) const {
  // e^{i t_k z} advanced by the rotation e^{i delta z}, re-anchored periodically
  // and wherever the spacing of ts breaks.
  const std::complex<double> step(std::cos(delta_ * z), std::sin(delta_ * z));
  std::complex<double> rot, sum = 0.0;
  for (std::size_t k = 0; k < ts_.size(); ++k) {
    const bool contiguous = k > 0 && std::abs(ts_[k] - ts_[k - 1] - delta_) <= 1e-9 * delta_;
    if (!contiguous || k % kReanchor == 0) rot = {std::cos(ts_[k] * z), std::sin(ts_[k] * z)};
    else rot *= step;
    sum += rot * values_[k];
  }
  const double d = static_cast<double>(u_.size());
  return sum * (delta_ * kInvSqrt2Pi / std::pow(ell_, d - 1.0));
}

double RecoveredRidge::analytic(double z) const {
  return std::real(series(z)) * std::exp(z * z / (2 * ell_ * ell_)) + shift_;
}

double RecoveredRidge::operator()(double z) const {
  if (!(std::abs(z) <= R_ * (1 + 1e-12))) {
    std::ostringstream os;
    os << "recovered ridge evaluated at z = " << z << " outside [-" << R_ << ", " << R_ << "]";
    throw InputError(os.str());
  }
  if (kind_ == Kind::kFourier) return analytic(z);
  const double s = (z + R_) / mesh_;
  const auto n = static_cast<long>(table_.size());
  long k = static_cast<long>(std::floor(s));
  k = std::clamp(k, 0L, n - 2);
  const double w = s - static_cast<double>(k);
  if (w == 0.0) return table_[static_cast<std::size_t>(k)];
  return (1 - w) * table_[static_cast<std::size_t>(k)] + w * table_[static_cast<std::size_t>(k + 1)];
}

double RecoveredRidge::imaginary(double z) const {
  if (kind_ != Kind::kFourier) return 0.0;
  return std::imag(series(z)) * std::exp(z * z / (2 * ell_ * ell_));
}

RecoveredRidge RecoveredRidge::fourier(Eigen::VectorXd u, double ell, double delta, std::vector<double> ts,
                                       std::vector<std::complex<double>> values, double R, int threads) {
  if (ts.size() != values.size()) throw InputError("recovered ridge: sample count mismatch");
  if (!(R > 0) || !(delta > 0) || !(ell > 0)) throw InputError("recovered ridge: R, delta and ell must be positive");
  RecoveredRidge r;
  r.kind_ = Kind::kFourier;
  r.u_ = std::move(u);
  r.ell_ = ell;
  r.delta_ = delta;
  r.ts_ = std::move(ts);
  r.values_ = std::move(values);
  r.R_ = R;
  r.shift_ = 0.0;
  r.shift_ = -std::real(r.series(0.0));
  const long K = static_cast<long>(std::ceil(R / delta - 1e-9));
  r.mesh_ = R / static_cast<double>(K);
  r.table_.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
  parallel_for(r.table_.size(), threads, [&](std::size_t k) {
    r.table_[k] = r.analytic((static_cast<double>(k) - static_cast<double>(K)) * r.mesh_);
  });
  return r;
}

RecoveredRidge RecoveredRidge::tabulated(Eigen::VectorXd u, double R, double mesh, std::vector<double> values) {
  if (!(R > 0) || !(mesh > 0)) throw InputError("tabulated ridge: R and mesh must be positive");
  const long K = std::lround(R / mesh);
  if (std::abs(K * mesh - R) > 1e-9 * R || values.size() != static_cast<std::size_t>(2 * K + 1))
    throw InputError("tabulated ridge: table must have nodes -R + k * mesh covering [-R, R]");
  RecoveredRidge r;
  r.kind_ = Kind::kTabulated;
  r.u_ = std::move(u);
  r.R_ = R;
  r.mesh_ = mesh;
  r.table_ = std::move(values);
  return r;
}

Json to_json(const RecoveredRidge& r) {
  Json samples = Json::array();
  for (std::size_t k = 0; k < r.ts().size(); ++k)
    samples.push_back(Json{{"t", r.ts()[k]}, {"re", r.samples()[k].real()}, {"im", r.samples()[k].imag()}});
  Json table = Json::array();
  for (std::size_t k = 0; k < r.table().size(); ++k)
    table.push_back(Json{{"z", -r.table_radius() + static_cast<double>(k) * r.mesh()}, {"value", r.table()[k]}});
  return Json{{"kind", r.kind() == RecoveredRidge::Kind::kFourier ? "fourier" : "tabulated"},
              {"u", to_json(r.u())},
              {"ell2", r.ell()},
              {"delta", r.delta()},
              {"R", r.table_radius()},
              {"mesh", r.mesh()},
              {"shiftC", r.shift()},
              {"samples", samples},
              {"table", table}};
}

RecoveredRidge recovered_ridge_from_json(const Json& j) {
  try {
    const Eigen::VectorXd u = vector_from_json(j.at("u"));
    const double R = j.at("R").get<double>();
    if (j.at("kind").get<std::string>() == "tabulated") {
      std::vector<double> vals;
      for (const auto& e : j.at("table")) vals.push_back(e.at("value").get<double>());
      return RecoveredRidge::tabulated(u, R, j.at("mesh").get<double>(), std::move(vals));
    }
    std::vector<double> ts;
    std::vector<std::complex<double>> vs;
    for (const auto& e : j.at("samples")) {
      ts.push_back(e.at("t").get<double>());
      vs.emplace_back(e.at("re").get<double>(), e.at("im").get<double>());
    }
    return RecoveredRidge::fourier(u, j.at("ell2").get<double>(), j.at("delta").get<double>(), std::move(ts),
                                   std::move(vs), R);
  } catch (const Json::exception& e) {
    throw InputError(std::string("recovered ridge: ") + e.what());
  }
}

RecoveredRidge recover_ridge(ValueOracle& oracle, const Eigen::VectorXd& u, const RecoveryConfig& cfg, int threads) {
  cfg.validate();
  if (static_cast<std::size_t>(u.size()) != oracle.dim()) throw InputError("recover_ridge: dimension mismatch");
  if (std::abs(u.norm() - 1.0) > 1e-9) throw InputError("recover_ridge: u must be a unit vector");
  if (std::abs(oracle.ell() - cfg.ell) > 1e-12 * cfg.ell) throw ConfigError("recover_ridge: oracle scale differs from ell");
  const auto j_lo = static_cast<long>(std::ceil(cfg.band_low() / cfg.delta - 1e-9));
  const auto j_hi = static_cast<long>(std::floor(cfg.band_high() / cfg.delta + 1e-9));
  std::vector<double> pos, neg;
  for (long j = std::max(j_lo, 1L); j <= j_hi; ++j) pos.push_back(static_cast<double>(j) * cfg.delta);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) neg.push_back(-*it);

  std::vector<std::complex<double>> vpos, vneg;
  oracle.value_ray(u, pos, vpos);
  if (oracle.noise_free()) {
    for (auto it = vpos.rbegin(); it != vpos.rend(); ++it) vneg.push_back(std::conj(*it));
  } else {
    oracle.value_ray(u, neg, vneg);
  }
  std::vector<double> ts(neg);
  ts.insert(ts.end(), pos.begin(), pos.end());
  std::vector<std::complex<double>> vs(vneg);
  vs.insert(vs.end(), vpos.begin(), vpos.end());
  return RecoveredRidge::fourier(u, cfg.ell, cfg.delta, std::move(ts), std::move(vs), cfg.R, threads);
}

double eval_recovered(const RecoveredRidge& r, double z) { return r(z); }

// ---------------------------------------------------------------------------

AssembledModel::AssembledModel(std::size_t dim, std::vector<RecoveredRidge> ridges, double constant,
                               std::optional<Eigen::VectorXd> linear)
    : dim_(dim), ridges_(std::move(ridges)), constant_(constant) {
  for (const auto& r : ridges_)
    if (r.dim() != dim_) throw InputError("assemble_model: ridge dimension mismatch");
  linear_ = linear ? *linear : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  if (static_cast<std::size_t>(linear_.size()) != dim_) throw InputError("assemble_model: linear part dimension mismatch");
}

double AssembledModel::operator()(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw InputError("assembled model: dimension mismatch");
  double s = constant_ + linear_.dot(x);
  for (const auto& r : ridges_) s += r(r.u().dot(x));
  return s;
}

AssembledModel assemble_model(std::size_t dim, std::vector<RecoveredRidge> ridges) {
  return AssembledModel(dim, std::move(ridges));
}

Json to_json(const AssembledModel& m) {
  Json ridges = Json::array();
  for (const auto& r : m.ridges()) ridges.push_back(to_json(r));
  return Json{{"dim", m.dim()}, {"constant", m.constant()}, {"linear", to_json(m.linear())}, {"ridges", ridges}};
}

AssembledModel assembled_model_from_json(const Json& j) {
  try {
    std::vector<RecoveredRidge> ridges;
    for (const auto& r : j.at("ridges")) ridges.push_back(recovered_ridge_from_json(r));
    return AssembledModel(j.at("dim").get<std::size_t>(), std::move(ridges), j.value("constant", 0.0),
                          vector_from_json(j.at("linear")));
  } catch (const Json::exception& e) {
    throw InputError(std::string("assembled model: ") + e.what());
  }
}

double truncated_inversion_reference(const Activation& sigma, double ell, double B, double x) {
  if (!(B > 0)) throw InputError("truncated_inversion_reference: B must be positive");
  const double top = std::min(B, sigma.spectral_cutoff(ell));
  if (!(top > 0)) return 0.0;
  const SigmaHat hat(sigma, ell, std::min(top, 64.0));
  quad::Options q;
  q.abs_tol = 1e-11 * std::max(1.0, ell);
  q.initial_panels = std::clamp(static_cast<int>(std::ceil(top * ell / 2.0)), 8, 200000);
  q.max_panels = 2000000;
  // sigma_hat(-y) = conj(sigma_hat(y)): the integral is 2 Re over [0, top].
  auto r = quad::integrate([&](double y) { return std::real(std::complex<double>(std::cos(y * x), std::sin(y * x)) * hat(y)); },
                           0.0, top, q);
  if (!r.converged) throw NumericalError("truncated_inversion_reference: quadrature did not converge");
  return std::exp(x * x / (2 * ell * ell)) * kInvSqrt2Pi * 2.0 * r.value;
}

}  // namespace ridgefind
