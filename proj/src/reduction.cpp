#include "ridgefind/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ridgefind/error.hpp"
#include "ridgefind/log.hpp"
#include "ridgefind/parallel.hpp"

namespace ridgefind {

namespace {

constexpr std::uint64_t kSmoothingTag = 0x5300d;
constexpr std::uint64_t kProbeTag = 0x9b0be;
constexpr std::uint64_t kMassTag = 0x3a55;
constexpr std::uint64_t kValueTag = 0x7a1e;

bool orthonormal(const std::vector<Eigen::VectorXd>& vs, std::size_t d) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (static_cast<std::size_t>(vs[i].size()) != d) return false;
    for (std::size_t j = i; j < vs.size(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      if (std::abs(vs[i].dot(vs[j]) - target) > 1e-10) return false;
    }
  }
  return true;
}

// Scales a table-backed ridge by c.
RecoveredRidge scaled(const RecoveredRidge& r, double c) {
  std::vector<double> values = r.table();
  for (double& v : values) v *= c;
  return RecoveredRidge::tabulated(r.u(), r.table_radius(), r.mesh(), std::move(values));
}

struct ProbeOracles {
  std::unique_ptr<MassOracle> mass;
  std::function<std::unique_ptr<ValueOracle>()> value;
  std::function<std::uint64_t()> base_queries;
};

// Shared driver: per-probe search, merge by line, recover each merged line
// from its best probe and integrate.
ReductionResult reduce(std::size_t d, const ReductionConfig& cfg, const RngStream& rng, const ReductionOptions& opt,
                       const std::function<ProbeOracles(std::size_t, const Eigen::VectorXd&)>& make_oracles,
                       double g0, const Eigen::VectorXd& grad0) {
  const auto probes = cfg.probes_for(d);
  const double scale = cfg.scale();
  SearchConfig scfg = cfg.search;
  scfg.tau *= scale * scale;

  ReductionResult result;
  result.g0 = g0;
  result.gradient0 = grad0;

  std::vector<ProbeOracles> oracles;
  for (std::size_t p = 0; p < probes.size(); ++p) oracles.push_back(make_oracles(p, probes[p]));

  for (std::size_t p = 0; p < probes.size(); ++p) {
    ProbeReport rep;
    rep.probe = probes[p];
    if (oracles[p].mass) {
      SearchOptions so;
      so.threads = opt.threads;
      so.truth = opt.truth;
      auto sr = find_directions(*oracles[p].mass, scfg, rng.child(kProbeTag + p), so);
      rep.directions = std::move(sr.directions);
      rep.stats = std::move(sr.stats);
    }
    result.probes.push_back(std::move(rep));
  }

  std::vector<CandidateDirection> pool;
  for (std::size_t p = 0; p < probes.size(); ++p)
    for (const auto& c : result.probes[p].directions) pool.push_back(c);
  std::stable_sort(pool.begin(), pool.end(),
                   [](const CandidateDirection& a, const CandidateDirection& b) { return a.mass > b.mass; });
  const auto kept = greedy_angle_prune(pool, cfg.search.prune_sine);

  const double floor = cfg.low_signal / std::sqrt(static_cast<double>(d));
  for (const auto& c : kept) {
    MergedDirection m;
    m.w = c.u;
    m.mass = c.mass;
    for (std::size_t p = 0; p < probes.size(); ++p)
      for (const auto& q : result.probes[p].directions)
        if (line_sine(q.u, c.u) < cfg.search.prune_sine) {
          m.sources.push_back(p);
          break;
        }
    double best = -1.0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double proj = probes[p].dot(c.u);
      if (std::abs(proj) > best) {
        best = std::abs(proj);
        m.best_probe = p;
        m.best_projection = proj;
      }
    }
    m.low_signal = best < floor;
    if (m.low_signal) {
      std::ostringstream os;
      os << "reduction: direction with max |u . w| = " << best << " below " << floor << " skipped";
      warn(os.str());
    }
    result.merged.push_back(std::move(m));
  }

  std::vector<RecoveredRidge> ridges(result.merged.size());
  for (std::size_t j = 0; j < result.merged.size(); ++j) {
    const auto& m = result.merged[j];
    if (m.low_signal) continue;
    auto vo = oracles[m.best_probe].value();
    const RecoveredRidge slope = recover_ridge(*vo, m.w, cfg.recovery, opt.threads);
    ridges[j] = scaled(integrate_ridge(slope), 1.0 / (scale * m.best_projection));
  }
  std::vector<RecoveredRidge> used;
  for (std::size_t j = 0; j < ridges.size(); ++j)
    if (!result.merged[j].low_signal) used.push_back(std::move(ridges[j]));

  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (oracles[p].base_queries) result.probes[p].base_queries = oracles[p].base_queries();
  }
  result.model = AssembledModel(d, std::move(used), g0, grad0);
  return result;
}

}  // namespace

std::string to_string(OracleBackend backend) {
  return backend == OracleBackend::kMonteCarlo ? "mc" : "quadrature";
}

OracleBackend oracle_backend_from_string(const std::string& name) {
  if (name == "mc" || name == "monte-carlo") return OracleBackend::kMonteCarlo;
  if (name == "quadrature") return OracleBackend::kQuadrature;
  throw ConfigError("unknown oracle backend '" + name + "'");
}

double ReductionConfig::alpha_for(double eps) const {
  if (alpha) return *alpha;
  // A noise-free oracle still needs a positive step.
  return eps > 0 ? std::sqrt(eps) : 1e-4;
}

std::vector<Eigen::VectorXd> ReductionConfig::probes_for(std::size_t d) const {
  if (!probes.empty()) return probes;
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k < d; ++k) out.push_back(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(d), k));
  return out;
}

void ReductionConfig::validate(std::size_t d, double eps) const {
  if (!(eta > 0)) throw ConfigError("reduction: eta must be positive");
  if (!(lipschitz > 0)) throw ConfigError("reduction: lipschitz must be positive");
  const double a = alpha_for(eps);
  if (!(a > 0)) throw ConfigError("reduction: alpha must be positive");
  if (smoothing_samples == 0) throw ConfigError("reduction: smoothing_samples must be positive");
  if (4.0 * eps / a > derivative_tolerance) {
    std::ostringstream os;
    os << "reduction: noise term 4 eps / alpha = " << 4.0 * eps / a << " exceeds the derivative tolerance "
       << derivative_tolerance;
    throw ConfigError(os.str());
  }
  if (a > eta / 100.0) {
    std::ostringstream os;
    os << "reduction: alpha = " << a << " is not small against eta = " << eta;
    warn(os.str());
  }
  const auto ps = probes_for(d);
  if (ps.size() != d || !orthonormal(ps, d)) throw ConfigError("reduction: probes must form an orthonormal basis");
  if (!(low_signal >= 0)) throw ConfigError("reduction: low_signal must be nonnegative");
  search.validate(d);
  recovery.validate();
}

Json to_json(const ReductionConfig& c) {
  Json probes = Json::array();
  for (const auto& p : c.probes) probes.push_back(to_json(p));
  Json j{{"eta", c.eta},
         {"smoothing_samples", c.smoothing_samples},
         {"derivative_tolerance", c.derivative_tolerance},
         {"lipschitz", c.lipschitz},
         {"probes", probes},
         {"search", to_json(c.search)},
         {"recovery", to_json(c.recovery)},
         {"backend", to_string(c.backend)},
         {"search_samples", c.search_samples},
         {"value_samples", c.value_samples},
         {"low_signal", c.low_signal}};
  if (c.alpha) j["alpha"] = *c.alpha;
  return j;
}

ReductionConfig reduction_config_from_json(const Json& j) {
  ReductionConfig c;
  try {
    c.eta = j.value("eta", c.eta);
    if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = j.at("alpha").get<double>();
    c.smoothing_samples = j.value("smoothing_samples", c.smoothing_samples);
    c.derivative_tolerance = j.value("derivative_tolerance", c.derivative_tolerance);
    c.lipschitz = j.value("lipschitz", c.lipschitz);
    if (j.contains("probes"))
      for (const auto& p : j.at("probes")) c.probes.push_back(vector_from_json(p));
    if (j.contains("search")) c.search = search_config_from_json(j.at("search"));
    if (j.contains("recovery")) c.recovery = recovery_config_from_json(j.at("recovery"));
    if (j.contains("backend")) c.backend = oracle_backend_from_string(j.at("backend").get<std::string>());
    c.search_samples = j.value("search_samples", c.search_samples);
    c.value_samples = j.value("value_samples", c.value_samples);
    c.low_signal = j.value("low_signal", c.low_signal);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("reduction config: ") + e.what());
  }
  return c;
}

SmoothedValue smoothed_query(QueryAccess& oracle, double eta, const Eigen::VectorXd& x, std::uint64_t m,
                             const RngStream& rng) {
  if (m == 0) throw InputError("smoothed_query: m must be positive");
  if (!(eta > 0)) throw InputError("smoothed_query: eta must be positive");
  const std::size_t d = oracle.dim();
  if (static_cast<std::size_t>(x.size()) != d) throw InputError("smoothed_query: dimension mismatch");
  std::vector<double> vals(m);
  for (std::size_t b = 0; b * kSampleBlock < m; ++b) {
    auto eng = rng.engine(b);
    std::normal_distribution<double> normal;
    Eigen::VectorXd p(d);
    const std::uint64_t hi = std::min<std::uint64_t>(m, (b + 1) * kSampleBlock);
    for (std::uint64_t k = b * kSampleBlock; k < hi; ++k) {
      for (std::size_t i = 0; i < d; ++i) p[i] = x[i] + eta * normal(eng);
      vals[k] = oracle.query_raw(p.data());
    }
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  SmoothedValue out;
  out.value = mean;
  out.m = m;
  out.std_error = m > 1 ? std::sqrt(var / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
  return out;
}

DerivativeOracle::DerivativeOracle(QueryAccess& base, Eigen::VectorXd u, double eta, double alpha, std::uint64_t m,
                                   double scale, const RngStream& rng)
    : base_(base), u_(std::move(u)), eta_(eta), alpha_(alpha), scale_(scale) {
  const std::size_t d = base_.dim();
  if (static_cast<std::size_t>(u_.size()) != d || std::abs(u_.norm() - 1.0) > 1e-10)
    throw InputError("derivative oracle: probe must be a unit vector of matching dimension");
  if (!(eta > 0) || !(alpha > 0) || m == 0) throw InputError("derivative oracle: eta, alpha and m must be positive");
  offsets_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  const RngStream stream = rng.child(kSmoothingTag);
  for (std::size_t b = 0; b * kSampleBlock < m; ++b) {
    auto eng = stream.engine(b);
    std::normal_distribution<double> normal;
    const std::uint64_t hi = std::min<std::uint64_t>(m, (b + 1) * kSampleBlock);
    for (std::uint64_t k = b * kSampleBlock; k < hi; ++k)
      for (std::size_t i = 0; i < d; ++i) offsets_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = eta * normal(eng);
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  origin_ = raw_difference(zero.data());
}

double DerivativeOracle::eps() const { return scale_ * 4.0 * base_.eps() / alpha_; }

double DerivativeOracle::raw_difference(const double* x) const {
  const Eigen::Index d = offsets_.cols();
  const Eigen::Index m = offsets_.rows();
  Eigen::VectorXd plus(d), minus(d);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double c = x[i] + offsets_(k, i);
      plus[i] = c + 0.5 * alpha_ * u_[i];
      minus[i] = c - 0.5 * alpha_ * u_[i];
    }
    sum += base_.query_raw(plus.data()) - base_.query_raw(minus.data());
  }
  return sum / (static_cast<double>(m) * alpha_);
}

double DerivativeOracle::query_raw(const double* x) {
  count_.fetch_add(1, std::memory_order_relaxed);
  return scale_ * (raw_difference(x) - origin_);
}

std::shared_ptr<SumOfFeaturesModel> derivative_model(const SumOfFeaturesModel& model, const Eigen::VectorXd& u,
                                                     double eta, double scale, double half_range) {
  if (static_cast<std::size_t>(u.size()) != model.dim()) throw InputError("derivative_model: dimension mismatch");
  std::vector<Feature> out;
  for (const auto& f : model.features()) {
    const double c = f.coeff * u.dot(f.direction) * scale;
    if (c == 0.0) continue;
    Activation act = f.activation.smoothed_derivative(eta, half_range);
    if (act.kind() == ActivationKind::kLinear && act.params()[0] == 0.0) continue;
    if (act.kind() == ActivationKind::kTrigLinear) {
      const auto& p = act.params();
      if (p[0] == 0.0 && p[1] == 0.0 && p[2] == 0.0) continue;
    }
    out.push_back(Feature{c, f.direction, std::move(act)});
  }
  return std::make_shared<SumOfFeaturesModel>(model.dim(), std::move(out), model.lipschitz(), model.gamma());
}

RecoveredRidge integrate_ridge(const RecoveredRidge& derivative) {
  const auto& tab = derivative.table();
  const double R = derivative.table_radius();
  const double h = derivative.mesh();
  if (tab.empty() || !(R > 0) || !(h > 0)) throw InputError("integrate_ridge: ridge has no table");
  const long K = std::lround(R / h);
  if (tab.size() != static_cast<std::size_t>(2 * K + 1)) throw InputError("integrate_ridge: table does not cover [-R, R]");
  std::vector<double> out(tab.size(), 0.0);
  const std::size_t mid = static_cast<std::size_t>(K);
  for (std::size_t k = mid + 1; k < tab.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (tab[k - 1] + tab[k]);
  for (std::size_t k = mid; k-- > 0;) out[k] = out[k + 1] - 0.5 * h * (tab[k] + tab[k + 1]);
  return RecoveredRidge::tabulated(derivative.u(), R, h, std::move(out));
}

Json to_json(const ReductionResult& r) {
  Json probes = Json::array();
  for (const auto& p : r.probes) {
    Json dirs = Json::array();
    for (const auto& c : p.directions) dirs.push_back(Json{{"u", to_json(c.u)}, {"mass", c.mass}});
    probes.push_back(Json{{"probe", to_json(p.probe)},
                          {"directions", dirs},
                          {"stats", to_json(p.stats)},
                          {"base_queries", p.base_queries}});
  }
  Json merged = Json::array();
  for (const auto& m : r.merged)
    merged.push_back(Json{{"w", to_json(m.w)},
                          {"mass", m.mass},
                          {"sources", m.sources},
                          {"best_probe", m.best_probe},
                          {"best_projection", m.best_projection},
                          {"low_signal", m.low_signal}});
  return Json{{"probes", probes},
              {"merged", merged},
              {"affine", {{"constant", r.g0}, {"gradient", to_json(r.gradient0)}}},
              {"base_queries", r.base_queries}};
}

ReductionResult recover_unbounded(QueryAccess& oracle, const ReductionConfig& cfg, const RngStream& rng,
                                  const ReductionOptions& opt) {
  const std::size_t d = oracle.dim();
  cfg.validate(d, oracle.eps());
  const std::uint64_t before = oracle.query_count();
  const double alpha = cfg.alpha_for(oracle.eps());
  const auto probes = cfg.probes_for(d);

  std::vector<std::unique_ptr<DerivativeOracle>> derivs;
  for (std::size_t p = 0; p < probes.size(); ++p)
    derivs.push_back(std::make_unique<DerivativeOracle>(oracle, probes[p], cfg.eta, alpha, cfg.smoothing_samples,
                                                        cfg.scale(), rng.child(kSmoothingTag)));
  // Unshifted slopes at the origin along an orthonormal probe set give grad g(0).
  Eigen::VectorXd grad0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t p = 0; p < probes.size(); ++p) grad0 += derivs[p]->origin_slope() * probes[p];
  const double g0 =
      smoothed_query(oracle, cfg.eta, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), cfg.smoothing_samples,
                     rng.child(kSmoothingTag))
          .value;

  auto make = [&](std::size_t p, const Eigen::VectorXd&) {
    ProbeOracles o;
    McOracleOptions mo;
    mo.samples = cfg.search_samples;
    mo.threads = opt.threads;
    o.mass = std::make_unique<McMassOracle>(*derivs[p], cfg.search.ell, mo, rng.child(kMassTag + p));
    DerivativeOracle* dp = derivs[p].get();
    o.value = [&cfg, &opt, &rng, dp, p]() -> std::unique_ptr<ValueOracle> {
      McOracleOptions vo;
      vo.samples = cfg.value_samples;
      vo.threads = opt.threads;
      return std::make_unique<McValueOracle>(*dp, cfg.recovery.ell, vo, rng.child(kValueTag + p));
    };
    o.base_queries = [dp]() { return dp->query_count(); };
    return o;
  };
  auto result = reduce(d, cfg, rng, opt, make, g0, grad0);
  result.base_queries = oracle.query_count() - before;
  return result;
}

ReductionResult recover_unbounded_reference(std::shared_ptr<const SumOfFeaturesModel> model,
                                            const ReductionConfig& cfg, const RngStream& rng,
                                            const ReductionOptions& opt) {
  const std::size_t d = model->dim();
  cfg.validate(d, 0.0);
  double g0 = 0.0;
  Eigen::VectorXd grad0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (const auto& f : model->features()) {
    g0 += f.coeff * f.activation.smoothed_value(cfg.eta, 0.0);
    grad0 += f.coeff * f.activation.smoothed_slope(cfg.eta, 0.0) * f.direction;
  }
  const double half_range = 12.0 * std::max(cfg.search.ell, cfg.recovery.ell);
  const auto probes = cfg.probes_for(d);
  std::vector<std::shared_ptr<const SumOfFeaturesModel>> hs;
  for (const auto& u : probes) hs.push_back(derivative_model(*model, u, cfg.eta, cfg.scale(), half_range));

  auto make = [&](std::size_t p, const Eigen::VectorXd&) {
    ProbeOracles o;
    auto h = hs[p];
    if (h->size() > 0) o.mass = std::make_unique<QuadratureMassOracle>(h, cfg.search.ell);
    const double ell2 = cfg.recovery.ell;
    o.value = [h, ell2]() -> std::unique_ptr<ValueOracle> { return std::make_unique<QuadratureValueOracle>(h, ell2); };
    return o;
  };
  return reduce(d, cfg, rng, opt, make, g0, grad0);
}

}  // namespace ridgefind
