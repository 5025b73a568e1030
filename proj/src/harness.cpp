#include "ridgefind/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "ridgefind/estimators.hpp"

namespace ridgefind {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMassStream = 1;
constexpr std::uint64_t kSearchStream = 2;
constexpr std::uint64_t kValueStream = 3;
constexpr std::uint64_t kMetricStream = 4;
constexpr std::uint64_t kReductionStream = 5;

std::string mode_name(PipelineMode m) { return m == PipelineMode::kBounded ? "bounded" : "reduction"; }

PipelineMode mode_from_string(const std::string& s) {
  if (s == "bounded") return PipelineMode::kBounded;
  if (s == "reduction") return PipelineMode::kReduction;
  throw ConfigError("unknown pipeline mode '" + s + "'");
}

Json noise_to_json(const NoiseSpec& n) { return Json{{"kind", to_string(n.kind)}, {"eps", n.eps}, {"seed", n.seed}}; }

NoiseSpec noise_from_json(const Json& j) {
  NoiseSpec n;
  n.kind = noise_kind_from_string(j.value("kind", std::string("none")));
  n.eps = j.value("eps", 0.0);
  n.seed = j.value("seed", std::uint64_t{0});
  return n;
}

// True when the activation is affine, so its direction cannot be identified
// from a smoothed derivative.
bool affine_activation(const Activation& a) {
  if (a.kind() == ActivationKind::kLinear) return true;
  if (a.kind() == ActivationKind::kTrigLinear) {
    const auto& p = a.params();
    return p[1] == 0.0 && p[2] == 0.0;
  }
  return false;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::vector<Eigen::VectorXd> truth_for(const SumOfFeaturesModel& model, PipelineMode mode) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& f : model.features()) {
    if (mode == PipelineMode::kReduction && affine_activation(f.activation)) continue;
    out.push_back(f.direction);
  }
  return out;
}

Json directions_json(const std::vector<Eigen::VectorXd>& dirs, const std::vector<double>& mass) {
  Json arr = Json::array();
  for (std::size_t k = 0; k < dirs.size(); ++k) arr.push_back(Json{{"u", to_json(dirs[k])}, {"mass", mass[k]}});
  return arr;
}

void score(RunReport& rep, const SumOfFeaturesModel& model, const AssembledModel& fitted, const ExperimentConfig& cfg) {
  rep.match = direction_error(rep.directions, truth_for(model, cfg.pipeline.mode), cfg.metrics.direction_tolerance);
  rep.sup_error = sup_error_estimate([&](const Eigen::VectorXd& x) { return model.evaluate(x); },
                                     [&](const Eigen::VectorXd& x) { return fitted(x); }, model.dim(), cfg.metrics.R,
                                     cfg.metrics.eval_points, RngStream(cfg.seed).child(kMetricStream));
  rep.passed = rep.match.missed.empty() && rep.match.extraneous.empty() && *rep.sup_error <= cfg.metrics.sup_tolerance;
}

}  // namespace

std::string to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInput:
      return "input";
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kBudget:
      return "budget";
    case ErrorKind::kNumerical:
      return "numerical";
    case ErrorKind::kGeneration:
      return "generation";
    case ErrorKind::kUnsupported:
      return "unsupported";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Configuration

Json to_json(const InstanceSpec& s) {
  Json acts = Json::array();
  for (const auto& a : s.activations) acts.push_back(activation_to_json(a));
  return Json{{"dim", s.dim},
              {"n", s.n},
              {"gamma", s.gamma},
              {"activations", acts},
              {"coeff_min", s.coeff_min},
              {"coeff_max", s.coeff_max},
              {"seed", s.seed},
              {"max_attempts", s.max_attempts}};
}

InstanceSpec instance_spec_from_json(const Json& j) {
  InstanceSpec s;
  s.dim = j.value("dim", s.dim);
  s.n = j.value("n", s.n);
  s.gamma = j.value("gamma", s.gamma);
  if (j.contains("activations")) {
    s.activations.clear();
    for (const auto& a : j.at("activations")) s.activations.push_back(activation_from_json(a));
  }
  s.coeff_min = j.value("coeff_min", s.coeff_min);
  s.coeff_max = j.value("coeff_max", s.coeff_max);
  s.seed = j.value("seed", s.seed);
  s.max_attempts = j.value("max_attempts", s.max_attempts);
  return s;
}

void ExperimentConfig::validate() const {
  if (instance) {
    const auto& s = *instance;
    if (s.dim < 1) throw ConfigError("instance: dim must be >= 1");
    if (s.n > 0 && s.activations.empty()) throw ConfigError("instance: activation list is empty");
    if (!(s.gamma >= 0 && s.gamma <= 1)) throw ConfigError("instance: gamma must lie in [0, 1]");
    if (!(s.coeff_min >= 0 && s.coeff_min <= s.coeff_max && s.coeff_max <= 1))
      throw ConfigError("instance: need 0 <= coeff_min <= coeff_max <= 1");
  } else if (instance_file.empty()) {
    throw ConfigError("config names neither an instance spec nor an instance file");
  }
  if (noise && !(noise->eps >= 0)) throw ConfigError("oracle: eps must be >= 0");
  if (pipeline.threads < 1) throw ConfigError("pipeline: threads must be >= 1");
  if (pipeline.backend == OracleBackend::kMonteCarlo && (pipeline.mass_samples == 0 || pipeline.value_samples == 0))
    throw ConfigError("pipeline: Monte-Carlo sample counts must be positive");
  if (!(metrics.R > 0) || metrics.eval_points == 0) throw ConfigError("metrics: need R > 0 and eval_points >= 1");
  if (!(metrics.direction_tolerance >= 0) || !(metrics.sup_tolerance >= 0))
    throw ConfigError("metrics: tolerances must be >= 0");
  pipeline.recovery.validate();
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"seed", c.seed},
         {"pipeline",
          {{"mode", mode_name(c.pipeline.mode)},
           {"backend", to_string(c.pipeline.backend)},
           {"search", to_json(c.pipeline.search)},
           {"recovery", to_json(c.pipeline.recovery)},
           {"reduction", to_json(c.pipeline.reduction)},
           {"mass_samples", c.pipeline.mass_samples},
           {"value_samples", c.pipeline.value_samples},
           {"test_mode", c.pipeline.test_mode},
           {"threads", c.pipeline.threads},
           {"trace", c.pipeline.trace}}},
         {"metrics",
          {{"R", c.metrics.R},
           {"eval_points", c.metrics.eval_points},
           {"direction_tolerance", c.metrics.direction_tolerance},
           {"sup_tolerance", c.metrics.sup_tolerance}}}};
  if (c.instance) j["instance"] = to_json(*c.instance);
  if (!c.instance_file.empty()) j["instance_file"] = c.instance_file;
  if (c.noise) j["oracle"] = noise_to_json(*c.noise);
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("instance")) c.instance = instance_spec_from_json(j.at("instance"));
    c.instance_file = j.value("instance_file", std::string());
    if (j.contains("oracle")) c.noise = noise_from_json(j.at("oracle"));
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      if (p.contains("mode")) c.pipeline.mode = mode_from_string(p.at("mode").get<std::string>());
      if (p.contains("backend")) c.pipeline.backend = oracle_backend_from_string(p.at("backend").get<std::string>());
      if (p.contains("search")) c.pipeline.search = search_config_from_json(p.at("search"));
      if (p.contains("recovery")) c.pipeline.recovery = recovery_config_from_json(p.at("recovery"));
      if (p.contains("reduction")) c.pipeline.reduction = reduction_config_from_json(p.at("reduction"));
      c.pipeline.mass_samples = p.value("mass_samples", c.pipeline.mass_samples);
      c.pipeline.value_samples = p.value("value_samples", c.pipeline.value_samples);
      c.pipeline.test_mode = p.value("test_mode", c.pipeline.test_mode);
      c.pipeline.threads = p.value("threads", c.pipeline.threads);
      c.pipeline.trace = p.value("trace", c.pipeline.trace);
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      c.metrics.R = m.value("R", c.metrics.R);
      c.metrics.eval_points = m.value("eval_points", c.metrics.eval_points);
      c.metrics.direction_tolerance = m.value("direction_tolerance", c.metrics.direction_tolerance);
      c.metrics.sup_tolerance = m.value("sup_tolerance", c.metrics.sup_tolerance);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  auto c = experiment_config_from_json(j);
  if (!c.instance_file.empty() && fs::path(c.instance_file).is_relative())
    c.instance_file = (path.parent_path() / c.instance_file).string();
  return c;
}

// ---------------------------------------------------------------------------
// Instances and metrics

SumOfFeaturesModel generate_instance(const InstanceSpec& spec, const RngStream& rng) {
  if (spec.dim < 1) throw InputError("generate_instance: dim must be >= 1");
  if (spec.n > 0 && spec.activations.empty()) throw InputError("generate_instance: no activations");
  auto eng = rng.engine();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(spec.dim);

  std::vector<Eigen::VectorXd> dirs;
  std::size_t attempts = 0;
  while (dirs.size() < spec.n) {
    if (++attempts > spec.max_attempts) {
      std::ostringstream os;
      os << "generate_instance: could not place " << spec.n << " directions in dimension " << spec.dim
         << " with pairwise sine >= " << spec.gamma << " after " << spec.max_attempts << " attempts";
      throw GenerationError(os.str());
    }
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(eng);
    const double nv = v.norm();
    if (!(nv > 0)) continue;
    v /= nv;
    bool ok = true;
    for (const auto& w : dirs)
      if (line_sine(v, w) < spec.gamma) {
        ok = false;
        break;
      }
    if (ok) dirs.push_back(std::move(v));
  }

  std::vector<Feature> feats;
  double lip = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double mag = spec.coeff_min + (spec.coeff_max - spec.coeff_min) * unit(eng);
    const double sign = unit(eng) < 0.5 ? -1.0 : 1.0;
    const Activation& act = spec.activations[i % spec.activations.size()];
    lip = std::max(lip, act.lipschitz());
    feats.push_back(Feature{sign * mag, dirs[i], act});
  }
  return SumOfFeaturesModel(spec.dim, std::move(feats), lip > 0 ? lip : 1.0, spec.gamma);
}

double MatchReport::max_cost() const {
  double m = 0.0;
  for (const auto& p : matches) m = std::max(m, p.cost);
  return m;
}

MatchReport direction_error(const std::vector<Eigen::VectorXd>& recovered, const std::vector<Eigen::VectorXd>& truth,
                            double tolerance) {
  struct Pair {
    double cost;
    std::size_t r, t;
  };
  std::vector<Pair> pairs;
  for (std::size_t r = 0; r < recovered.size(); ++r)
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (recovered[r].size() != truth[t].size()) throw InputError("direction_error: dimension mismatch");
      const double c = std::min((recovered[r] - truth[t]).norm(), (recovered[r] + truth[t]).norm());
      pairs.push_back({c, r, t});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.cost < b.cost; });
  std::vector<bool> used_r(recovered.size(), false), used_t(truth.size(), false);
  MatchReport rep;
  for (const auto& p : pairs) {
    if (p.cost > tolerance) break;
    if (used_r[p.r] || used_t[p.t]) continue;
    used_r[p.r] = used_t[p.t] = true;
    rep.matches.push_back({p.r, p.t, p.cost});
  }
  std::sort(rep.matches.begin(), rep.matches.end(),
            [](const DirectionMatch& a, const DirectionMatch& b) { return a.recovered < b.recovered; });
  for (std::size_t t = 0; t < truth.size(); ++t)
    if (!used_t[t]) rep.missed.push_back(t);
  for (std::size_t r = 0; r < recovered.size(); ++r)
    if (!used_r[r]) rep.extraneous.push_back(r);
  return rep;
}

Json to_json(const MatchReport& m) {
  Json rows = Json::array();
  for (const auto& p : m.matches) rows.push_back(Json{{"recovered", p.recovered}, {"truth", p.truth}, {"cost", p.cost}});
  return Json{{"matches", rows}, {"missed", m.missed}, {"extraneous", m.extraneous}, {"max_cost", m.max_cost()}};
}

double sup_error_estimate(const std::function<double(const Eigen::VectorXd&)>& f,
                          const std::function<double(const Eigen::VectorXd&)>& g, std::size_t dim, double R,
                          std::size_t N, const RngStream& rng) {
  if (N == 0) throw InputError("sup_error_estimate: N must be >= 1");
  if (dim < 1 || !(R >= 0)) throw InputError("sup_error_estimate: need dim >= 1 and R >= 0");
  auto eng = rng.engine();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  double worst = 0.0;
  Eigen::VectorXd x(d);
  for (std::size_t k = 0; k < N; ++k) {
    double n2 = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i) x[i] = normal(eng);
      n2 = x.squaredNorm();
    } while (!(n2 > 0));
    x *= R * std::pow(unit(eng), 1.0 / static_cast<double>(dim)) / std::sqrt(n2);
    worst = std::max(worst, std::abs(f(x) - g(x)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Reports

Json RunReport::stable_json() const {
  Json j = to_json(*this);
  for (auto& s : j["stages"]) s.erase("seconds");
  return j;
}

Json to_json(const RunReport& r) {
  Json dirs = Json::array();
  for (std::size_t k = 0; k < r.directions.size(); ++k) {
    Json row{{"index", k}, {"u", to_json(r.directions[k])}, {"mass", k < r.direction_mass.size() ? r.direction_mass[k] : 0.0}};
    row["match"] = nullptr;
    for (const auto& m : r.match.matches)
      if (m.recovered == k) row["match"] = Json{{"truth", m.truth}, {"cost", m.cost}};
    row["extraneous"] = std::find(r.match.extraneous.begin(), r.match.extraneous.end(), k) != r.match.extraneous.end();
    dirs.push_back(row);
  }
  Json stages = Json::array();
  for (const auto& s : r.stages)
    stages.push_back(Json{{"name", s.name}, {"seconds", s.seconds}, {"queries", s.queries}, {"oracle_calls", s.oracle_calls}});
  Json j{{"passed", r.passed},
         {"directions", dirs},
         {"match", to_json(r.match)},
         {"sup_error", r.sup_error ? Json(*r.sup_error) : Json(nullptr)},
         {"total_queries", r.total_queries},
         {"stages", stages},
         {"parameters", r.parameters},
         {"diagnostics", r.diagnostics.is_null() ? Json::object() : r.diagnostics}};
  j["failure"] = r.failed_stage.empty()
                     ? Json(nullptr)
                     : Json{{"stage", r.failed_stage}, {"kind", to_string(r.error_kind)}, {"message", r.error}};
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline

Instance resolve_instance(const ExperimentConfig& config) {
  Instance inst;
  if (config.instance) {
    inst.model = generate_instance(*config.instance, RngStream(config.instance->seed));
  } else {
    try {
      inst = instance_from_json(read_json_file(config.instance_file));
    } catch (const Json::exception& e) {
      throw IoError("cannot read instance " + config.instance_file + ": " + e.what());
    }
  }
  if (config.noise) inst.noise = *config.noise;
  return inst;
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& opt) {
  RunReport rep;
  rep.parameters = to_json(config);
  std::string stage = "config";
  const auto& pipe = config.pipeline;
  const RngStream root(config.seed);
  std::optional<fs::path> out = opt.out_dir;
  std::optional<fs::path> trace_dir;
  if (out && pipe.trace) trace_dir = *out / "traces";

  try {
    config.validate();
    if (out) {
      fs::create_directories(*out);
      write_json_file(*out / "config.json", rep.parameters);
      if (trace_dir) fs::create_directories(*trace_dir);
    }

    stage = "generate";
    Stopwatch sw_gen;
    auto inst = resolve_instance(config);
    auto model = std::make_shared<const SumOfFeaturesModel>(inst.model);
    QueryOracle oracle(model, inst.noise);
    if (out && pipe.test_mode) write_json_file(*out / "model.json", instance_to_json(*model, inst.noise));
    rep.stages.push_back({"generate", sw_gen.seconds(), 0, 0});
    const std::size_t d = model->dim();
    std::optional<std::vector<Eigen::VectorXd>> truth;
    if (pipe.test_mode) truth = truth_for(*model, pipe.mode);
    const bool quad = pipe.backend == OracleBackend::kQuadrature;

    AssembledModel fitted;
    if (pipe.mode == PipelineMode::kReduction) {
      stage = "reduce";
      Stopwatch sw;
      const std::uint64_t q0 = oracle.query_count();
      ReductionConfig rc = pipe.reduction;
      rc.backend = pipe.backend;
      ReductionOptions ro;
      ro.threads = pipe.threads;
      ro.truth = truth;
      const RngStream rrng = root.child(kReductionStream);
      auto res = quad ? recover_unbounded_reference(model, rc, rrng, ro) : recover_unbounded(oracle, rc, rrng, ro);
      for (const auto& m : res.merged) {
        if (m.low_signal) continue;
        rep.directions.push_back(m.w);
        rep.direction_mass.push_back(m.mass);
      }
      fitted = res.model;
      rep.diagnostics["reduction"] = to_json(res);
      std::uint64_t calls = 0;
      for (const auto& p : res.probes) calls += p.stats.oracle_calls;
      rep.stages.push_back({"reduce", sw.seconds(), oracle.query_count() - q0, calls});
      if (out) {
        write_json_file(*out / "directions.json", directions_json(rep.directions, rep.direction_mass));
        write_json_file(*out / "reduction.json", rep.diagnostics["reduction"]);
        fs::create_directories(*out / "ridges");
        for (std::size_t k = 0; k < fitted.ridges().size(); ++k)
          write_json_file(*out / "ridges" / ("ridge_" + std::to_string(k) + ".json"), to_json(fitted.ridges()[k]));
        write_json_file(*out / "assembled.json", to_json(fitted));
      }
    } else {
      if (opt.scope == RunScope::kRecover) {
        stage = "load-directions";
        if (!out) throw ConfigError("recover needs a run directory holding directions.json");
        const Json dj = read_json_file(*out / "directions.json");
        for (const auto& row : dj) {
          rep.directions.push_back(vector_from_json(row.at("u")));
          rep.direction_mass.push_back(row.value("mass", 0.0));
        }
      } else {
        stage = "search";
        Stopwatch sw;
        const std::uint64_t q0 = oracle.query_count();
        std::unique_ptr<MassOracle> mass;
        if (quad) {
          if (d > 3) throw UnsupportedError("quadrature mass oracle supports d <= 3");
          mass = std::make_unique<QuadratureMassOracle>(model, pipe.search.ell);
        } else {
          McOracleOptions mo;
          mo.samples = pipe.mass_samples;
          mo.threads = pipe.threads;
          mass = std::make_unique<McMassOracle>(oracle, pipe.search.ell, mo, root.child(kMassStream));
        }
        SearchOptions so;
        so.threads = pipe.threads;
        so.truth = truth;
        if (trace_dir) so.trace_path = (*trace_dir / "search.jsonl").string();
        auto sr = find_directions(*mass, pipe.search, root.child(kSearchStream), so);
        for (const auto& c : sr.directions) {
          rep.directions.push_back(c.u);
          rep.direction_mass.push_back(c.mass);
        }
        rep.diagnostics["search"] = to_json(sr.stats);
        rep.stages.push_back({"search", sw.seconds(), oracle.query_count() - q0, mass->calls()});
        if (out) write_json_file(*out / "directions.json", directions_json(rep.directions, rep.direction_mass));
        if (opt.scope == RunScope::kSearch) {
          rep.match = direction_error(rep.directions, truth_for(*model, pipe.mode), config.metrics.direction_tolerance);
          rep.passed = rep.match.missed.empty() && rep.match.extraneous.empty();
          rep.total_queries = oracle.query_count();
          if (out) write_json_file(*out / "report.json", to_json(rep));
          return rep;
        }
      }

      stage = "recover";
      Stopwatch sw;
      const std::uint64_t q0 = oracle.query_count();
      std::unique_ptr<ValueOracle> value;
      if (quad) {
        value = std::make_unique<QuadratureValueOracle>(model, pipe.recovery.ell);
      } else {
        McOracleOptions vo;
        vo.samples = pipe.value_samples;
        vo.threads = pipe.threads;
        value = std::make_unique<McValueOracle>(oracle, pipe.recovery.ell, vo, root.child(kValueStream));
      }
      std::vector<RecoveredRidge> ridges;
      for (const auto& u : rep.directions) ridges.push_back(recover_ridge(*value, u, pipe.recovery, pipe.threads));
      rep.stages.push_back({"recover", sw.seconds(), oracle.query_count() - q0, value->calls()});

      stage = "assemble";
      Stopwatch sw_as;
      fitted = assemble_model(d, std::move(ridges));
      rep.stages.push_back({"assemble", sw_as.seconds(), 0, 0});
      if (out) {
        fs::create_directories(*out / "ridges");
        for (std::size_t k = 0; k < fitted.ridges().size(); ++k)
          write_json_file(*out / "ridges" / ("ridge_" + std::to_string(k) + ".json"), to_json(fitted.ridges()[k]));
        write_json_file(*out / "assembled.json", to_json(fitted));
      }
    }

    stage = "metrics";
    Stopwatch sw_m;
    score(rep, *model, fitted, config);
    rep.stages.push_back({"metrics", sw_m.seconds(), 0, 0});
    rep.total_queries = oracle.query_count();
  } catch (const Error& e) {
    rep.passed = false;
    rep.failed_stage = stage;
    rep.error_kind = e.kind();
    rep.error = e.what();
  } catch (const Json::exception& e) {
    rep.passed = false;
    rep.failed_stage = stage;
    rep.error_kind = ErrorKind::kInput;
    rep.error = e.what();
  } catch (const fs::filesystem_error& e) {
    rep.passed = false;
    rep.failed_stage = stage;
    rep.error_kind = ErrorKind::kIo;
    rep.error = e.what();
  }
  if (out) {
    try {
      fs::create_directories(*out);
      write_json_file(*out / "report.json", to_json(rep));
    } catch (const std::exception& e) {
      if (rep.failed_stage.empty()) {
        rep.passed = false;
        rep.failed_stage = "report";
        rep.error_kind = ErrorKind::kIo;
        rep.error = e.what();
      }
    }
  }
  return rep;
}

RunReport render_report(const fs::path& run_dir) {
  RunReport rep;
  const auto config = experiment_config_from_json(read_json_file(run_dir / "config.json"));
  rep.parameters = to_json(config);
  if (fs::exists(run_dir / "report.json")) {
    const Json old = read_json_file(run_dir / "report.json");
    for (const auto& s : old.value("stages", Json::array()))
      rep.stages.push_back({s.at("name").get<std::string>(), s.value("seconds", 0.0),
                            s.value("queries", std::uint64_t{0}), s.value("oracle_calls", std::uint64_t{0})});
    rep.total_queries = old.value("total_queries", std::uint64_t{0});
    rep.diagnostics = old.value("diagnostics", Json::object());
    if (!old.at("failure").is_null()) {
      const auto& f = old.at("failure");
      rep.failed_stage = f.value("stage", std::string());
      rep.error = f.value("message", std::string());
      const std::string kind = f.value("kind", std::string("input"));
      for (auto k : {ErrorKind::kInput, ErrorKind::kConfig, ErrorKind::kBudget, ErrorKind::kNumerical,
                     ErrorKind::kGeneration, ErrorKind::kUnsupported, ErrorKind::kIo})
        if (to_string(k) == kind) rep.error_kind = k;
    }
  }
  if (!rep.failed_stage.empty()) return rep;
  if (!fs::exists(run_dir / "model.json")) throw IoError("report: " + run_dir.string() + " has no model.json (learner-mode run)");
  const Instance inst = instance_from_json(read_json_file(run_dir / "model.json"));
  for (const auto& row : read_json_file(run_dir / "directions.json")) {
    rep.directions.push_back(vector_from_json(row.at("u")));
    rep.direction_mass.push_back(row.value("mass", 0.0));
  }
  if (fs::exists(run_dir / "assembled.json")) {
    const AssembledModel fitted = assembled_model_from_json(read_json_file(run_dir / "assembled.json"));
    score(rep, inst.model, fitted, config);
  } else {
    rep.match = direction_error(rep.directions, truth_for(inst.model, config.pipeline.mode),
                                config.metrics.direction_tolerance);
    rep.passed = rep.match.missed.empty() && rep.match.extraneous.empty();
  }
  return rep;
}

}  // namespace ridgefind
