// Acceptance suite: one PASS/FAIL line per criterion. Usage: ridgefind_acceptance [N ...]
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ridgefind/estimators.hpp"
#include "ridgefind/fourier.hpp"
#include "ridgefind/harness.hpp"
#include "ridgefind/quadrature.hpp"
#include "ridgefind/recovery.hpp"
#include "ridgefind/reduction.hpp"
#include "ridgefind/search.hpp"

using namespace ridgefind;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pinned tolerances.
constexpr double kC1RelTol = 0.05;
constexpr int kC1MinSeeds = 95;
constexpr double kC2Delta = 0.05;
constexpr double kC3AbsTol = 1e-6;
constexpr double kC4RelTol = 1e-6;
constexpr double kC9DirTol = 0.05;
constexpr double kC10SupTol = 0.1;
constexpr double kC10McDirTol = 0.1;
constexpr double kC10McSupTol = 0.2;
constexpr int kC10McMinSeeds = 8;
constexpr double kC11SupTol = 0.15;
constexpr double kC11LinearTol = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string config_path(const std::string& name) { return std::string(RIDGEFIND_CONFIG_DIR) + "/" + name; }

Eigen::VectorXd unit(std::mt19937_64& g, std::size_t d) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(g);
  return v / v.norm();
}

// Comparison form of a report: no timings and no thread count.
std::string comparable(const RunReport& r) {
  Json j = r.stable_json();
  j["parameters"]["pipeline"].erase("threads");
  return dump_json(j);
}

// ---------------------------------------------------------------------------

constexpr double kC1Ell = 4.0, kC1V = 1.0, kC1A = 1.0;
constexpr std::uint64_t kC1Samples = 200000;

double c1_reference() {
  return quadrature_mass_1d([](double x) { return std::cos(x); }, kC1Ell, kC1V, kC1A);
}

Estimate c1_estimate(std::uint64_t seed, double delta) {
  struct Cos final : QueryAccess {
    std::size_t dim() const override { return 1; }
    double eps() const override { return 0.0; }
    double query_raw(const double* x) override { return std::cos(x[0]); }
    std::uint64_t query_count() const override { return 0; }
  } f;
  Eigen::MatrixXd A(1, 1);
  A(0, 0) = kC1A;
  Eigen::VectorXd v(1);
  v[0] = kC1V;
  return est_weight(f, SmoothingScale(kC1Ell, ScaleRole::kDirectionSearch), GaussianWeight(v, A), kC1Samples,
                    RngStream(seed), delta);
}

Outcome criterion1() {
  const double ref = c1_reference();
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const double rel = std::abs(c1_estimate(1000 + s, 0.05).value.real() - ref) / ref;
    worst = std::max(worst, rel);
    ok += rel <= kC1RelTol;
  }
  return {ok >= kC1MinSeeds, fmt("%d/100 seeds within 5%% of quadrature %.6f (worst %.4f)", ok, ref, worst)};
}

Outcome criterion2() {
  const double ref = c1_reference();
  const int trials = 500;
  int bad = 0;
  double radius = 0.0;
  for (int s = 0; s < trials; ++s) {
    const auto e = c1_estimate(5000 + s, kC2Delta);
    radius = e.radius;
    bad += std::abs(e.value.real() - ref) > e.radius;
  }
  const double rate = static_cast<double>(bad) / trials;
  const double limit = kC2Delta + 3 * std::sqrt(kC2Delta * (1 - kC2Delta) / trials);
  return {rate <= limit, fmt("failure rate %.4f <= %.4f (radius %.4f)", rate, limit, radius)};
}

Outcome criterion3() {
  const double ell = 2.0;
  const Activation sigma = Activation::tanh_like(1.0);
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Eigen::VectorXd v = unit(g, 2);
  const double half = 12 * ell;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd y(2);
    y << u(g), u(g);
    // Tensor-grid transform in the original coordinates.
    quad::Options inner;
    inner.abs_tol = 1e-11;
    inner.initial_panels = 16;
    quad::Options outer = inner;
    outer.abs_tol = 1e-9;
    const auto r = quad::integrate(
        [&](double x1) {
          return quad::integrate(
                     [&](double x2) {
                       const double w = sigma(v[0] * x1 + v[1] * x2) *
                                        std::exp(-(x1 * x1 + x2 * x2) / (2 * ell * ell));
                       return std::polar(w, -(y[0] * x1 + y[1] * x2));
                     },
                     -half, half, inner)
              .value;
        },
        -half, half, outer);
    const Complex direct = r.value / (2 * kPi);
    worst = std::max(worst, std::abs(ridge_fourier_transform(sigma, ell, v, y) - direct));
  }
  return {worst <= kC3AbsTol, fmt("max |difference| %.3e over 20 points", worst)};
}

Outcome criterion4() {
  const std::vector<Activation> acts{Activation::sine(1.0), Activation::tanh_like(1.0), Activation::gaussian_bump(1.5, 0.0),
                                     Activation::cosine_bump(1.0)};
  double worst = 0.0;
  for (double ell : {2.0, 8.0}) {
    for (const auto& s : acts) {
      quad::Options o;
      o.abs_tol = 1e-12 * ell;
      o.rel_tol = 1e-10;
      o.initial_panels = 64;
      const double xs = quad::integrate([&](double x) { return std::pow(s(x), 2) * std::exp(-x * x / (ell * ell)); },
                                        -12 * ell, 12 * ell, o)
                            .value;
      // |transform|^2 is even for real activations; it has decayed far below tolerance by t = 40.
      o.breakpoints = {0.5, 1.0, 1.5, 2.0};
      const double ts =
          2 * quad::integrate([&](double t) { return std::norm(sigma_hat_quadrature(s, ell, t)); }, 0.0, 40.0, o).value;
      worst = std::max(worst, std::abs(ts - xs) / xs);
    }
  }
  return {worst <= kC4RelTol, fmt("max relative Parseval gap %.3e over 4 activations, ell in {2, 8}", worst)};
}

Outcome criterion5() {
  const double R = kPi / 2, eps = 1.0, L = 1.0;
  const double ell = 20 * (R + L) / eps;
  const Activation s = Activation::sine(1.0);
  quad::Options o;
  o.abs_tol = 1e-10;
  o.initial_panels = 64;
  o.breakpoints = {1.0 - 10 / ell, 1.0, 1.0 + 10 / ell};
  auto hat2 = [&](double y) { return std::norm(sigma_hat_quadrature(s, ell, y)); };
  // The integrand is even; the transform is negligible beyond |y| = 3.
  const double weighted =
      2 * quad::integrate([&](double y) { return hat2(y) * y * y * std::exp(-y * y / (ell * ell)); }, 0.0, 3.0, o)
              .value;
  const double a = (eps / 8) * std::sqrt(1 / (R * ell));
  const double B = 4 * ell * std::log(ell * R / eps);
  std::vector<double> bps;
  for (double b : o.breakpoints)
    if (b > a && b < B) bps.push_back(b);
  o.breakpoints = bps;
  o.initial_panels = 256;
  // The integrand is nonnegative, so its integral over [a, min(B, 3)] is a lower bound for the band.
  const double band = 2 * quad::integrate(hat2, a, std::min(B, 3.0), o).value;
  const double lb1 = eps * eps / (8 * R), lb2 = eps * eps / (8 * R * ell * ell);
  return {weighted >= lb1 && band >= lb2,
          fmt("weighted %.4g >= %.4g; band [%.4g, %.4g] mass %.4g >= %.4g (ell %.2f)", weighted, lb1, a, B, band, lb2,
              ell)};
}

Outcome criterion6() {
  InstanceSpec spec;
  spec.dim = 2;
  spec.n = 2;
  spec.gamma = 0.5;
  spec.activations = {Activation::sine(1.0), Activation::tanh_like(1.0)};
  spec.coeff_min = 0.5;
  spec.coeff_max = 1.0;
  const auto model = std::make_shared<const SumOfFeaturesModel>(generate_instance(spec, RngStream(61)));
  const double ell = 8.0;
  QuadratureMassOracle q(model, ell);
  std::mt19937_64 g(62);
  std::uniform_real_distribution<double> u(-1.5, 1.5), lam(0.5 * ell * ell, 2 * ell * ell);
  const double n = 2, d = 2;
  const double pref = n * n * std::pow(kPi, d / 2) * std::pow(ell, d);
  int ok = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd r = unit(g, 2);
    Eigen::MatrixXd Q(2, 2);
    Q << r[0], -r[1], r[1], r[0];
    const Eigen::MatrixXd A = Q * Eigen::Vector2d(lam(g), lam(g)).asDiagonal() * Q.transpose();
    Eigen::VectorXd v(2);
    v << u(g), u(g);
    double D2 = std::numeric_limits<double>::infinity();
    for (const auto& f : model->features()) {
      const Eigen::VectorXd& w = f.direction;
      D2 = std::min(D2, v.dot(A * v) - std::pow(w.dot(A * v), 2) / w.dot(A * w));
    }
    const double normA = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().maxCoeff();
    const double bound = pref * std::exp(-ell * ell / (ell * ell + normA) * D2);
    const double mass = q.mass(v, A);
    ok += mass <= bound;
    worst_ratio = std::max(worst_ratio, mass / bound);
  }
  return {ok == 10, fmt("%d/10 points under the decay bound (max mass/bound %.3g)", ok, worst_ratio)};
}

Outcome criterion7() {
  const double ell = 32.0, R = 2.0, L = 1.0;
  const Activation s = Activation::tanh_like(1.0);
  bool pass = true;
  std::ostringstream os;
  for (double eps : {0.2, 0.1, 0.05}) {
    const double B = 8 * L * L * ell / (eps * eps);
    const double bound = 2 * L * std::sqrt(2 * ell) / std::sqrt(B);
    double sup = 0.0;
    for (int k = -40; k <= 40; ++k) {
      const double x = R * k / 40.0;
      sup = std::max(sup, std::abs(s(x) - truncated_inversion_reference(s, ell, B, x)));
    }
    pass = pass && sup <= bound;
    os << fmt("B=%.0f sup %.3g <= %.3g; ", B, sup, bound);
  }
  return {pass, os.str()};
}

Outcome criterion8() {
  const auto cfg = load_experiment_config(config_path("a1_quadrature.json"));
  InstanceSpec spec = *cfg.instance;
  spec.n = 4;
  spec.seed = 8;
  const auto model = std::make_shared<const SumOfFeaturesModel>(generate_instance(spec, RngStream(spec.seed)));
  QuadratureMassOracle q(model, cfg.pipeline.search.ell);
  SearchOptions so;
  so.truth = model->directions();
  const auto r = find_directions(q, cfg.pipeline.search, RngStream(81), so);
  const bool separating = r.stats.basis_separating.value_or(false);
  std::ostringstream hist;
  for (std::size_t k = 0; k < r.stats.branch_histogram.size(); ++k)
    for (std::size_t s = 0; s < r.stats.branch_histogram[k].size(); ++s)
      if (r.stats.branch_histogram[k][s]) hist << " k" << k << ":|S|=" << s << "x" << r.stats.branch_histogram[k][s];
  return {separating && r.stats.max_branch_at_3_plus <= 1,
          fmt("separating basis %s, max branch at levels >= 3: %zu;", separating ? "yes" : "no",
              r.stats.max_branch_at_3_plus) +
              hist.str()};
}

std::optional<RunReport> a1_report;

const RunReport& a1() {
  if (!a1_report) a1_report = run_experiment(load_experiment_config(config_path("a1_quadrature.json")));
  return *a1_report;
}

Outcome criterion9() {
  const auto& r = a1();
  if (!r.failed_stage.empty()) return {false, "run failed at " + r.failed_stage + ": " + r.error};
  const bool pass = r.match.matches.size() == 5 && r.match.missed.empty() && r.match.extraneous.empty() &&
                    r.match.max_cost() <= kC9DirTol;
  return {pass, fmt("%zu/5 matched, %zu extraneous, max cost %.4f", r.match.matches.size(), r.match.extraneous.size(),
                    r.match.max_cost())};
}

Outcome criterion10() {
  const auto& r = a1();
  if (!r.failed_stage.empty()) return {false, "run failed at " + r.failed_stage + ": " + r.error};
  const bool quad_ok = r.sup_error && *r.sup_error <= kC10SupTol;
  std::ostringstream os;
  os << fmt("quadrature sup %.4f; mc seeds:", r.sup_error.value_or(-1.0));
  auto mc = load_experiment_config(config_path("a1_mc.json"));
  mc.metrics.direction_tolerance = kC10McDirTol;
  mc.metrics.sup_tolerance = kC10McSupTol;
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    mc.seed = seed;
    const auto m = run_experiment(mc);
    ok += m.passed;
    if (!m.failed_stage.empty())
      os << fmt(" [%llu: %s error]", static_cast<unsigned long long>(seed), m.failed_stage.c_str());
    else
      os << fmt(" [%llu: %zu/5 found, %zu extra, sup %.3g]", static_cast<unsigned long long>(seed),
                m.match.matches.size(), m.match.extraneous.size(), m.sup_error.value_or(-1.0));
  }
  os << fmt("; %d/10 mc seeds pass", ok);
  return {quad_ok && ok >= kC10McMinSeeds, os.str()};
}

Outcome criterion11() {
  const auto r = run_experiment(load_experiment_config(config_path("reduction.json")));
  if (!r.failed_stage.empty()) return {false, "reduction failed at " + r.failed_stage + ": " + r.error};
  const double sup = r.sup_error.value_or(1e9);

  // Purely linear instance through the query-only pipeline.
  InstanceSpec spec;
  spec.dim = 3;
  spec.n = 2;
  spec.gamma = 0.5;
  spec.activations = {Activation::linear(1.0)};
  spec.coeff_min = 0.5;
  spec.coeff_max = 1.0;
  const auto model = std::make_shared<const SumOfFeaturesModel>(generate_instance(spec, RngStream(111)));
  QueryOracle oracle(model, NoiseSpec{NoiseKind::kUniformBounded, 1e-6, 17});
  ReductionConfig rc;
  rc.eta = 0.1;
  rc.lipschitz = 2.0;
  rc.smoothing_samples = 64;
  rc.search = load_experiment_config(config_path("a1_mc.json")).pipeline.search;
  rc.search.grid_step = 0.1;
  rc.search_samples = 2000;
  rc.value_samples = 2000;
  rc.recovery.ell = 8.0;
  rc.recovery.delta = 1.0 / 32;
  rc.backend = OracleBackend::kMonteCarlo;
  const auto res = recover_unbounded(oracle, rc, RngStream(112));
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(3);
  for (const auto& f : model->features()) truth += f.coeff * f.activation.params()[0] * f.direction;
  const double coef_err = (res.model.linear() - truth).cwiseAbs().maxCoeff();
  const bool pass = sup <= kC11SupTol && r.match.missed.empty() && coef_err <= kC11LinearTol && res.merged.empty();
  return {pass, fmt("sup %.4f, %zu/%zu directions; linear instance max coefficient error %.2e, %zu spurious ridges",
                    sup, r.match.matches.size(), r.match.matches.size() + r.match.missed.size(), coef_err,
                    res.merged.size())};
}

Outcome criterion12() {
  std::ostringstream os;
  bool pass = true;
  auto check = [&](const std::string& name, ExperimentConfig cfg, bool twice_serial) {
    cfg.pipeline.threads = 1;
    const auto a = comparable(run_experiment(cfg));
    if (twice_serial) {
      const bool same = a == comparable(run_experiment(cfg));
      pass = pass && same;
      os << name << (same ? " repeat identical; " : " repeat DIFFERS; ");
    }
    cfg.pipeline.threads = 8;
    const bool same = a == comparable(run_experiment(cfg));
    pass = pass && same;
    os << name << (same ? " 1 vs 8 threads identical; " : " 1 vs 8 threads DIFFER; ");
  };
  check("A1 quadrature", load_experiment_config(config_path("a1_quadrature.json")), true);
  auto mc = load_experiment_config(config_path("a1_mc.json"));
  mc.seed = 1;
  check("A1 monte-carlo", mc, false);
  check("reduction", load_experiment_config(config_path("reduction.json")), false);
  return {pass, os.str()};
}

const std::map<int, std::function<Outcome()>> kCriteria{
    {1, criterion1}, {2, criterion2},  {3, criterion3},   {4, criterion4},   {5, criterion5},   {6, criterion6},
    {7, criterion7}, {8, criterion8},  {9, criterion9},   {10, criterion10}, {11, criterion11}, {12, criterion12}};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (const auto& [k, _] : kCriteria) which.push_back(k);
  int failed = 0;
  for (int k : which) {
    const auto it = kCriteria.find(k);
    if (it == kCriteria.end()) {
      std::printf("criterion %d: unknown\n", k);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s %s (%.1f s)\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
