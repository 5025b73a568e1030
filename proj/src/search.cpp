#include "ridgefind/search.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ridgefind/error.hpp"
#include "ridgefind/parallel.hpp"

namespace ridgefind {

std::string to_string(SelectionOrder order) {
  return order == SelectionOrder::kLeftToRight ? "left-to-right" : "mass-descending";
}

SelectionOrder selection_order_from_string(const std::string& name) {
  if (name == "left-to-right") return SelectionOrder::kLeftToRight;
  if (name == "mass-descending") return SelectionOrder::kMassDescending;
  throw ConfigError("unknown selection order: " + name);
}

SearchConfig SearchConfig::paper_faithful(double ell, std::size_t d, std::size_t n, double gamma, double tau) {
  SearchConfig c;
  c.preset = "paper-faithful";
  c.ell = ell;
  c.C2 = ell * ell / static_cast<double>(d);
  c.C1 = std::pow(c.C2, 0.9);
  c.tau = tau;
  c.heavy_multiplier = 5.0;
  c.radius2_min = std::pow(c.C1, -0.6);
  c.radius2_max = std::pow(ell, 4);
  c.grid_step = 1.0 / (10.0 * std::sqrt(c.C2));
  c.t_step = 1.0 / std::sqrt(10.0 * c.C2);
  c.t_range = ell * ell;
  c.separation = 1.0 / std::sqrt(10.0 * static_cast<double>(d) * c.C1);
  c.prune_sine = gamma / 2.0;
  c.theta = gamma / std::pow(10.0 * static_cast<double>(std::max<std::size_t>(n, 1)), 3);
  c.selection = SelectionOrder::kLeftToRight;
  return c;
}

void SearchConfig::validate(std::size_t d) const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError(std::string("search config: ") + name + " must be positive");
  };
  if (d < 1) throw ConfigError("search config: dimension must be >= 1");
  positive(ell, "ell");
  positive(C1, "C1");
  positive(C2, "C2");
  positive(tau, "tau");
  positive(heavy_multiplier, "heavy_multiplier");
  positive(grid_step, "grid_step");
  positive(t_step, "t_step");
  positive(t_range, "t_range");
  positive(separation, "separation");
  if (!(radius2_min >= 0) || !(radius2_max > radius2_min)) throw ConfigError("search config: empty annulus");
  if (!(prune_sine >= 0 && prune_sine <= 1)) throw ConfigError("search config: prune_sine must lie in [0, 1]");
  if (!(theta >= 0)) throw ConfigError("search config: theta must be >= 0");
  const double cells = 3.2 * radius2_max / (grid_step * grid_step);
  if (cells > 5e8) throw ConfigError("search config: outer grid too large");
  if (t_range / t_step > 5e7) throw ConfigError("search config: inner grid too large");
  if (preset == "paper-faithful") {
    const double c2 = ell * ell / static_cast<double>(d);
    if (std::abs(C2 - c2) > 1e-9 * c2 || std::abs(C1 - std::pow(c2, 0.9)) > 1e-9 * C1)
      throw ConfigError("search config: paper-faithful preset requires C2 = ell^2/d and C1 = C2^0.9");
  }
}

std::vector<double> SearchConfig::inner_grid() const {
  const long k = static_cast<long>(std::floor(t_range / t_step + 1e-9));
  std::vector<double> cs;
  cs.reserve(static_cast<std::size_t>(2 * k + 1));
  for (long j = -k; j <= k; ++j) cs.push_back(static_cast<double>(j) * t_step);
  return cs;
}

Json to_json(const SearchConfig& c) {
  return Json{{"preset", c.preset},         {"ell", c.ell},
              {"C1", c.C1},                 {"C2", c.C2},
              {"tau", c.tau},               {"heavy_multiplier", c.heavy_multiplier},
              {"radius2_min", c.radius2_min}, {"radius2_max", c.radius2_max},
              {"grid_step", c.grid_step},   {"t_step", c.t_step},
              {"t_range", c.t_range},       {"separation", c.separation},
              {"prune_sine", c.prune_sine}, {"theta", c.theta},
              {"selection", to_string(c.selection)}};
}

SearchConfig search_config_from_json(const Json& j) {
  SearchConfig c;
  try {
    c.preset = j.value("preset", c.preset);
    c.ell = j.at("ell").get<double>();
    c.C1 = j.at("C1").get<double>();
    c.C2 = j.at("C2").get<double>();
    c.tau = j.at("tau").get<double>();
    c.heavy_multiplier = j.value("heavy_multiplier", c.heavy_multiplier);
    c.radius2_min = j.at("radius2_min").get<double>();
    c.radius2_max = j.at("radius2_max").get<double>();
    c.grid_step = j.at("grid_step").get<double>();
    c.t_step = j.at("t_step").get<double>();
    c.t_range = j.at("t_range").get<double>();
    c.separation = j.at("separation").get<double>();
    c.prune_sine = j.at("prune_sine").get<double>();
    c.theta = j.value("theta", c.theta);
    c.selection = selection_order_from_string(j.value("selection", std::string("left-to-right")));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("search config: ") + e.what());
  }
  return c;
}

Eigen::MatrixXd sample_orthonormal_basis(std::size_t d, const RngStream& rng) {
  if (d < 1) throw InputError("sample_orthonormal_basis: d must be >= 1");
  auto eng = rng.engine();
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(eng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing sign(diag R) > 0 makes the distribution of Q exactly Haar.
  for (Eigen::Index j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

bool is_separating(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2, const std::vector<Eigen::VectorXd>& dirs,
                   double theta) {
  if (std::abs(b1.norm() - 1) > 1e-8 || std::abs(b2.norm() - 1) > 1e-8 || std::abs(b1.dot(b2)) > 1e-8)
    throw InputError("is_separating: b1, b2 must be orthonormal");
  const double d = static_cast<double>(b1.size());
  const double proj = theta / std::sqrt(d), det_min = theta * theta / d;
  for (const auto& v : dirs)
    if (std::abs(v.dot(b1)) < proj || std::abs(v.dot(b2)) < proj) return false;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double det = dirs[i].dot(b1) * dirs[j].dot(b2) - dirs[j].dot(b1) * dirs[i].dot(b2);
      if (std::abs(det) < det_min) return false;
    }
  return true;
}

std::vector<double> select_separated_subset(const std::vector<std::pair<double, double>>& values, double threshold,
                                            double separation, SelectionOrder order) {
  std::vector<double> kept;
  if (order == SelectionOrder::kLeftToRight) {
    for (const auto& [c, w] : values) {
      if (std::abs(w) < threshold) continue;
      if (kept.empty() || c - kept.back() >= separation) kept.push_back(c);
    }
    return kept;
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::abs(values[i].second) >= threshold) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a].second) > std::abs(values[b].second); });
  for (std::size_t i : idx) {
    const double c = values[i].first;
    bool ok = true;
    for (double k : kept)
      if (std::abs(c - k) < separation) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

Eigen::VectorXd canonical_sign(Eigen::VectorXd u) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[best])) best = i;
  if (u.size() > 0 && u[best] < 0) u = -u;
  return u;
}

double line_sine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const double c = std::min(1.0, std::abs(u.dot(v)) / (u.norm() * v.norm()));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

std::vector<CandidateDirection> greedy_angle_prune(const std::vector<CandidateDirection>& points, double min_sine) {
  std::vector<CandidateDirection> kept;
  for (const auto& p : points) {
    bool ok = true;
    for (const auto& k : kept)
      if (line_sine(p.u, k.u) < min_sine) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(p);
  }
  return kept;
}

Json to_json(const SearchStats& s) {
  Json j{{"cells", s.cells},
         {"active_cells", s.active_cells},
         {"oracle_calls", s.oracle_calls},
         {"branch_histogram", s.branch_histogram},
         {"max_branch_at_3_plus", s.max_branch_at_3_plus},
         {"basis_attempts", s.basis_attempts},
         {"raw_candidates", s.raw_candidates}};
  j["basis_separating"] = s.basis_separating ? Json(*s.basis_separating) : Json(nullptr);
  return j;
}

namespace {

// A = sum_{j <= k+1} K_j b_j b_j^T with K = (C2, C2, C1, ..., C1, C2).
Eigen::MatrixXd window_matrix(const SearchConfig& cfg, const Eigen::MatrixXd& basis, std::size_t k_plus_1) {
  const Eigen::Index d = basis.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 1; j <= k_plus_1; ++j) {
    const double K = (j == 1 || j == 2 || j == k_plus_1) ? cfg.C2 : cfg.C1;
    const Eigen::VectorXd b = basis.col(static_cast<Eigen::Index>(j - 1));
    A.noalias() += K * b * b.transpose();
  }
  return 0.5 * (A + A.transpose());
}

Eigen::VectorXd combine(const Eigen::MatrixXd& basis, const std::vector<double>& prefix) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.rows());
  for (std::size_t j = 0; j < prefix.size(); ++j) v += prefix[j] * basis.col(static_cast<Eigen::Index>(j));
  return v;
}

}  // namespace

void search_recurse(const SearchState& state, MassOracle& oracle, const SearchConfig& cfg, const Eigen::MatrixXd& basis,
                    const std::vector<double>& inner, std::vector<CandidateDirection>& out, RecursionTrace& trace) {
  const std::size_t d = static_cast<std::size_t>(basis.rows());
  const std::size_t k = state.prefix.size();
  if (k == d) {
    CandidateDirection c;
    c.prefix = state.prefix;
    Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(state.prefix.data(), static_cast<Eigen::Index>(d));
    const double norm = alpha.norm();
    if (!(norm > 0)) return;
    c.u = alpha / norm;  // coordinates in the basis; mapped to R^d by the caller
    out.push_back(std::move(c));
    return;
  }
  const Eigen::MatrixXd A = window_matrix(cfg, basis, k + 1);
  const Eigen::VectorXd base = combine(basis, state.prefix);
  const Eigen::VectorXd dir = basis.col(static_cast<Eigen::Index>(k));
  std::vector<double> w;
  oracle.mass_line(base, dir, inner, A, w);
  trace.calls += inner.size();
  std::vector<std::pair<double, double>> values(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) values[i] = {inner[i], w[i]};
  const auto kept = select_separated_subset(values, cfg.threshold(), cfg.separation, cfg.selection);
  trace.kept.push_back(kept);
  trace.levels.push_back(static_cast<int>(k + 1));
  if (!kept.empty()) trace.active = true;
  for (double c : kept) {
    SearchState next{state.prefix};
    next.prefix.push_back(c);
    const std::size_t before = out.size();
    search_recurse(next, oracle, cfg, basis, inner, out, trace);
    if (k + 1 == d) {
      const auto it = std::find(inner.begin(), inner.end(), c);
      const double mass = w[static_cast<std::size_t>(it - inner.begin())];
      for (std::size_t i = before; i < out.size(); ++i) out[i].mass = mass;
    }
  }
}

SearchResult find_directions(MassOracle& oracle, const SearchConfig& cfg, const RngStream& rng,
                             const SearchOptions& opt) {
  const std::size_t d = oracle.dim();
  cfg.validate(d);
  SearchResult res;
  const std::uint64_t calls_before = oracle.calls();

  // Basis: fixed, or sampled with retries against known truth in test mode.
  if (opt.basis) {
    res.basis = *opt.basis;
    res.stats.basis_attempts = 0;
  } else {
    const int attempts = opt.truth ? std::max(1, opt.max_basis_retries) : 1;
    for (int a = 0; a < attempts; ++a) {
      res.basis = sample_orthonormal_basis(d, rng.child(0xba515ULL + static_cast<std::uint64_t>(a)));
      res.stats.basis_attempts = a + 1;
      if (!opt.truth || d < 2) break;
      if (is_separating(res.basis.col(0), res.basis.col(1), *opt.truth, cfg.theta)) break;
    }
  }
  if (opt.truth && d >= 2)
    res.stats.basis_separating = is_separating(res.basis.col(0), res.basis.col(1), *opt.truth, cfg.theta);

  // Outer grid cells ordered by radius, then angle.
  struct Cell {
    double a1, a2;
  };
  std::vector<Cell> cells;
  if (d == 1) {
    const long kmax = static_cast<long>(std::floor(std::sqrt(cfg.radius2_max) / cfg.grid_step + 1e-9));
    for (long i = -kmax; i <= kmax; ++i) {
      const double a = static_cast<double>(i) * cfg.grid_step;
      if (a * a >= cfg.radius2_min && a * a <= cfg.radius2_max) cells.push_back({a, 0.0});
    }
  } else {
    const long kmax = static_cast<long>(std::floor(std::sqrt(cfg.radius2_max) / cfg.grid_step + 1e-9));
    for (long i = -kmax; i <= kmax; ++i)
      for (long j = -kmax; j <= kmax; ++j) {
        const double a1 = static_cast<double>(i) * cfg.grid_step, a2 = static_cast<double>(j) * cfg.grid_step;
        const double r2 = a1 * a1 + a2 * a2;
        if (r2 >= cfg.radius2_min && r2 <= cfg.radius2_max) cells.push_back({a1, a2});
      }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
    const double rx = x.a1 * x.a1 + x.a2 * x.a2, ry = y.a1 * y.a1 + y.a2 * y.a2;
    if (rx != ry) return rx < ry;
    return std::atan2(x.a2, x.a1) < std::atan2(y.a2, y.a1);
  });
  res.stats.cells = cells.size();

  const std::vector<double> inner = cfg.inner_grid();
  std::vector<std::vector<CandidateDirection>> per_cell(cells.size());
  std::vector<RecursionTrace> traces(cells.size());
  const std::size_t fixed = std::min<std::size_t>(d, 2);
  const Eigen::MatrixXd A_cell = window_matrix(cfg, res.basis, fixed);

  parallel_for(cells.size(), opt.threads, [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    SearchState st;
    st.prefix = {cell.a1};
    if (d >= 2) st.prefix.push_back(cell.a2);
    auto& found = per_cell[ci];
    auto& tr = traces[ci];
    if (d <= 2) {
      // No coordinate is left to search; a cell counts only when it is itself heavy.
      const Eigen::VectorXd v = combine(res.basis, st.prefix);
      const double w = oracle.mass(v, A_cell);
      tr.calls += 1;
      if (std::abs(w) < cfg.threshold()) return;
      tr.active = true;
      search_recurse(st, oracle, cfg, res.basis, inner, found, tr);
      for (auto& c : found) c.mass = w;
    } else {
      search_recurse(st, oracle, cfg, res.basis, inner, found, tr);
    }
    for (auto& c : found) {
      c.cell = ci;
      const Eigen::VectorXd coords = c.u;
      c.u = canonical_sign(res.basis * coords);
      c.u /= c.u.norm();
    }
  });

  // Deterministic merge by cell index.
  std::vector<CandidateDirection> raw;
  res.stats.branch_histogram.assign(d + 1, {});
  std::unique_ptr<TraceLog> log;
  if (!opt.trace_path.empty()) log = std::make_unique<TraceLog>(opt.trace_path);
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const auto& tr = traces[ci];
    if (tr.active) ++res.stats.active_cells;
    for (std::size_t n = 0; n < tr.kept.size(); ++n) {
      const auto level = static_cast<std::size_t>(tr.levels[n]);
      const std::size_t s = tr.kept[n].size();
      if (level >= 3) {
        auto& h = res.stats.branch_histogram[level];
        if (h.size() <= s) h.resize(s + 1, 0);
        ++h[s];
        res.stats.max_branch_at_3_plus = std::max(res.stats.max_branch_at_3_plus, s);
      }
    }
    for (const auto& c : per_cell[ci]) raw.push_back(c);
    if (log && (tr.active || opt.trace_all_cells)) {
      Json path = Json::array();
      for (std::size_t n = 0; n < tr.kept.size(); ++n) path.push_back(Json{{"level", tr.levels[n]}, {"kept", tr.kept[n]}});
      Json cands = Json::array();
      for (const auto& c : per_cell[ci]) cands.push_back(Json{{"u", to_json(c.u)}, {"mass", c.mass}});
      log->write(Json{{"cell", ci},
                      {"alpha1", cells[ci].a1},
                      {"alpha2", d >= 2 ? cells[ci].a2 : 0.0},
                      {"branch_path", path},
                      {"candidates", cands},
                      {"oracle_calls", tr.calls}});
    }
  }
  res.stats.raw_candidates = raw.size();
  std::stable_sort(raw.begin(), raw.end(),
                   [](const CandidateDirection& a, const CandidateDirection& b) { return a.mass > b.mass; });
  res.directions = greedy_angle_prune(raw, cfg.prune_sine);
  res.stats.oracle_calls = oracle.calls() - calls_before;
  return res;
}

}  // namespace ridgefind
