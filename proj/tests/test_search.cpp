#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ridgefind/search.hpp"
#include "test_util.hpp"

using namespace ridgefind;
using namespace ridgefind::testing;

namespace {

// Acceptance-scale settings for d = 3 with a quadrature-backed oracle.
SearchConfig tuned_d3() {
  SearchConfig c;
  c.ell = 64.0;
  c.C2 = c.ell * c.ell / 3;
  c.C1 = std::pow(c.C2, 0.9);
  c.tau = 2.0;
  c.radius2_min = 0.09;
  c.radius2_max = 2.25;
  c.grid_step = 0.02;
  c.t_step = 0.01;
  c.t_range = 2.0;
  c.separation = 0.3;
  c.prune_sine = 0.25;
  c.theta = 0.2;
  c.selection = SelectionOrder::kMassDescending;
  return c;
}

double line_cost(const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return std::min((u - v).norm(), (u + v).norm()); }

// Exhaustive check that kept is separated and maximal among passing values.
bool maximal_and_separated(const std::vector<std::pair<double, double>>& values, double thr, double sep,
                           const std::vector<double>& kept) {
  for (std::size_t i = 1; i < kept.size(); ++i)
    if (kept[i] - kept[i - 1] < sep - 1e-12) return false;
  for (const auto& [c, w] : values) {
    if (std::abs(w) < thr) continue;
    if (std::find(kept.begin(), kept.end(), c) != kept.end()) continue;
    bool blocked = false;
    for (double k : kept) blocked = blocked || std::abs(k - c) < sep;
    if (!blocked) return false;
  }
  for (double k : kept) {
    auto it = std::find_if(values.begin(), values.end(), [&](const auto& p) { return p.first == k; });
    if (it == values.end() || std::abs(it->second) < thr) return false;
  }
  return true;
}

}  // namespace

TEST(OrthonormalBasis, OneDimensionalIsSign) {
  const auto B = sample_orthonormal_basis(1, RngStream(3));
  EXPECT_NEAR(std::abs(B(0, 0)), 1.0, 1e-15);
}

TEST(OrthonormalBasis, OrthonormalInTenDimensions) {
  const auto B = sample_orthonormal_basis(10, RngStream(4));
  EXPECT_LE((B.transpose() * B - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(OrthonormalBasis, SeparatingWithHighProbability) {
  std::mt19937_64 g(17);
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < 4; ++i) dirs.push_back(random_unit(5, g));
  const double gamma = min_pairwise_sine(dirs);
  const double theta = gamma / std::pow(10.0 * 4, 3);
  const int draws = 2000;
  int ok = 0;
  for (int k = 0; k < draws; ++k) {
    const auto B = sample_orthonormal_basis(5, RngStream(100 + k));
    ok += is_separating(B.col(0), B.col(1), dirs, theta);
  }
  const double p = 1 - 1.0 / 40;
  const double slack = 3 * std::sqrt(p * (1 - p) / draws);
  EXPECT_GE(static_cast<double>(ok) / draws, p - slack);
}

TEST(IsSeparating, SingleDirectionAlongB1Fails) {
  const auto b1 = vec({1, 0, 0}), b2 = vec({0, 1, 0});
  EXPECT_FALSE(is_separating(b1, b2, {b1}, 0.1));
}

TEST(IsSeparating, DiagonalPairDeterminantIsOne) {
  const auto b1 = vec({1, 0}), b2 = vec({0, 1});
  const Eigen::VectorXd p = vec({1, 1}) / std::sqrt(2.0), m = vec({1, -1}) / std::sqrt(2.0);
  // Projections are 1/sqrt2 and the determinant is 1, so theta = 1 is the limit.
  EXPECT_TRUE(is_separating(b1, b2, {p, m}, 1.0));
  EXPECT_FALSE(is_separating(b1, b2, {p, m}, 1.01));
}

TEST(IsSeparating, MonotoneInTheta) {
  std::mt19937_64 g(21);
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < 6; ++i) dirs.push_back(random_unit(4, g));
  const auto B = sample_orthonormal_basis(4, RngStream(5));
  bool prev = true;
  for (double theta = 0.0; theta <= 1.0; theta += 0.01) {
    const bool cur = is_separating(B.col(0), B.col(1), dirs, theta);
    EXPECT_TRUE(prev || !cur) << theta;
    prev = cur;
  }
}

TEST(IsSeparating, RejectsNonOrthonormalInput) {
  EXPECT_THROW(is_separating(vec({1, 0}), vec({1, 1}), {vec({1, 0})}, 0.1), InputError);
}

TEST(SelectSeparatedSubset, EmptyWhenNothingPasses) {
  std::vector<std::pair<double, double>> v{{0.0, 1.0}, {0.1, 2.0}};
  EXPECT_TRUE(select_separated_subset(v, 5.0, 0.1).empty());
}

TEST(SelectSeparatedSubset, OneClusterKeepsOne) {
  std::vector<std::pair<double, double>> v{{0.0, 1.0}, {0.1, 9.0}, {0.11, 8.0}, {0.12, 7.0}, {0.5, 1.0}};
  EXPECT_EQ(select_separated_subset(v, 5.0, 0.05).size(), 1u);
  EXPECT_EQ(select_separated_subset(v, 5.0, 0.05, SelectionOrder::kMassDescending).size(), 1u);
}

TEST(SelectSeparatedSubset, MaximalAndSeparatedOnRandomLists) {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, double>> v;
    double c = 0.0;
    for (int k = 0; k < 20; ++k) {
      c += 0.02 + 0.1 * u(g);
      v.push_back({c, 10 * u(g) - 2});
    }
    for (auto order : {SelectionOrder::kLeftToRight, SelectionOrder::kMassDescending}) {
      const auto kept = select_separated_subset(v, 4.0, 0.15, order);
      EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
      EXPECT_TRUE(maximal_and_separated(v, 4.0, 0.15, kept));
    }
  }
}

TEST(GreedyAnglePrune, DuplicatesAndAntipodesCollapse) {
  CandidateDirection a, b;
  a.u = vec({0.6, 0.8});
  a.mass = 2;
  b.u = vec({0.6, 0.8});
  b.mass = 1;
  EXPECT_EQ(greedy_angle_prune({a, b}, 0.2).size(), 1u);
  b.u = -a.u;
  EXPECT_EQ(greedy_angle_prune({a, b}, 0.2).size(), 1u);
}

TEST(GreedyAnglePrune, SeparatedAndMaximal) {
  std::mt19937_64 g(12);
  std::vector<CandidateDirection> pts;
  for (int k = 0; k < 50; ++k) {
    CandidateDirection c;
    c.u = random_unit(3, g);
    c.mass = 50 - k;
    pts.push_back(c);
  }
  const double gamma = 0.4;
  const auto kept = greedy_angle_prune(pts, gamma / 2);
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j) EXPECT_GE(line_sine(kept[i].u, kept[j].u), gamma / 2);
  for (const auto& p : pts) {
    bool near = false;
    for (const auto& k : kept) near = near || line_sine(p.u, k.u) < gamma / 2;
    EXPECT_TRUE(near);
  }
}

TEST(CanonicalSign, LargestCoordinatePositive) {
  const auto u = canonical_sign(vec({0.3, -0.9, 0.2}));
  EXPECT_GT(u[1], 0.0);
  EXPECT_NEAR(u.norm(), std::sqrt(0.94), 1e-15);
}

TEST(SearchConfig, PaperFaithfulPresetRelations) {
  const auto c = SearchConfig::paper_faithful(8.0, 3, 2, 0.5, 1.0);
  EXPECT_NEAR(c.C2, 64.0 / 3, 1e-12);
  EXPECT_NEAR(c.C1, std::pow(64.0 / 3, 0.9), 1e-12);
  EXPECT_NO_THROW(c.validate(3));
  auto bad = c;
  bad.C1 = 5.0;
  EXPECT_THROW(bad.validate(3), ConfigError);
}

TEST(SearchConfig, JsonRoundTrip) {
  const auto c = tuned_d3();
  const auto b = search_config_from_json(Json::parse(dump_json(to_json(c))));
  EXPECT_EQ(b.C1, c.C1);
  EXPECT_EQ(b.grid_step, c.grid_step);
  EXPECT_EQ(b.selection, c.selection);
}

TEST(SearchRecurse, FullPrefixReturnsNormalizedPoint) {
  auto m = make_model(3, {});
  QuadratureMassOracle q(m, 4.0);
  SearchConfig c;
  std::vector<CandidateDirection> out;
  RecursionTrace tr;
  search_recurse({{3.0, 4.0, 0.0}}, q, c, Eigen::MatrixXd::Identity(3, 3), c.inner_grid(), out, tr);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR((out[0].u - vec({0.6, 0.8, 0.0})).norm(), 0.0, 1e-15);
  EXPECT_EQ(tr.calls, 0u);
}

TEST(SearchRecurse, ZeroFunctionFindsNothing) {
  auto m = make_model(3, {});
  QuadratureMassOracle q(m, 8.0);
  auto c = tuned_d3();
  c.ell = 8.0;
  std::vector<CandidateDirection> out;
  RecursionTrace tr;
  search_recurse({{0.5, 0.5}}, q, c, Eigen::MatrixXd::Identity(3, 3), c.inner_grid(), out, tr);
  EXPECT_TRUE(out.empty());
  EXPECT_FALSE(tr.active);
}

TEST(SearchRecurse, HeavyCellRecoversSingleFeature) {
  const Eigen::VectorXd v = vec({0.3, 0.4, std::sqrt(0.75)});
  auto m = make_model(3, {{1.0, v, Activation::sine(1.0)}});
  const double ell = 16.0;
  QuadratureMassOracle q(m, ell);
  SearchConfig c;
  c.ell = ell;
  c.C2 = ell * ell / 3;
  c.C1 = std::pow(c.C2, 0.9);
  c.tau = 2.0;
  c.t_step = 0.02;
  c.t_range = 2.0;
  c.separation = 0.3;
  c.selection = SelectionOrder::kMassDescending;
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(3, 3);
  // The cell nearest the projection of the heavy point 1 * v.
  const double a1 = std::round(v[0] / 0.02) * 0.02, a2 = std::round(v[1] / 0.02) * 0.02;
  std::vector<CandidateDirection> out;
  RecursionTrace tr;
  search_recurse({{a1, a2}}, q, c, B, c.inner_grid(), out, tr);
  ASSERT_FALSE(out.empty());
  const double bound = 1.0 / std::pow(c.C1, 0.2);
  for (const auto& cand : out) EXPECT_LE(line_cost(B * cand.u, v), bound);
}

TEST(FindDirections, ZeroFunctionReturnsEmpty) {
  auto m = make_model(3, {});
  QuadratureMassOracle q(m, 16.0);
  auto c = tuned_d3();
  c.ell = 16.0;
  c.grid_step = 0.1;
  const auto r = find_directions(q, c, RngStream(1));
  EXPECT_TRUE(r.directions.empty());
  EXPECT_EQ(r.stats.active_cells, 0u);
}

TEST(FindDirections, TwoOrthogonalSineFeatures) {
  const Eigen::VectorXd v1 = vec({1, 1, 0}) / std::sqrt(2.0), v2 = vec({0, 0, 1});
  auto m = make_model(3, {{0.9, v1, Activation::sine(1.0)}, {-0.7, v2, Activation::sine(1.0)}}, 1.0, 1.0);
  QuadratureMassOracle q(m, 64.0);
  SearchOptions o;
  o.truth = std::vector<Eigen::VectorXd>{v1, v2};
  const auto r = find_directions(q, tuned_d3(), RngStream(2), o);
  ASSERT_EQ(r.directions.size(), 2u);
  for (const auto& v : {v1, v2}) {
    double best = 9;
    for (const auto& d : r.directions) best = std::min(best, line_cost(d.u, v));
    EXPECT_LE(best, 0.05);
  }
  for (const auto& d : r.directions) {
    EXPECT_NEAR(d.u.norm(), 1.0, 1e-12);
    EXPECT_EQ(canonical_sign(d.u), d.u);
  }
  // Every cell is probed at most d - 1 times per branch along the inner grid.
  EXPECT_GT(r.stats.oracle_calls, 0u);
}

TEST(FindDirections, IndependentOfThreadCount) {
  const Eigen::VectorXd v1 = vec({0.6, 0.8, 0}), v2 = vec({0, 0.6, 0.8});
  auto m = make_model(3, {{0.9, v1, Activation::sine(1.0)}, {-0.7, v2, Activation::tanh_like(0.6)}}, 1.0, 0.5);
  auto c = tuned_d3();
  c.grid_step = 0.04;
  QuadratureMassOracle q1(m, 64.0), q8(m, 64.0);
  SearchOptions o1, o8;
  o8.threads = 8;
  const auto a = find_directions(q1, c, RngStream(3), o1);
  const auto b = find_directions(q8, c, RngStream(3), o8);
  ASSERT_EQ(a.directions.size(), b.directions.size());
  for (std::size_t i = 0; i < a.directions.size(); ++i) EXPECT_EQ(a.directions[i].u, b.directions[i].u);
  EXPECT_EQ(a.stats.oracle_calls, b.stats.oracle_calls);
}
