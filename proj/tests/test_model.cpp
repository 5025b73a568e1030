#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ridgefind/json_io.hpp"
#include "ridgefind/model.hpp"
#include "test_util.hpp"

using namespace ridgefind;
using namespace ridgefind::testing;

namespace {

std::vector<Activation> builtins() {
  std::vector<double> table;
  for (int k = 0; k <= 4000; ++k) table.push_back(std::sin(-2.0 + k * 1e-3) * 0.5);
  return {Activation::sine(1.3),
          Activation::cosine_bump(0.7),
          Activation::tanh_like(0.8),
          Activation::hinge(0.2),
          Activation::piecewise_linear({-1.0, 0.0, 0.5, 2.0}, {0.3, -0.2, 0.4, 0.1}),
          Activation::gaussian_bump(1.5, 0.2),
          Activation::absolute(0.1),
          Activation::tabulated(-2.0, 1e-3, table)};
}

}  // namespace

TEST(Activation, ZeroAtOriginForEveryBuiltin) {
  for (const auto& a : builtins()) EXPECT_EQ(a(0.0), 0.0) << to_string(a.kind());
}

TEST(Activation, SampledDifferencesRespectDeclaredLipschitz) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const auto& a : builtins()) {
    for (int k = 0; k < 1000; ++k) {
      const double x = u(g), y = u(g);
      EXPECT_LE(std::abs(a(x) - a(y)), a.lipschitz() * std::abs(x - y) * (1 + 1e-6) + 1e-15) << to_string(a.kind());
    }
  }
}

TEST(Activation, JsonRoundTripIsExact) {
  for (const auto& a : builtins()) {
    const auto b = activation_from_json(Json::parse(dump_json(activation_to_json(a))));
    for (double x : {-1.7, -0.3, 0.0, 0.41, 1.9}) EXPECT_EQ(a(x), b(x));
  }
}

TEST(EvaluateModel, EmptyModelIsZero) {
  SumOfFeaturesModel m(3, {}, 1.0, 1.0);
  EXPECT_EQ(m.evaluate(vec({0.3, -2.0, 5.0})), 0.0);
}

TEST(EvaluateModel, SingleSineFeatureIgnoresOrthogonalCoordinate) {
  SumOfFeaturesModel m(2, {{1.0, vec({1, 0}), Activation::sine(1.0)}}, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(m.evaluate(vec({std::numbers::pi / 2, 7.0})), 1.0);
}

TEST(EvaluateModel, TwoFeaturesMatchDirectSummation) {
  const auto th = Activation::tanh_like(1.0);
  SumOfFeaturesModel m(3, {{0.5, vec({1, 0, 0}), Activation::sine(1.0)}, {-0.5, vec({0, 1, 0}), th}}, 1.0, 1.0);
  const double expected = 0.5 * std::sin(1.0) - 0.5 * th(1.0);
  EXPECT_NEAR(m.evaluate(vec({1, 1, 0})), expected, 1e-15);
  EXPECT_NEAR(expected, 0.5 * std::sin(1.0) - 0.5 * std::tanh(1.0), 1e-15);
}

TEST(EvaluateModel, DimensionMismatchIsInputError) {
  SumOfFeaturesModel m(2, {{1.0, vec({1, 0}), Activation::sine(1.0)}}, 1.0, 1.0);
  EXPECT_THROW(m.evaluate(vec({1, 2, 3})), InputError);
}

TEST(EvaluateModel, LinearInCoefficients) {
  std::mt19937_64 g(5);
  auto dirs = separated_directions(3, 3, 0.3, g);
  std::vector<Feature> fs{{0.2, dirs[0], Activation::sine(1.0)},
                          {-0.4, dirs[1], Activation::tanh_like(0.6)},
                          {0.7, dirs[2], Activation::gaussian_bump(1.0)}};
  SumOfFeaturesModel m(3, fs, 1.0, 0.3);
  const std::vector<double> a{0.2, -0.4, 0.7}, b{-0.5, 0.1, 0.25};
  std::vector<double> ab(3);
  for (int i = 0; i < 3; ++i) ab[i] = a[i] + b[i];
  for (int k = 0; k < 20; ++k) {
    const auto x = random_in_ball(3, 2.0, g);
    const double lhs = m.with_coefficients(ab).evaluate(x);
    const double rhs = m.with_coefficients(a).evaluate(x) + m.with_coefficients(b).evaluate(x);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(EvaluateModel, DirectionsAreUnit) {
  SumOfFeaturesModel m(3, {{1.0, vec({3, 4, 12}), Activation::sine(1.0)}}, 1.0, 1.0);
  EXPECT_NEAR(m.features()[0].direction.norm(), 1.0, 1e-12);
}

TEST(QueryOracle, NoiseFreeEqualsModel) {
  auto m = make_model(2, {{0.8, vec({0.6, 0.8}), Activation::sine(1.0)}});
  QueryOracle q(m, {});
  std::mt19937_64 g(1);
  for (int k = 0; k < 100; ++k) {
    const auto x = random_in_ball(2, 3.0, g);
    EXPECT_EQ(q.query(x), m->evaluate(x));
  }
  EXPECT_EQ(q.query_count(), 100u);
}

TEST(QueryOracle, DeterministicNoiseIsRepeatable) {
  auto m = make_model(2, {{0.8, vec({0.6, 0.8}), Activation::sine(1.0)}});
  for (auto kind : {NoiseKind::kDeterministicBounded, NoiseKind::kUniformBounded}) {
    QueryOracle q1(m, {kind, 1e-6, 42}), q2(m, {kind, 1e-6, 42});
    const auto x = vec({0.123, -0.456});
    const double first = q1.query(x);
    for (int k = 0; k < 10000; ++k) ASSERT_EQ(q1.query(x), first);
    EXPECT_EQ(q2.query(x), first);
  }
}

TEST(QueryOracle, NoiseStaysWithinEps) {
  auto m = make_model(3, {{0.8, vec({0.6, 0.8, 0}), Activation::sine(1.0)}});
  std::mt19937_64 g(9);
  for (auto kind : {NoiseKind::kDeterministicBounded, NoiseKind::kUniformBounded}) {
    const double eps = 1e-3;
    QueryOracle q(m, {kind, eps, 7});
    double worst = 0.0, spread = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const auto x = random_in_ball(3, 2.0, g);
      const double e = q.query(x) - m->evaluate(x);
      worst = std::max(worst, std::abs(e));
      spread = std::max(spread, e);
    }
    EXPECT_LE(worst, eps * (1 + 1e-9));
    EXPECT_GT(spread, 0.5 * eps);  // the perturbation is actually exercised
  }
}

TEST(QueryOracle, DifferentSeedsGiveDifferentNoise) {
  auto m = make_model(1, {{0.5, vec({1}), Activation::sine(1.0)}});
  QueryOracle a(m, {NoiseKind::kUniformBounded, 0.1, 1}), b(m, {NoiseKind::kUniformBounded, 0.1, 2});
  int differ = 0;
  for (int k = 0; k < 20; ++k) differ += a.query(vec({0.1 * k})) != b.query(vec({0.1 * k}));
  EXPECT_GT(differ, 15);
}

TEST(QueryOracle, DimensionMismatchIsInputError) {
  auto m = make_model(2, {{1.0, vec({1, 0}), Activation::sine(1.0)}});
  QueryOracle q(m, {});
  EXPECT_THROW(q.query(vec({1.0})), InputError);
}

TEST(ValidateAssumptions, FlagsLargeCoefficient) {
  SumOfFeaturesModel m(2, {{1.5, vec({1, 0}), Activation::sine(1.0)}}, 1.0, 0.5);
  const auto r = validate_assumptions(m);
  EXPECT_FALSE(r.coefficients_ok);
  EXPECT_FALSE(r.ok());
}

TEST(ValidateAssumptions, FlagsIdenticalDirections) {
  SumOfFeaturesModel m(2, {{0.5, vec({1, 0}), Activation::sine(1.0)}, {0.5, vec({1, 0}), Activation::sine(1.0)}}, 1.0,
                       0.5);
  const auto r = validate_assumptions(m);
  EXPECT_FALSE(r.separation_ok);
  EXPECT_NEAR(r.min_pairwise_sine, 0.0, 1e-12);
}

TEST(ValidateAssumptions, MeasuredGammaEqualsBruteForce) {
  std::mt19937_64 g(11);
  std::vector<Feature> fs;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < 5; ++i) {
    dirs.push_back(random_unit(3, g));
    fs.push_back({0.5, dirs.back(), Activation::sine(1.0)});
  }
  double brute = 1.0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      const double c = std::abs(dirs[i].dot(dirs[j]));
      brute = std::min(brute, std::sqrt(std::max(0.0, 1 - c * c)));
    }
  SumOfFeaturesModel m(3, fs, 1.0, 0.0);
  EXPECT_NEAR(validate_assumptions(m).min_pairwise_sine, brute, 1e-12);
}

TEST(ValidateAssumptions, AcceptsWellFormedInstance) {
  SumOfFeaturesModel m(2, {{0.5, vec({1, 0}), Activation::sine(1.0)}, {-0.5, vec({0, 1}), Activation::tanh_like(1.0)}},
                       1.0, 0.9);
  ValidationOptions opt;
  opt.check_bounded = true;
  const auto r = validate_assumptions(m, opt);
  EXPECT_TRUE(r.ok());
  ASSERT_TRUE(r.bounded_ok.has_value());
  EXPECT_TRUE(*r.bounded_ok);
}

TEST(GaussianReweight, OriginAndAnalyticValues) {
  auto f = [](const Eigen::VectorXd& x) { return 2.0 + x.sum(); };
  EXPECT_EQ(gaussian_reweight_eval(f, 3.0, vec({0, 0})), 2.0);
  auto one = [](const Eigen::VectorXd&) { return 1.0; };
  EXPECT_NEAR(gaussian_reweight_eval(one, 1.0, vec({1, 1})), std::exp(-1.0), 1e-15);
}

TEST(GaussianReweight, FactorsIndependently) {
  SumOfFeaturesModel m(2, {{0.5, vec({1, 0}), Activation::sine(1.0)}, {-0.3, vec({0, 1}), Activation::tanh_like(1.0)}},
                       1.0, 0.9);
  std::mt19937_64 g(2);
  for (int k = 0; k < 10; ++k) {
    const auto x = random_in_ball(2, 3.0, g);
    const double expected = m.evaluate(x) * std::exp(-x.squaredNorm() / (2 * 2.5 * 2.5));
    EXPECT_NEAR(gaussian_reweight_eval([&](const Eigen::VectorXd& y) { return m.evaluate(y); }, 2.5, x), expected,
                1e-15);
  }
}

TEST(InstanceJson, RoundTripIsBitExact) {
  std::mt19937_64 g(4);
  auto dirs = separated_directions(3, 3, 0.5, g);
  SumOfFeaturesModel m(3,
                       {{0.123456789012345678, dirs[0], Activation::sine(1.1)},
                        {-0.9, dirs[1], Activation::gaussian_bump(1.5)},
                        {1.0 / 3.0, dirs[2], Activation::tanh_like(0.6)}},
                       1.0, 0.5);
  const NoiseSpec noise{NoiseKind::kUniformBounded, 1e-6, 99};
  const auto back = instance_from_json(Json::parse(dump_json(instance_to_json(m, noise))));
  ASSERT_EQ(back.model.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.model.features()[i].coeff, m.features()[i].coeff);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(back.model.features()[i].direction[k], m.features()[i].direction[k]);
  }
  EXPECT_EQ(back.noise.seed, 99u);
  EXPECT_EQ(back.noise.eps, 1e-6);
  const auto x = vec({0.3, -0.2, 0.7});
  EXPECT_EQ(back.model.evaluate(x), m.evaluate(x));
}
