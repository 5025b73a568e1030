#include <gtest/gtest.h>

#include <cmath>

#include "ridgefind/recovery.hpp"
#include "test_util.hpp"

using namespace ridgefind;
using namespace ridgefind::testing;

namespace {

RecoveryConfig tuned() {
  RecoveryConfig c;
  c.ell = 16.0;
  c.delta = 1.0 / 64;
  c.R = 1.0;
  return c;
}

double max_error(const RecoveredRidge& r, const std::function<double(double)>& target, double R) {
  double e = 0.0;
  for (int k = -200; k <= 200; ++k) {
    const double z = R * k / 200.0;
    e = std::max(e, std::abs(r(z) - target(z)));
  }
  return e;
}

}  // namespace

TEST(RecoveryConfig, BandDefaults) {
  const auto c = tuned();
  EXPECT_NEAR(c.band_low(), std::pow(16.0, -0.9), 1e-15);
  EXPECT_NEAR(c.band_high(), std::pow(64.0, 0.1), 1e-12);
  auto bad = c;
  bad.delta = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(RecoverRidge, SineFeatureWithExactDirection) {
  const Eigen::VectorXd v = vec({0.48, 0.6, 0.64});
  auto m = make_model(3, {{1.0, v, Activation::sine(1.0)}});
  QuadratureValueOracle q(m, 16.0);
  const auto r = recover_ridge(q, v, tuned());
  EXPECT_LE(max_error(r, [](double z) { return std::sin(z); }, 1.0), 0.05);
  EXPECT_EQ(r(0.0), 0.0);
}

TEST(RecoverRidge, NegatedDirectionMirrorsRidge) {
  const Eigen::VectorXd v = vec({0.0, 0.6, 0.8});
  auto m = make_model(3, {{0.7, v, Activation::tanh_like(1.0)}});
  QuadratureValueOracle q(m, 16.0);
  const auto r = recover_ridge(q, v, tuned());
  const auto s = recover_ridge(q, -v, tuned());
  for (double z : {-0.9, -0.3, 0.2, 0.75}) EXPECT_NEAR(r(z), s(-z), 1e-9);
}

TEST(RecoverRidge, ZeroFunctionGivesZeroRidge) {
  auto m = make_model(2, {});
  QuadratureValueOracle q(m, 16.0);
  const auto r = recover_ridge(q, vec({1, 0}), tuned());
  EXPECT_EQ(max_error(r, [](double) { return 0.0; }, 1.0), 0.0);
}

TEST(RecoverRidge, RejectsBadInputs) {
  auto m = make_model(2, {});
  QuadratureValueOracle q(m, 16.0);
  EXPECT_THROW(recover_ridge(q, vec({1, 1}), tuned()), InputError);
  EXPECT_THROW(recover_ridge(q, vec({1, 0, 0}), tuned()), InputError);
  auto c = tuned();
  c.ell = 8.0;
  EXPECT_THROW(recover_ridge(q, vec({1, 0}), c), ConfigError);
}

TEST(RecoveredRidge, TableNodesEqualAnalyticValues) {
  const Eigen::VectorXd v = vec({1, 0});
  auto m = make_model(2, {{1.0, v, Activation::sine(1.0)}});
  QuadratureValueOracle q(m, 16.0);
  const auto r = recover_ridge(q, v, tuned());
  ASSERT_EQ(r.table().size(), 129u);
  for (std::size_t k = 0; k < r.table().size(); k += 16)
    EXPECT_EQ(r.table()[k], r(-1.0 + static_cast<double>(k) * r.mesh()));
  EXPECT_THROW(r(1.5), InputError);
  EXPECT_LE(std::abs(r.imaginary(0.5)), 1e-9);
}

TEST(RecoveredRidge, TabulatedInterpolatesLinearly) {
  const auto r = RecoveredRidge::tabulated(vec({1.0}), 1.0, 0.5, {-1, -0.5, 0, 2, 4});
  EXPECT_DOUBLE_EQ(r(0.25), 1.0);
  EXPECT_DOUBLE_EQ(r(1.0), 4.0);
  EXPECT_THROW(RecoveredRidge::tabulated(vec({1.0}), 1.0, 0.5, {0, 0}), InputError);
}

TEST(AssembledModel, EmptyIsZeroAndSumsRidges) {
  const auto empty = assemble_model(2, {});
  EXPECT_EQ(empty(vec({0.3, 0.2})), 0.0);
  const auto r1 = RecoveredRidge::tabulated(vec({1, 0}), 1.0, 1.0, {-1, 0, 1});
  const auto r2 = RecoveredRidge::tabulated(vec({0, 1}), 1.0, 1.0, {2, 0, 2});
  const auto m = assemble_model(2, {r1, r2});
  EXPECT_DOUBLE_EQ(m(vec({0.5, -0.5})), 0.5 + 1.0);
  EXPECT_THROW(m(vec({0.5})), InputError);
  EXPECT_THROW(assemble_model(3, {r1}), InputError);
}

TEST(AssembledModel, JsonRoundTripIsExact) {
  const Eigen::VectorXd v = vec({0.6, 0.8});
  auto fm = make_model(2, {{0.9, v, Activation::gaussian_bump(1.5, 0.0)}});
  QuadratureValueOracle q(fm, 16.0);
  const auto m = assemble_model(2, {recover_ridge(q, v, tuned())});
  const auto back = assembled_model_from_json(Json::parse(dump_json(to_json(m))));
  for (const auto& x : {vec({0.1, 0.2}), vec({-0.5, 0.3}), vec({0.0, -0.7})}) EXPECT_EQ(back(x), m(x));
}

TEST(TruncatedInversion, WideBandRecoversSine) {
  const double ell = 4.0;
  for (double x : {-2.0, -0.7, 0.0, 1.1, 2.0})
    EXPECT_NEAR(truncated_inversion_reference(Activation::sine(1.0), ell, 40 * ell, x), std::sin(x), 1e-6);
}

TEST(TruncatedInversion, ZeroActivationIsZero) {
  EXPECT_EQ(truncated_inversion_reference(Activation(), 4.0, 40.0, 0.5), 0.0);
}
