#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "ridgefind/error.hpp"
#include "ridgefind/model.hpp"
#include "ridgefind/search.hpp"

namespace ridgefind::testing {

// Query access to an arbitrary function; lets tests use targets that are not
// sums of normalized features (for example a constant).
class FunctionAccess final : public QueryAccess {
 public:
  FunctionAccess(std::size_t dim, std::function<double(const double*)> fn, double eps = 0.0)
      : dim_(dim), fn_(std::move(fn)), eps_(eps) {}
  std::size_t dim() const override { return dim_; }
  double eps() const override { return eps_; }
  double query_raw(const double* x) override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return fn_(x);
  }
  std::uint64_t query_count() const override { return count_.load(); }

 private:
  std::size_t dim_;
  std::function<double(const double*)> fn_;
  double eps_;
  std::atomic<std::uint64_t> count_{0};
};

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline Eigen::VectorXd random_unit(std::size_t d, std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(g);
  return v / v.norm();
}

inline Eigen::VectorXd random_in_ball(std::size_t d, double R, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return random_unit(d, g) * R * std::pow(u(g), 1.0 / static_cast<double>(d));
}

// Directions with pairwise line sine >= gamma, drawn by rejection.
inline std::vector<Eigen::VectorXd> separated_directions(std::size_t d, std::size_t n, double gamma,
                                                         std::mt19937_64& g) {
  std::vector<Eigen::VectorXd> dirs;
  while (dirs.size() < n) {
    Eigen::VectorXd v = random_unit(d, g);
    bool ok = true;
    for (const auto& w : dirs) ok = ok && line_sine(v, w) >= gamma;
    if (ok) dirs.push_back(v);
  }
  return dirs;
}

inline std::shared_ptr<const SumOfFeaturesModel> make_model(std::size_t d, std::vector<Feature> feats,
                                                            double L = 1.0, double gamma = 0.1) {
  return std::make_shared<const SumOfFeaturesModel>(d, std::move(feats), L, gamma);
}

}  // namespace ridgefind::testing
