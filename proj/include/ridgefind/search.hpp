#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ridgefind/estimators.hpp"
#include "ridgefind/json_io.hpp"
#include "ridgefind/rng.hpp"

namespace ridgefind {

enum class SelectionOrder {
  kLeftToRight,     // scan c ascending, keep when separated from the last kept value
  kMassDescending,  // scan by |W_c| descending, keep when separated from every kept value
};

std::string to_string(SelectionOrder order);
SelectionOrder selection_order_from_string(const std::string& name);

struct SearchConfig {
  std::string preset = "tuned";
  double ell = 64.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double tau = 1.0;
  double heavy_multiplier = 5.0;
  // Outer grid over (alpha1, alpha2): squared radius in [radius2_min, radius2_max].
  double radius2_min = 0.0;
  double radius2_max = 1.0;
  double grid_step = 0.1;
  // Inner grid: multiples of t_step in [-t_range, t_range].
  double t_step = 0.1;
  double t_range = 1.0;
  double separation = 0.1;
  double prune_sine = 0.25;  // gamma / 2
  double theta = 0.0;        // separating-basis target gamma / (10 n)^3
  SelectionOrder selection = SelectionOrder::kLeftToRight;

  // C2 = ell^2 / d, C1 = C2^0.9, annulus [C1^-0.6, ell^4], steps 1/(10 sqrt C2)
  // and 1/sqrt(10 C2), range ell^2, separation 1/sqrt(10 d C1).
  static SearchConfig paper_faithful(double ell, std::size_t d, std::size_t n, double gamma, double tau);

  void validate(std::size_t d) const;
  double threshold() const { return heavy_multiplier * tau; }
  std::vector<double> inner_grid() const;
};

Json to_json(const SearchConfig& c);
SearchConfig search_config_from_json(const Json& j);

struct CandidateDirection {
  Eigen::VectorXd u;
  std::vector<double> prefix;  // alpha_1 .. alpha_d
  std::size_t cell = 0;
  double mass = 0.0;
};

// Haar-distributed orthonormal basis (columns) from QR of a Gaussian matrix.
Eigen::MatrixXd sample_orthonormal_basis(std::size_t d, const RngStream& rng);

// Both the projection condition and the absolute-determinant condition at theta.
bool is_separating(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2, const std::vector<Eigen::VectorXd>& dirs,
                   double theta);

// values sorted by c ascending; returns the kept c values in ascending order.
std::vector<double> select_separated_subset(const std::vector<std::pair<double, double>>& values, double threshold,
                                            double separation, SelectionOrder order = SelectionOrder::kLeftToRight);

// Flips u so that its first largest-magnitude coordinate is positive.
Eigen::VectorXd canonical_sign(Eigen::VectorXd u);

// |sin| of the angle between the lines through u and v.
double line_sine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Input must be sorted by mass descending; keeps a point when its line sine to
// every kept point is at least min_sine.
std::vector<CandidateDirection> greedy_angle_prune(const std::vector<CandidateDirection>& points, double min_sine);

struct SearchStats {
  std::size_t cells = 0;
  std::size_t active_cells = 0;  // cells with a non-empty heavy set at some level
  std::uint64_t oracle_calls = 0;
  // branch_histogram[k][s]: number of times coordinate k (1-based) was chosen
  // with |S| = s; only coordinates >= 3 are populated.
  std::vector<std::vector<std::uint64_t>> branch_histogram;
  std::size_t max_branch_at_3_plus = 0;
  int basis_attempts = 0;
  std::optional<bool> basis_separating;
  std::size_t raw_candidates = 0;
};

Json to_json(const SearchStats& s);

struct SearchState {
  std::vector<double> prefix;
};

// Algorithm body for one prefix; appends candidates and per-level branch sizes.
struct RecursionTrace {
  std::vector<std::vector<double>> kept;  // kept c values per visited node, depth-first
  std::vector<int> levels;                // coordinate index chosen at each visited node
  std::uint64_t calls = 0;
  bool active = false;
};

void search_recurse(const SearchState& state, MassOracle& oracle, const SearchConfig& cfg, const Eigen::MatrixXd& basis,
                    const std::vector<double>& inner, std::vector<CandidateDirection>& out, RecursionTrace& trace);

struct SearchOptions {
  int threads = 1;
  std::optional<std::vector<Eigen::VectorXd>> truth;  // test mode: enables basis retries
  int max_basis_retries = 10;
  std::string trace_path;  // empty disables the per-cell trace
  bool trace_all_cells = false;
  std::optional<Eigen::MatrixXd> basis;  // fixed basis overrides sampling
};

struct SearchResult {
  std::vector<CandidateDirection> directions;  // pruned, canonical sign
  Eigen::MatrixXd basis;
  SearchStats stats;
};

SearchResult find_directions(MassOracle& oracle, const SearchConfig& cfg, const RngStream& rng,
                             const SearchOptions& opt = {});

}  // namespace ridgefind
