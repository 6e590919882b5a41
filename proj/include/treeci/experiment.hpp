#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "treeci/reduction.hpp"

namespace treeci {

// How samples are observed in the simulated test: the whole vector, or a
// single linear functional alpha' x.
struct ObservationMode {
  enum class Kind { Full, Lt };
  Kind kind = Kind::Full;
  Eigen::VectorXd alpha;  // used when kind == Lt

  static ObservationMode full() { return {Kind::Full, {}}; }
  static ObservationMode lt(Eigen::VectorXd a) {
    return {Kind::Lt, std::move(a)};
  }
};

struct ExponentEstimate {
  std::vector<int> sample_lengths;
  std::vector<long long> error_counts;
  std::vector<double> error_rates;
  double slope = 0.0;          // least-squares fit of -ln P_e vs T, clamped at 0
  double slope_se = 0.0;       // regression standard error of the slope
  double ci_reference = 0.0;   // the Chernoff information the slope estimates
  long long trials = 0;
  std::uint64_t seed = 0;
  bool lower_bound_only = false;  // no errors observed at the largest T
};

/*
 * Estimates the error exponent of binary hypothesis testing between
 * N(0, sigma1) and N(0, sigma2) with equal priors and the exact ML rule.
 * Each T in t_grid gets `trials` independent length-T trials, half per
 * hypothesis; per-trial RNG streams derive deterministically from
 * (seed, T, trial), so results are reproducible and thread-count independent.
 * The slope fit skips T values with fewer than 10 observed errors.
 */
ExponentEstimate simulate_exponent(const Eigen::MatrixXd& sigma1,
                                   const Eigen::MatrixXd& sigma2,
                                   const ObservationMode& mode,
                                   const std::vector<int>& t_grid,
                                   long long trials, std::uint64_t seed);

// Error exponent per scalar measurement: full observation of a 3-node pair
// spends 3 measurements per slot, the LT observation 1.
struct NormalizedCi {
  double ci1 = 0.0;              // best 1-dim LT Chernoff information
  double ci2 = 0.0;              // full-observation Chernoff information
  double ci1_hat = 0.0;          // = ci1
  double ci2_hat = 0.0;          // = ci2 / 3
  double ratio = 0.0;            // ci2 / ci1, in [1, 2]
  double normalized_ratio = 0.0; // ratio / 3, in [1/3, 2/3]
};

NormalizedCi normalized_ci(const CanonicalPair& cp);

struct SurfaceRow {
  double w1 = 0.0, w2 = 0.0;
  double ci1 = 0.0, ci2 = 0.0, ratio = 0.0, lambda_max = 0.0;
  bool valid = false;  // false: grid point outside the weight domain
};

// One row per (w1, w2) grid point; out-of-domain points come back with
// valid = false so writers can emit a warning row instead of data.
std::vector<SurfaceRow> ratio_surface(const std::vector<double>& w1_grid,
                                      const std::vector<double>& w2_grid);

struct GInequalityReport {
  std::size_t points = 0;
  std::size_t violations = 0;  // 2 g(x) < ln((x+1)/(2 sqrt(x))) - 1e-12
  double min_gap = 0.0;
  double min_gap_x = 0.0;
};

// Checks 2 g(x) >= ln((x+1)/(2 sqrt(x))) pointwise; every x must be > 1.
GInequalityReport g_inequality_check(const std::vector<double>& x_grid);

}  // namespace treeci
