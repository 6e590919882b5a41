#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "treeci/reduction.hpp"
#include "treeci/tree_model.hpp"

namespace treeci {

// A 1-dimensional observation y = alpha' x. `ratio` is the achieved variance
// ratio folded to [1, inf); `ci` the resulting scalar Chernoff information.
// alpha is scaled so its largest-magnitude coordinate is 1.
struct LtSolution {
  Eigen::VectorXd alpha;
  double ratio = 1.0;
  double ci = 0.0;
};

// alpha' S1 alpha / alpha' S2 alpha.
double rayleigh_ratio(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                      const Eigen::VectorXd& alpha);

// All generalized eigenvalues of (S1, S2), ascending; computed by factoring
// S2, whitening S1 by congruence, and running a symmetric eigensolver.
Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& sigma1,
                                        const Eigen::MatrixXd& sigma2);

// Closed-form optimum for the canonical 3-node pair:
//   alpha = [s1, s2, 1] with s1,2 = -(w2 +- sqrt(beta))/2, ratio lambda_max.
LtSolution optimal_alpha_canonical(const CanonicalPair& cp);

// Maximizes the generalized Rayleigh quotient over alpha != 0; the optimum
// is the extreme generalized eigenvalue (folded under x <-> 1/x).
LtSolution optimize_alpha_numeric(const Eigen::MatrixXd& sigma1,
                                  const Eigen::MatrixXd& sigma2);

struct ZeroCoordinateReport {
  int node = 0;
  double unconstrained_ci = 0.0;
  double constrained_ci = 0.0;   // best ci with alpha_node forced to 0
  double gap = 0.0;              // unconstrained - constrained
};

// For a node with identical local structure in both trees, the constrained
// optimum (alpha_node = 0) matches the unconstrained one; the report carries
// both values. Throws if the node's local structure differs.
ZeroCoordinateReport verify_zero_coordinate(const GaussianTree& t1,
                                            const GaussianTree& t2, int node);

struct DimensionMonotonicityReport {
  int q = 0, p = 0;
  int trials = 0;
  double best_q_ci = 0.0;
  double best_p_ci = 0.0;
  bool holds = false;  // best_q_ci <= best_p_ci + 1e-10
};

// Empirical data-processing check: the best Chernoff information over q-row
// observation maps never beats the best over p-row maps extending them
// (q <= p <= N; p == q compares a map with itself). q = 1 uses the exact
// scalar optimum; p = N the full CI.
DimensionMonotonicityReport dimension_monotonicity_check(
    const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, int p, int q,
    int trials, std::uint64_t seed);

}  // namespace treeci
