#pragma once

#include <Eigen/Dense>

#include <vector>

#include "treeci/errors.hpp"

namespace treeci {

// Result of the exponential-family equalization: lambda_star is the mixing
// point where the two KL divergences from sigma_lambda cross; value is that
// common divergence (the Chernoff information).
struct ChernoffResult {
  double lambda_star = 0.5;
  double value = 0.0;
  double kl_to_1 = 0.0;
  double kl_to_2 = 0.0;
};

class DiscretePmf {
 public:
  explicit DiscretePmf(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[static_cast<size_t>(i)]; }

 private:
  std::vector<double> probs_;
};

// KL divergence between zero-mean Gaussians:
//   D(S1 || S2) = 1/2 ln(|S2|/|S1|) + 1/2 tr(S2^-1 S1) - N/2.
double kl(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2);

// Covariance whose precision is lambda*S1^-1 + (1-lambda)*S2^-1.
Eigen::MatrixXd sigma_lambda(const Eigen::MatrixXd& sigma1,
                             const Eigen::MatrixXd& sigma2, double lambda);

/*
 * Chernoff information between N(0, S1) and N(0, S2), located by bisection
 * on h(lambda) = D(S_lambda || S1) - D(S_lambda || S2), which is positive at
 * lambda = 0 and negative at lambda = 1 for distinct inputs. Equal inputs
 * return value 0 with lambda_star 0.5.
 */
ChernoffResult chernoff(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2);

// Chernoff information between zero-mean scalar Gaussians with variance
// ratio x:  g(x) = 1/2 { ln((x-1)/(e ln x)) + ln(x)/(x-1) }.
// Symmetric under x <-> 1/x, zero at x = 1.
double scalar_g(double x);

double scalar_chernoff(double var1, double var2);

// -min over lambda in [0,1] of ln sum p_i^lambda q_i^(1-lambda), evaluated on
// the common support; +infinity when the supports are disjoint.
double discrete_chernoff(const DiscretePmf& p, const DiscretePmf& q);

// Combine states i and j (0-based): their mass lands in min(i, j) and the
// support size drops by one.
DiscretePmf merge_states(const DiscretePmf& p, int i, int j);

// Joint marginal: covariance with row/column `node` (0-based) removed.
Eigen::MatrixXd drop_variable(const Eigen::MatrixXd& sigma, int node);

}  // namespace treeci
