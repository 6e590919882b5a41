#pragma once

#include <Eigen/Dense>

#include <array>
#include <utility>
#include <vector>

#include "treeci/tree_model.hpp"

namespace treeci {

/*
 * The 3-node normal form of a grafted pair: one shared edge of weight w1
 * between the old and new attachment points, and the relocated edge of
 * weight w2 hanging off one end or the other.
 *
 * Construction canonicalizes w2 to |w2|; the Chernoff information of the
 * pair depends on w2 only through w2^2, and the normalization keeps
 * lambda_max >= 1.
 */
class CanonicalPair {
 public:
  CanonicalPair(double w1, double w2);

  double w1() const { return w1_; }
  double w2() const { return w2_; }
  double beta() const { return w2_ * w2_ + 2.0 * (1.0 - w2_ * w2_) / (1.0 - w1_); }

 private:
  double w1_, w2_;
};

// The canonical trees for raw (w1, w2), no sign normalization:
//   G1' = {(1,2,w1), (1,3,w2)},  G2' = {(1,2,w1), (2,3,w2)}.
std::pair<GaussianTree, GaussianTree> canonical_trees(double w1, double w2);

// Largest generalized eigenvalue of the canonical covariances:
//   lambda_max = (sqrt(beta) + w2) / (sqrt(beta) - w2),  always >= 1.
double lambda_max(const CanonicalPair& cp);

// Full-observation Chernoff information, ln((lambda_max + 1)/(2 sqrt(lambda_max))).
double ci_full_closed(const CanonicalPair& cp);

// Same quantity in the (w1, w2) parametrization:
//   1/2 ln(1 + 1/2 * w2^2/(1-w2^2) * (1-w1)).
double ci_full_weight_form(const CanonicalPair& cp);

// Eigenvalues of S2^-1 S1 for 3x3 covariances sharing a determinant; the
// known root 1 is deflated from the characteristic cubic and the remaining
// quadratic solved. Returned ascending: {1/lambda, 1, lambda}.
std::array<double, 3> generalized_eigs(const Eigen::MatrixXd& sigma1,
                                       const Eigen::MatrixXd& sigma2);

// True when node i is a common leaf (same neighbor, same weight) or a common
// degree-2 node (same neighbor pair, same weights) of both trees.
bool has_identical_local_structure(const GaussianTree& t1, const GaussianTree& t2,
                                   int node);

// Remove a leaf that both trees attach identically; node ids above `leaf`
// shift down by one.
std::pair<GaussianTree, GaussianTree> prune_common_leaf(const GaussianTree& t1,
                                                        const GaussianTree& t2,
                                                        int leaf);

// Splice out a degree-2 node both trees share: neighbors p, q gain the edge
// (p, q) with weight w_ip * w_iq.
std::pair<GaussianTree, GaussianTree> contract_common_degree2(const GaussianTree& t1,
                                                              const GaussianTree& t2,
                                                              int node);

struct ReductionStep {
  enum class Kind { PruneLeaf, ContractDegree2 };
  Kind kind;
  int node;  // id at the time the step was applied
};

// Apply prune steps to fixpoint, then contractions, repeating until nothing
// applies; smallest eligible node first, so the result is deterministic.
// For a pair one non-trivial graft apart this terminates at the 3-node form.
std::pair<GaussianTree, GaussianTree> reduce_common_structure(
    const GaussianTree& t1, const GaussianTree& t2,
    std::vector<ReductionStep>* steps = nullptr);

// Canonical parameters of a grafted pair: w2 from the relocated edge, w1
// from the tree1 path between the two attachment points. Trivial grafts
// (attach_k == cut_i) have no 3-node form and are rejected.
CanonicalPair reduce_pair(const GraftedPair& pair);

}  // namespace treeci
