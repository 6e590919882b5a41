#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treeci/errors.hpp"

namespace treeci {

struct WeightedEdge {
  int i = 0;
  int j = 0;
  double w = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/*
 * A Gaussian tree: nodes 1..n, unit variances, zero means, and one
 * correlation weight per edge with 0 < |w| < 1. Immutable after
 * construction; the constructor rejects anything that is not a spanning
 * tree with in-domain weights.
 */
class GaussianTree {
 public:
  GaussianTree(int node_count, std::vector<WeightedEdge> edges);

  int node_count() const { return n_; }

  // Edges normalized to i < j and sorted by (i, j).
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  // adjacency()[v] lists (neighbor, weight) pairs of node v (1-based; slot 0 unused).
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const {
    return adj_;
  }

  int degree(int v) const;
  bool has_edge(int i, int j) const;
  double edge_weight(int i, int j) const;  // throws ModelError if absent

  friend bool operator==(const GaussianTree& a, const GaussianTree& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

/*
 * Normalized tree covariance: symmetric, unit diagonal, positive definite,
 * every off-diagonal entry strictly inside (-1, 1). Construction verifies
 * all four properties.
 */
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd m);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Eigen::MatrixXd& mat() const { return mat_; }
  operator const Eigen::MatrixXd&() const { return mat_; }
  double operator()(int r, int c) const { return mat_(r, c); }

 private:
  Eigen::MatrixXd mat_;
};

// Two trees one edge-grafting operation apart: tree2 is tree1 with edge
// (cut_i, cut_j) removed and (attach_k, cut_j) added at the same weight.
// w2 is that weight; w1 is the path weight from cut_i to attach_k in tree1.
struct GraftedPair {
  GaussianTree tree1;
  GaussianTree tree2;
  int cut_i = 0;
  int cut_j = 0;
  int attach_k = 0;
  double w2 = 0.0;
  double w1 = 1.0;
};

// Covariance entries are products of edge weights along the connecting path.
CovarianceMatrix build_covariance(const GaussianTree& tree);

// prod over edges of (1 - w^2); factors are multiplied in sorted order so
// trees with equal weight multisets produce bit-identical determinants.
double tree_determinant(const GaussianTree& tree);

// Closed-form precision matrix of a normalized Gaussian tree: zero for
// non-adjacent pairs, -w/(1-w^2) on edges, 1 + sum w^2/(1-w^2) on the diagonal.
Eigen::MatrixXd tree_inverse(const GaussianTree& tree);

// Product of edge weights along the unique a-b path; 1 when a == b.
double path_weight(const GaussianTree& tree, int a, int b);

// Cut edge (i, j), reattach j (with its subtree) to k. k must lie in i's
// component after the cut; k == i yields tree2 == tree1.
GraftedPair graft(const GaussianTree& tree, int cut_i, int cut_j, int attach_k);

// Recognize two trees one graft apart: their weighted edge sets must differ
// by exactly one removed and one added edge, equal weight, sharing exactly
// one endpoint (the moved node). Identical trees are rejected as trivial.
GraftedPair detect_graft(const GaussianTree& tree1, const GaussianTree& tree2);

struct ParsedTree {
  GaussianTree tree;
  // original_labels[v-1] is the input label that was remapped to node v.
  std::vector<long long> original_labels;
};

/*
 * Text format:  `#` starts a comment; first payload line is `nodes N`;
 * each following payload line is `edge I J W`. Arbitrary integer labels are
 * remapped (ascending) to 1..N.
 */
ParsedTree parse_tree_labeled(std::string_view text);
GaussianTree parse_tree(std::string_view text);
std::string serialize_tree(const GaussianTree& tree);

}  // namespace treeci
