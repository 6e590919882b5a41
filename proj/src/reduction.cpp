#include "treeci/reduction.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace treeci {

namespace {

void check_canonical_weights(double w1, double w2) {
  if (!(std::abs(w1) < 1.0)) {
    throw ModelError("canonical pair: |w1| must be < 1");
  }
  if (!(std::abs(w2) > 0.0 && std::abs(w2) < 1.0)) {
    throw ModelError("canonical pair: w2 must satisfy 0 < |w2| < 1");
  }
}

// Rebuild a tree with node `victim` removed and ids above it shifted down.
std::vector<WeightedEdge> relabel_without(const std::vector<WeightedEdge>& edges,
                                          int victim) {
  std::vector<WeightedEdge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.i == victim || e.j == victim) continue;
    WeightedEdge f = e;
    if (f.i > victim) --f.i;
    if (f.j > victim) --f.j;
    out.push_back(f);
  }
  return out;
}

bool is_common_leaf(const GaussianTree& t1, const GaussianTree& t2, int node) {
  if (t1.degree(node) != 1 || t2.degree(node) != 1) return false;
  const auto [n1, w1] = t1.adjacency()[node][0];
  const auto [n2, w2] = t2.adjacency()[node][0];
  return n1 == n2 && w1 == w2;
}

bool is_common_degree2(const GaussianTree& t1, const GaussianTree& t2, int node) {
  if (t1.degree(node) != 2 || t2.degree(node) != 2) return false;
  auto nb1 = t1.adjacency()[node];
  auto nb2 = t2.adjacency()[node];
  auto by_node = [](const std::pair<int, double>& a, const std::pair<int, double>& b) {
    return a.first < b.first;
  };
  std::sort(nb1.begin(), nb1.end(), by_node);
  std::sort(nb2.begin(), nb2.end(), by_node);
  return nb1 == nb2;
}

}  // namespace

CanonicalPair::CanonicalPair(double w1, double w2) : w1_(w1), w2_(std::abs(w2)) {
  check_canonical_weights(w1, w2);
}

std::pair<GaussianTree, GaussianTree> canonical_trees(double w1, double w2) {
  check_canonical_weights(w1, w2);
  if (!(std::abs(w1) > 0.0)) {
    throw ModelError("canonical trees need w1 != 0 to be valid Gaussian trees");
  }
  GaussianTree g1(3, {{1, 2, w1}, {1, 3, w2}});
  GaussianTree g2(3, {{1, 2, w1}, {2, 3, w2}});
  return {std::move(g1), std::move(g2)};
}

double lambda_max(const CanonicalPair& cp) {
  const double sb = std::sqrt(cp.beta());
  return (sb + cp.w2()) / (sb - cp.w2());
}

double ci_full_closed(const CanonicalPair& cp) {
  const double lm = lambda_max(cp);
  // ln((lm+1)/(2 sqrt(lm))) evaluated via log1p, stable as lm -> 1.
  const double t = lm - 1.0;
  return std::log1p(0.5 * t) - 0.5 * std::log1p(t);
}

double ci_full_weight_form(const CanonicalPair& cp) {
  const double w2sq = cp.w2() * cp.w2();
  return 0.5 * std::log1p(0.5 * w2sq / (1.0 - w2sq) * (1.0 - cp.w1()));
}

std::array<double, 3> generalized_eigs(const Eigen::MatrixXd& sigma1,
                                       const Eigen::MatrixXd& sigma2) {
  if (sigma1.rows() != 3 || sigma1.cols() != 3 || sigma2.rows() != 3 ||
      sigma2.cols() != 3) {
    throw ModelError("generalized_eigs: expects 3x3 covariances");
  }
  Eigen::LLT<Eigen::MatrixXd> llt2(sigma2);
  if (llt2.info() != Eigen::Success) {
    throw ModelError("generalized_eigs: sigma2 is not positive definite");
  }
  // Characteristic cubic of M = S2^-1 S1 is l^3 - t l^2 + s l - 1 with
  // det M = 1 (shared determinants) and root 1, leaving l^2 - (t-1) l + 1.
  const double trace = llt2.solve(sigma1).trace();
  const double half = 0.5 * (trace - 1.0);
  const double disc = half * half - 1.0;
  const double root = disc > 0.0 ? std::sqrt(disc) : 0.0;
  const double hi = half + root;
  const double lo = half - root;
  return {std::min(lo, 1.0), 1.0, std::max(hi, 1.0)};
}

bool has_identical_local_structure(const GaussianTree& t1, const GaussianTree& t2,
                                   int node) {
  if (t1.node_count() != t2.node_count()) return false;
  if (node < 1 || node > t1.node_count()) return false;
  return is_common_leaf(t1, t2, node) || is_common_degree2(t1, t2, node);
}

std::pair<GaussianTree, GaussianTree> prune_common_leaf(const GaussianTree& t1,
                                                        const GaussianTree& t2,
                                                        int leaf) {
  if (t1.node_count() != t2.node_count()) {
    throw ModelError("prune_common_leaf: trees differ in size");
  }
  if (t1.node_count() <= 2) {
    throw ModelError("prune_common_leaf: cannot shrink below 2 nodes");
  }
  if (leaf < 1 || leaf > t1.node_count() || !is_common_leaf(t1, t2, leaf)) {
    throw ModelError("prune_common_leaf: node " + std::to_string(leaf) +
                     " is not a common identical leaf");
  }
  const int n = t1.node_count() - 1;
  return {GaussianTree(n, relabel_without(t1.edges(), leaf)),
          GaussianTree(n, relabel_without(t2.edges(), leaf))};
}

std::pair<GaussianTree, GaussianTree> contract_common_degree2(const GaussianTree& t1,
                                                              const GaussianTree& t2,
                                                              int node) {
  if (t1.node_count() != t2.node_count()) {
    throw ModelError("contract_common_degree2: trees differ in size");
  }
  if (node < 1 || node > t1.node_count() || !is_common_degree2(t1, t2, node)) {
    throw ModelError("contract_common_degree2: node " + std::to_string(node) +
                     " is not a common identical degree-2 node");
  }
  const auto& nb = t1.adjacency()[node];
  const int p = nb[0].first, q = nb[1].first;
  const double w = nb[0].second * nb[1].second;

  auto rebuild = [&](const GaussianTree& t) {
    auto edges = relabel_without(t.edges(), node);
    WeightedEdge e{p, q, w};
    if (e.i > node) --e.i;
    if (e.j > node) --e.j;
    edges.push_back(e);
    return GaussianTree(t.node_count() - 1, std::move(edges));
  };
  return {rebuild(t1), rebuild(t2)};
}

std::pair<GaussianTree, GaussianTree> reduce_common_structure(
    const GaussianTree& t1, const GaussianTree& t2,
    std::vector<ReductionStep>* steps) {
  if (t1.node_count() != t2.node_count()) {
    throw ModelError("reduce_common_structure: trees differ in size");
  }
  GaussianTree a = t1, b = t2;
  bool progress = true;
  while (progress) {
    progress = false;
    bool pruned = true;
    while (pruned && a.node_count() > 2) {
      pruned = false;
      for (int v = 1; v <= a.node_count(); ++v) {
        if (is_common_leaf(a, b, v)) {
          std::tie(a, b) = prune_common_leaf(a, b, v);
          if (steps) steps->push_back({ReductionStep::Kind::PruneLeaf, v});
          pruned = true;
          progress = true;
          break;
        }
      }
    }
    for (int v = 1; v <= a.node_count(); ++v) {
      if (is_common_degree2(a, b, v)) {
        std::tie(a, b) = contract_common_degree2(a, b, v);
        if (steps) steps->push_back({ReductionStep::Kind::ContractDegree2, v});
        progress = true;
        break;
      }
    }
  }
  return {std::move(a), std::move(b)};
}

CanonicalPair reduce_pair(const GraftedPair& pair) {
  if (pair.attach_k == pair.cut_i) {
    throw ModelError("reduce_pair: trivial graft (attach == cut endpoint) has "
                     "no 3-node canonical form");
  }
  return CanonicalPair(path_weight(pair.tree1, pair.cut_i, pair.attach_k), pair.w2);
}

}  // namespace treeci
