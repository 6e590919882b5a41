#include "treeci/tree_model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

namespace treeci {

namespace {

void check_weight(double w, const std::string& where) {
  if (!(std::abs(w) > 0.0) || !(std::abs(w) < 1.0) || !std::isfinite(w)) {
    throw ModelError(where + ": edge weight " + std::to_string(w) +
                     " outside 0 < |w| < 1");
  }
}

}  // namespace

GaussianTree::GaussianTree(int node_count, std::vector<WeightedEdge> edges)
    : n_(node_count) {
  if (n_ < 2) throw ModelError("tree needs at least 2 nodes");
  if (static_cast<int>(edges.size()) != n_ - 1) {
    throw ModelError("tree on " + std::to_string(n_) + " nodes needs " +
                     std::to_string(n_ - 1) + " edges, got " +
                     std::to_string(edges.size()));
  }
  for (auto& e : edges) {
    if (e.i < 1 || e.i > n_ || e.j < 1 || e.j > n_) {
      throw ModelError("edge (" + std::to_string(e.i) + "," +
                       std::to_string(e.j) + ") references a node outside 1.." +
                       std::to_string(n_));
    }
    if (e.i == e.j) throw ModelError("self-loop at node " + std::to_string(e.i));
    check_weight(e.w, "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ")");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  for (size_t k = 1; k < edges.size(); ++k) {
    if (edges[k].i == edges[k - 1].i && edges[k].j == edges[k - 1].j) {
      throw ModelError("duplicate edge (" + std::to_string(edges[k].i) + "," +
                       std::to_string(edges[k].j) + ")");
    }
  }
  edges_ = std::move(edges);

  adj_.assign(n_ + 1, {});
  for (const auto& e : edges_) {
    adj_[e.i].emplace_back(e.j, e.w);
    adj_[e.j].emplace_back(e.i, e.w);
  }

  // n-1 distinct edges and full connectivity together rule out cycles.
  std::vector<char> seen(n_ + 1, 0);
  std::vector<int> stack{1};
  seen[1] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (auto [v, w] : adj_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  if (count != n_) throw ModelError("edge set is not connected (not a spanning tree)");
}

int GaussianTree::degree(int v) const {
  if (v < 1 || v > n_) throw ModelError("node " + std::to_string(v) + " out of range");
  return static_cast<int>(adj_[v].size());
}

bool GaussianTree::has_edge(int i, int j) const {
  if (i < 1 || i > n_ || j < 1 || j > n_) return false;
  for (auto [v, w] : adj_[i])
    if (v == j) return true;
  return false;
}

double GaussianTree::edge_weight(int i, int j) const {
  if (i >= 1 && i <= n_) {
    for (auto [v, w] : adj_[i])
      if (v == j) return w;
  }
  throw ModelError("no edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd m) : mat_(std::move(m)) {
  const auto n = mat_.rows();
  if (n < 1 || mat_.cols() != n) throw ModelError("covariance must be square");
  for (Eigen::Index r = 0; r < n; ++r) {
    if (mat_(r, r) != 1.0) throw ModelError("covariance diagonal must be exactly 1");
    for (Eigen::Index c = r + 1; c < n; ++c) {
      if (mat_(r, c) != mat_(c, r)) throw ModelError("covariance must be symmetric");
      if (!(std::abs(mat_(r, c)) < 1.0)) {
        throw ModelError("off-diagonal correlation magnitude must be < 1");
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(mat_);
  if (llt.info() != Eigen::Success) {
    throw ModelError("covariance is not positive definite");
  }
}

CovarianceMatrix build_covariance(const GaussianTree& tree) {
  const int n = tree.node_count();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(n, n);
  // One DFS per source node; entry (s,t) is the path weight product. Only the
  // upper triangle is computed and then mirrored, keeping the matrix exactly
  // symmetric (the same product accumulated from the other end can differ in
  // the last ulp).
  std::vector<double> val(n + 1);
  std::vector<char> seen(n + 1);
  std::vector<int> stack;
  for (int s = 1; s <= n; ++s) {
    std::fill(seen.begin(), seen.end(), 0);
    seen[s] = 1;
    val[s] = 1.0;
    stack.assign(1, s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, w] : tree.adjacency()[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          val[v] = val[u] * w;
          stack.push_back(v);
        }
      }
    }
    for (int t = s + 1; t <= n; ++t) {
      sigma(s - 1, t - 1) = val[t];
      sigma(t - 1, s - 1) = val[t];
    }
  }
  return CovarianceMatrix(std::move(sigma));
}

double tree_determinant(const GaussianTree& tree) {
  std::vector<double> factors;
  factors.reserve(tree.edges().size());
  for (const auto& e : tree.edges()) factors.push_back(1.0 - e.w * e.w);
  std::sort(factors.begin(), factors.end());
  double det = 1.0;
  for (double f : factors) det *= f;
  return det;
}

Eigen::MatrixXd tree_inverse(const GaussianTree& tree) {
  const int n = tree.node_count();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (int v = 1; v <= n; ++v) {
    double diag = 1.0;
    for (auto [p, w] : tree.adjacency()[v]) diag += w * w / (1.0 - w * w);
    u(v - 1, v - 1) = diag;
  }
  for (const auto& e : tree.edges()) {
    const double off = -e.w / (1.0 - e.w * e.w);
    u(e.i - 1, e.j - 1) = off;
    u(e.j - 1, e.i - 1) = off;
  }
  return u;
}

double path_weight(const GaussianTree& tree, int a, int b) {
  const int n = tree.node_count();
  if (a < 1 || a > n || b < 1 || b > n) {
    throw ModelError("path endpoint out of range");
  }
  if (a == b) return 1.0;
  std::vector<double> val(n + 1, 0.0);
  std::vector<char> seen(n + 1, 0);
  std::vector<int> stack{a};
  seen[a] = 1;
  val[a] = 1.0;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (auto [v, w] : tree.adjacency()[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        val[v] = val[u] * w;
        if (v == b) return val[v];
        stack.push_back(v);
      }
    }
  }
  throw ModelError("no path found (tree invariant broken)");
}

GraftedPair graft(const GaussianTree& tree, int cut_i, int cut_j, int attach_k) {
  if (!tree.has_edge(cut_i, cut_j)) {
    throw ModelError("cut edge (" + std::to_string(cut_i) + "," +
                     std::to_string(cut_j) + ") is not in the tree");
  }
  const int n = tree.node_count();
  if (attach_k < 1 || attach_k > n) throw ModelError("attach node out of range");
  const double w2 = tree.edge_weight(cut_i, cut_j);

  // Component of cut_i once (cut_i, cut_j) is removed.
  std::vector<char> in_i_side(n + 1, 0);
  std::vector<int> stack{cut_i};
  in_i_side[cut_i] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (auto [v, w] : tree.adjacency()[u]) {
      if ((u == cut_i && v == cut_j) || (u == cut_j && v == cut_i)) continue;
      if (!in_i_side[v]) {
        in_i_side[v] = 1;
        stack.push_back(v);
      }
    }
  }
  if (!in_i_side[attach_k]) {
    throw ModelError("attach node " + std::to_string(attach_k) +
                     " lies in the severed subtree; the result would not be a tree");
  }

  std::vector<WeightedEdge> edges2;
  edges2.reserve(tree.edges().size());
  const int a = std::min(cut_i, cut_j), b = std::max(cut_i, cut_j);
  for (const auto& e : tree.edges()) {
    if (e.i == a && e.j == b) continue;
    edges2.push_back(e);
  }
  edges2.push_back({attach_k, cut_j, w2});
  GaussianTree tree2(n, std::move(edges2));

  return GraftedPair{tree, std::move(tree2), cut_i, cut_j, attach_k, w2,
                     path_weight(tree, cut_i, attach_k)};
}

GraftedPair detect_graft(const GaussianTree& tree1, const GaussianTree& tree2) {
  if (tree1.node_count() != tree2.node_count()) {
    throw ModelError("detect_graft: trees have different node counts");
  }
  std::vector<WeightedEdge> removed, added;
  std::set_difference(tree1.edges().begin(), tree1.edges().end(),
                      tree2.edges().begin(), tree2.edges().end(),
                      std::back_inserter(removed),
                      [](const WeightedEdge& a, const WeightedEdge& b) {
                        return std::tie(a.i, a.j, a.w) < std::tie(b.i, b.j, b.w);
                      });
  std::set_difference(tree2.edges().begin(), tree2.edges().end(),
                      tree1.edges().begin(), tree1.edges().end(),
                      std::back_inserter(added),
                      [](const WeightedEdge& a, const WeightedEdge& b) {
                        return std::tie(a.i, a.j, a.w) < std::tie(b.i, b.j, b.w);
                      });
  if (removed.empty() && added.empty()) {
    throw ModelError("detect_graft: trees are identical (trivial graft)");
  }
  if (removed.size() != 1 || added.size() != 1) {
    throw ModelError("detect_graft: trees differ by " +
                     std::to_string(std::max(removed.size(), added.size())) +
                     " edges, not one");
  }
  const WeightedEdge r = removed.front(), a = added.front();
  if (r.w != a.w) {
    throw ModelError("detect_graft: removed and added edges carry different weights");
  }
  // The shared endpoint is the moved node.
  int moved = 0;
  if (r.i == a.i || r.i == a.j) moved = r.i;
  if (r.j == a.i || r.j == a.j) {
    if (moved != 0) throw ModelError("detect_graft: edges share both endpoints");
    moved = r.j;
  }
  if (moved == 0) {
    throw ModelError("detect_graft: removed and added edges share no endpoint");
  }
  const int cut_i = r.i == moved ? r.j : r.i;
  const int attach_k = a.i == moved ? a.j : a.i;
  GraftedPair pair = graft(tree1, cut_i, moved, attach_k);
  if (!(pair.tree2 == tree2)) {
    throw ModelError("detect_graft: edge diff does not reproduce the second tree");
  }
  return pair;
}

namespace {

struct RawEdge {
  long long i, j;
  double w;
  int line;
};

}  // namespace

ParsedTree parse_tree_labeled(std::string_view text) {
  std::vector<RawEdge> raw;
  long long declared_n = -1;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (declared_n < 0) {
      if (kw != "nodes") {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected `nodes N` before any edge, got `" + kw + "`");
      }
      if (!(ls >> declared_n) || declared_n < 2) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid node count");
      }
    } else if (kw == "edge") {
      RawEdge e{0, 0, 0.0, line_no};
      if (!(ls >> e.i >> e.j >> e.w)) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected `edge I J W`");
      }
      raw.push_back(e);
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown keyword `" +
                       kw + "`");
    }
    std::string extra;
    if (ls >> extra) {
      throw ParseError("line " + std::to_string(line_no) + ": trailing token `" +
                       extra + "`");
    }
  }
  if (declared_n < 0) throw ParseError("no `nodes N` line found");

  std::set<long long> labels;
  for (const auto& e : raw) {
    labels.insert(e.i);
    labels.insert(e.j);
  }
  if (static_cast<long long>(raw.size()) != declared_n - 1) {
    throw ParseError("expected " + std::to_string(declared_n - 1) + " edges for " +
                     std::to_string(declared_n) + " nodes, got " +
                     std::to_string(raw.size()));
  }
  if (static_cast<long long>(labels.size()) != declared_n) {
    throw ParseError("edges mention " + std::to_string(labels.size()) +
                     " distinct nodes but file declares " + std::to_string(declared_n));
  }

  std::map<long long, int> rank;
  std::vector<long long> original;
  original.reserve(labels.size());
  for (long long lab : labels) {
    rank[lab] = static_cast<int>(original.size()) + 1;
    original.push_back(lab);
  }

  std::vector<WeightedEdge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) {
    if (!(std::abs(e.w) > 0.0 && std::abs(e.w) < 1.0) || !std::isfinite(e.w)) {
      throw ParseError("line " + std::to_string(e.line) + ": edge weight " +
                       std::to_string(e.w) + " outside 0 < |w| < 1");
    }
    if (e.i == e.j) {
      throw ParseError("line " + std::to_string(e.line) + ": self-loop");
    }
    edges.push_back({rank[e.i], rank[e.j], e.w});
  }

  try {
    return ParsedTree{GaussianTree(static_cast<int>(declared_n), std::move(edges)),
                      std::move(original)};
  } catch (const ModelError& err) {
    throw ParseError(std::string("invalid tree: ") + err.what());
  }
}

GaussianTree parse_tree(std::string_view text) {
  return parse_tree_labeled(text).tree;
}

std::string serialize_tree(const GaussianTree& tree) {
  std::string out = "nodes " + std::to_string(tree.node_count()) + "\n";
  char buf[64];
  for (const auto& e : tree.edges()) {
    std::snprintf(buf, sizeof buf, "edge %d %d %.17g\n", e.i, e.j, e.w);
    out += buf;
  }
  return out;
}

}  // namespace treeci
