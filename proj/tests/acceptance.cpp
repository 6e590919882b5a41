// End-to-end acceptance runs: one pass/fail line per criterion, nonzero exit
// when anything fails. Tolerances are fixed here, not configurable.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "treeci/experiment.hpp"
#include "treeci/info_engine.hpp"
#include "treeci/lt_observe.hpp"
#include "treeci/reduction.hpp"
#include "treeci/tree_model.hpp"

using namespace treeci;
using namespace treeci::testing;

namespace {

int failures = 0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void report(int number, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%.2fs%s%s)\n", pass ? "PASS" : "FAIL", number,
              name.c_str(), seconds, detail.empty() ? "" : "; ",
              detail.c_str());
  if (!pass) ++failures;
}

template <typename F>
void run(int number, const std::string& name, double budget_seconds, F body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= budget_seconds) {
    pass = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  report(number, name, pass, elapsed, detail);
}

std::vector<double> weight_grid(int points) {
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(points));
  for (int k = 0; k < points; ++k) {
    grid.push_back(-0.9 + 1.8 * static_cast<double>(k) / (points - 1));
  }
  return grid;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> canonical_covs(double w1, double w2) {
  const auto [g1, g2] = canonical_trees(w1, w2);
  return {build_covariance(g1).mat(), build_covariance(g2).mat()};
}

bool criterion1_closed_forms(std::string& detail) {
  std::mt19937_64 eng(101);
  double worst_inv = 0.0, worst_det = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(uniform01(eng) * 11);
    const GaussianTree t = random_tree(n, eng);
    const Eigen::MatrixXd cov = build_covariance(t).mat();
    const Eigen::MatrixXd inv = tree_inverse(t);
    worst_inv = std::max(worst_inv,
                         (inv * cov - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    const double closed = tree_determinant(t);
    const double reference = lu_determinant(cov);
    worst_det = std::max(worst_det, std::abs(closed - reference) / std::abs(reference));
  }
  detail = "max |inv*cov - I| = " + num(worst_inv) +
           ", max rel det err = " + num(worst_det);
  return worst_inv <= 1e-10 && worst_det <= 1e-10;
}

bool criterion2_ci2_closed_form(std::string& detail) {
  const auto grid = weight_grid(20);
  double worst_ci = 0.0, worst_lambda = 0.0;
  for (double w1 : grid) {
    for (double w2 : grid) {
      const auto [s1, s2] = canonical_covs(w1, w2);
      const ChernoffResult res = chernoff(s1, s2);
      const double closed = ci_full_closed(CanonicalPair(w1, w2));
      worst_ci = std::max(worst_ci, std::abs(res.value - closed));
      worst_lambda = std::max(worst_lambda, std::abs(res.lambda_star - 0.5));
    }
  }
  detail = "max |CI - closed| = " + num(worst_ci) +
           ", max |lambda*-1/2| = " + num(worst_lambda);
  return worst_ci <= 1e-9 && worst_lambda <= 1e-6;
}

bool criterion3_lambda_max(std::string& detail) {
  const auto grid = weight_grid(20);
  double worst = 0.0;
  for (double w1 : grid) {
    for (double w2 : grid) {
      const auto [s1, s2] = canonical_covs(w1, w2);
      const auto eigs = generalized_eigs(s1, s2);
      const double lm = lambda_max(CanonicalPair(w1, w2));
      worst = std::max({worst, std::abs(eigs[2] - lm), std::abs(eigs[0] - 1.0 / lm),
                        std::abs(eigs[1] - 1.0)});
    }
  }
  detail = "max eigenvalue deviation = " + num(worst);
  return worst <= 1e-9;
}

bool criterion4_lt_closed_form(std::string& detail) {
  const auto grid = weight_grid(20);
  double worst_ci = 0.0, worst_grad = 0.0;
  for (double w1 : grid) {
    for (double w2 : grid) {
      const auto [s1, s2] = canonical_covs(w1, w2);
      const CanonicalPair cp(w1, w2);
      worst_ci = std::max(worst_ci, std::abs(optimize_alpha_numeric(s1, s2).ci -
                                             scalar_g(lambda_max(cp))));
      const double sb = std::sqrt(cp.beta());
      Eigen::VectorXd alpha(3);
      alpha << -0.5 * (w2 + sb), -0.5 * (w2 - sb), 1.0;
      worst_grad = std::max(worst_grad, fd_ratio_gradient(s1, s2, alpha, 1e-6).norm());
    }
  }
  detail = "max |numeric ci - g(lambda_max)| = " + num(worst_ci) +
           ", max gradient norm = " + num(worst_grad);
  return worst_ci <= 1e-6 && worst_grad <= 1e-4;
}

bool criterion5_reduction_soundness(std::string& detail) {
  std::mt19937_64 eng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(uniform01(eng) * 7);
    const GraftedPair pair = random_grafted_pair(n, eng);
    const double full = chernoff(build_covariance(pair.tree1).mat(),
                                 build_covariance(pair.tree2).mat())
                            .value;
    const CanonicalPair cp = reduce_pair(pair);
    const auto [c1, c2] = canonical_covs(cp.w1(), cp.w2());
    worst = std::max(worst, std::abs(full - chernoff(c1, c2).value));
  }
  detail = "max |CI(full) - CI(canonical)| = " + num(worst);
  return worst <= 1e-8;
}

bool criterion6_ratio_bounds(std::string& detail) {
  const auto grid = weight_grid(50);
  const auto rows = ratio_surface(grid, grid);
  double lo = 1e300, hi = -1e300;
  for (const auto& row : rows) {
    if (!row.valid) return false;  // the 50-grid avoids w2 = 0
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    if (!(row.ratio >= 1.0 - 1e-9 && row.ratio <= 2.0 + 1e-9)) return false;
    const double norm = row.ratio / 3.0;
    if (!(norm >= 1.0 / 3.0 - 1e-9 && norm <= 2.0 / 3.0 + 1e-9)) return false;
  }
  double near_zero_min = 1e300;
  for (double w1 : grid) {
    for (double w2 : {-0.01, 0.01}) {
      const CanonicalPair cp(w1, w2);
      near_zero_min =
          std::min(near_zero_min, ci_full_closed(cp) / scalar_g(lambda_max(cp)));
    }
  }
  detail = "ratio range [" + num(lo) + ", " + num(hi) +
           "], min ratio at |w2|=0.01 is " + num(near_zero_min);
  return near_zero_min >= 1.99;
}

bool criterion7_g_inequality(std::string& detail) {
  std::vector<double> xs;
  xs.reserve(10000);
  for (int k = 1; k <= 10000; ++k) {
    xs.push_back(std::pow(10.0, 6.0 * k / 10000.0));
  }
  const auto rep = g_inequality_check(xs);
  detail = "min gap = " + num(rep.min_gap) + " at x = " +
           num(rep.min_gap_x);
  return rep.violations == 0;
}

bool criterion8_state_merging(std::string& detail) {
  std::mt19937_64 eng(808);
  double worst_increase = -1e300;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(uniform01(eng) * 7);
    std::vector<double> pv(n), qv(n);
    double ps = 0.0, qs = 0.0;
    for (int i = 0; i < n; ++i) {
      pv[i] = uniform01(eng);
      qv[i] = uniform01(eng);
      ps += pv[i];
      qs += qv[i];
    }
    for (int i = 0; i < n; ++i) {
      pv[i] /= ps;
      qv[i] /= qs;
    }
    const DiscretePmf p(pv), q(qv);
    const double base = discrete_chernoff(p, q);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double merged =
            discrete_chernoff(merge_states(p, i, j), merge_states(q, i, j));
        worst_increase = std::max(worst_increase, merged - base);
        if (merged > base + 1e-12) {
          detail = "monotonicity violated by " + num(merged - base);
          return false;
        }
      }
    }
  }
  // equality when the merged states keep p_i/q_i = p_j/q_j
  double worst_eq = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> qv{0.1, 0.3, 0.25, 0.35};
    const double r = uniform_range(eng, 0.25, 3.0);
    std::vector<double> pv{r * qv[0], r * qv[1], uniform01(eng), uniform01(eng)};
    double ps = 0.0;
    for (double x : pv) ps += x;
    for (double& x : pv) x /= ps;
    const DiscretePmf p(pv), q(qv);
    const double before = discrete_chernoff(p, q);
    const double after =
        discrete_chernoff(merge_states(p, 0, 1), merge_states(q, 0, 1));
    worst_eq = std::max(worst_eq, std::abs(after - before));
  }
  detail = "max increase = " + num(worst_increase) +
           ", max proportional-merge deviation = " + num(worst_eq);
  return worst_eq <= 1e-10;
}

bool criterion9_monte_carlo(std::string& detail) {
  const CanonicalPair cp(0.5, 0.6);
  const auto [s1, s2] = canonical_covs(0.5, 0.6);
  const double ci2 = ci_full_closed(cp);
  const double ci1 = scalar_g(lambda_max(cp));
  const long long trials = 100000;
  const std::uint64_t seed = 20250810;

  const std::vector<int> full_grid{50, 60, 70, 80, 90, 100};
  const auto full =
      simulate_exponent(s1, s2, ObservationMode::full(), full_grid, trials, seed);

  const Eigen::VectorXd alpha = optimal_alpha_canonical(cp).alpha;
  const std::vector<int> lt_grid{100, 120, 140, 160, 180, 200};
  const auto lt =
      simulate_exponent(s1, s2, ObservationMode::lt(alpha), lt_grid, trials, seed);

  const double full_rel = std::abs(full.slope - ci2) / ci2;
  const double lt_rel = std::abs(lt.slope - ci1) / ci1;
  detail = "full slope " + num(full.slope) + " vs CI2 " + num(ci2) +
           " (" + num(100.0 * full_rel) + "%), lt slope " +
           num(lt.slope) + " vs CI1 " + num(ci1) + " (" +
           num(100.0 * lt_rel) + "%)";
  return full_rel <= 0.15 && lt_rel <= 0.15 && full.slope >= lt.slope;
}

bool criterion10_local_reductions(std::string& detail) {
  std::mt19937_64 eng(1010);
  double worst_step = 0.0, worst_marginal = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(uniform01(eng) * 5);
    const GraftedPair pair = random_grafted_pair(n, eng);
    const double before = chernoff(build_covariance(pair.tree1).mat(),
                                   build_covariance(pair.tree2).mat())
                              .value;
    // apply the first available single reduction step
    bool stepped = false;
    for (int v = 1; v <= n && !stepped; ++v) {
      if (has_identical_local_structure(pair.tree1, pair.tree2, v)) {
        const auto [a, b] =
            pair.tree1.degree(v) == 1
                ? prune_common_leaf(pair.tree1, pair.tree2, v)
                : contract_common_degree2(pair.tree1, pair.tree2, v);
        const double after =
            chernoff(build_covariance(a).mat(), build_covariance(b).mat()).value;
        worst_step = std::max(worst_step, std::abs(after - before));
        stepped = true;
      }
    }
    // joint marginalization of each single node never increases CI
    const GaussianTree u1 = random_tree(3 + static_cast<int>(uniform01(eng) * 5), eng);
    const GaussianTree u2 = random_tree(u1.node_count(), eng);
    const Eigen::MatrixXd m1 = build_covariance(u1).mat();
    const Eigen::MatrixXd m2 = build_covariance(u2).mat();
    const double joint = chernoff(m1, m2).value;
    for (int v = 0; v < u1.node_count(); ++v) {
      const double marginal = chernoff(drop_variable(m1, v), drop_variable(m2, v)).value;
      worst_marginal = std::max(worst_marginal, marginal - joint);
    }
  }
  detail = "max |CI change| after one step = " + num(worst_step) +
           ", max marginal excess = " + num(worst_marginal);
  return worst_step <= 1e-8 && worst_marginal <= 1e-10;
}

bool criterion11_zero_coordinate(std::string& detail) {
  std::mt19937_64 eng(1111);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(uniform01(eng) * 5);
    const GraftedPair pair = random_grafted_pair(n, eng);
    GaussianTree t1 = pair.tree1, t2 = pair.tree2;
    int probe = 0;
    if (trial % 2 == 0) {
      // append a common leaf to both trees
      const int anchor = 1 + static_cast<int>(uniform01(eng) * n);
      const double w = (uniform01(eng) < 0.5 ? -1.0 : 1.0) * uniform_range(eng, 0.1, 0.9);
      auto grow = [&](const GaussianTree& t) {
        auto edges = t.edges();
        edges.push_back({anchor, n + 1, w});
        return GaussianTree(n + 1, std::move(edges));
      };
      t1 = grow(t1);
      t2 = grow(t2);
      probe = n + 1;
    } else {
      // subdivide a shared edge identically in both trees
      WeightedEdge shared{0, 0, 0.0};
      for (const auto& e : pair.tree1.edges()) {
        if (pair.tree2.has_edge(e.i, e.j) && pair.tree2.edge_weight(e.i, e.j) == e.w) {
          shared = e;
          break;
        }
      }
      if (shared.i == 0) continue;  // no shared edge (cannot happen for n >= 3)
      const double wa = std::sqrt(std::abs(shared.w));
      const double wb = shared.w / wa;
      auto split = [&](const GaussianTree& t) {
        std::vector<WeightedEdge> edges;
        for (const auto& e : t.edges()) {
          if (e.i == shared.i && e.j == shared.j) continue;
          edges.push_back(e);
        }
        edges.push_back({shared.i, n + 1, wa});
        edges.push_back({shared.j, n + 1, wb});
        return GaussianTree(n + 1, std::move(edges));
      };
      t1 = split(t1);
      t2 = split(t2);
      probe = n + 1;
    }
    const ZeroCoordinateReport rep = verify_zero_coordinate(t1, t2, probe);
    worst = std::max(worst, std::abs(rep.gap));
  }
  detail = "max |constrained - unconstrained| = " + num(worst);
  return worst <= 1e-8;
}

}  // namespace

int main() {
  run(1, "tree closed forms match generic factorizations", 5.0, criterion1_closed_forms);
  run(2, "closed-form CI2 and lambda* = 1/2 on the weight grid", 10.0,
      criterion2_ci2_closed_form);
  run(3, "generalized eigenvalue structure {1/l, 1, l}", 10.0, criterion3_lambda_max);
  run(4, "optimal 1-dim LT matches g(lambda_max), stationary alpha*", 10.0,
      criterion4_lt_closed_form);
  run(5, "grafted pairs reduce to 3 nodes without changing CI", 30.0,
      criterion5_reduction_soundness);
  run(6, "CI2/CI1 within [1,2], normalized within [1/3,2/3]", 10.0,
      criterion6_ratio_bounds);
  run(7, "2 g(x) >= ln((x+1)/(2 sqrt(x))) on (1, 1e6]", 10.0, criterion7_g_inequality);
  run(8, "state merging never increases discrete CI", 10.0, criterion8_state_merging);
  run(9, "Monte Carlo error exponents track CI2 and CI1", 180.0, criterion9_monte_carlo);
  run(10, "single-step reductions preserve CI; marginals never gain", 60.0,
      criterion10_local_reductions);
  run(11, "identical-structure nodes are droppable from the LT optimum", 30.0,
      criterion11_zero_coordinate);
  return failures == 0 ? 0 : 1;
}
