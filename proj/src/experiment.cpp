#include "treeci/experiment.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "treeci/info_engine.hpp"
#include "treeci/lt_observe.hpp"
#include "treeci/rng.hpp"

namespace treeci {

namespace {

struct FullRule {
  Eigen::MatrixXd l1, l2;     // Cholesky factors for sampling
  Eigen::MatrixXd diff_prec;  // S1^-1 - S2^-1
  double log_det_term;        // -1/2 (ln|S1| - ln|S2|)
};

// One length-t trial; returns true when the ML decision is wrong.
bool full_trial_is_error(const FullRule& rule, int t, int hypothesis, NormalSampler& normal,
                     Eigen::VectorXd& z, Eigen::VectorXd& x) {
  const Eigen::MatrixXd& l = hypothesis == 1 ? rule.l1 : rule.l2;
  double stat = 0.0;
  for (int s = 0; s < t; ++s) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal();
    x.noalias() = l.triangularView<Eigen::Lower>() * z;
    stat += -0.5 * x.dot(rule.diff_prec * x) + rule.log_det_term;
  }
  const bool decide_h1 = stat >= 0.0;
  return decide_h1 != (hypothesis == 1);
}

struct LtRule {
  double sd1, sd2;       // observation standard deviations per hypothesis
  double quad, log_term; // per-sample statistic: quad * y^2 + log_term
};

bool lt_trial_is_error(const LtRule& rule, int t, int hypothesis, NormalSampler& normal) {
  const double sd = hypothesis == 1 ? rule.sd1 : rule.sd2;
  double stat = 0.0;
  for (int s = 0; s < t; ++s) {
    const double y = sd * normal();
    stat += rule.quad * y * y + rule.log_term;
  }
  const bool decide_h1 = stat >= 0.0;
  return decide_h1 != (hypothesis == 1);
}

double logdet_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

ExponentEstimate simulate_exponent(const Eigen::MatrixXd& sigma1,
                                   const Eigen::MatrixXd& sigma2,
                                   const ObservationMode& mode,
                                   const std::vector<int>& t_grid,
                                   long long trials, std::uint64_t seed) {
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) ||
      t_grid.front() < 1) {
    throw ModelError("simulate_exponent: t_grid must be increasing and positive");
  }
  if (trials < 10000) {
    throw ModelError("simulate_exponent: at least 10^4 trials required");
  }

  Eigen::LLT<Eigen::MatrixXd> llt1(sigma1), llt2(sigma2);
  if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success) {
    throw ModelError("simulate_exponent: covariances must be positive definite");
  }

  FullRule full;
  LtRule lt{};
  double reference = 0.0;
  if (mode.kind == ObservationMode::Kind::Full) {
    full.l1 = llt1.matrixL();
    full.l2 = llt2.matrixL();
    const auto n = sigma1.rows();
    full.diff_prec = llt1.solve(Eigen::MatrixXd::Identity(n, n)) -
                     llt2.solve(Eigen::MatrixXd::Identity(n, n));
    full.log_det_term = -0.5 * (logdet_llt(llt1) - logdet_llt(llt2));
    reference = chernoff(sigma1, sigma2).value;
  } else {
    if (mode.alpha.size() != sigma1.rows()) {
      throw ModelError("simulate_exponent: alpha dimension mismatch");
    }
    const double v1 = mode.alpha.dot(sigma1 * mode.alpha);
    const double v2 = mode.alpha.dot(sigma2 * mode.alpha);
    if (!(v1 > 0.0) || !(v2 > 0.0)) {
      throw ModelError("simulate_exponent: alpha gives non-positive variance");
    }
    lt = LtRule{std::sqrt(v1), std::sqrt(v2), -0.5 * (1.0 / v1 - 1.0 / v2),
                -0.5 * std::log(v1 / v2)};
    reference = scalar_chernoff(v1, v2);  // = CI1 when alpha is the optimum
  }

  ExponentEstimate est;
  est.sample_lengths = t_grid;
  est.trials = trials;
  est.seed = seed;
  est.ci_reference = reference;

  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = static_cast<int>(std::clamp(hw, 1u, 16u));
  const Eigen::Index dim = sigma1.rows();

  for (int t : t_grid) {
    std::vector<long long> errors(workers, 0);
    auto run = [&](int w) {
      NormalSampler normal(0);
      Eigen::VectorXd z(dim), x(dim);
      long long errs = 0;
      for (long long trial = w; trial < trials; trial += workers) {
        normal = NormalSampler(
            derive_seed(seed, static_cast<std::uint64_t>(t),
                        static_cast<std::uint64_t>(trial)));
        // Even trials draw from hypothesis 1, odd from hypothesis 2.
        const int hyp = (trial % 2 == 0) ? 1 : 2;
        const bool err = mode.kind == ObservationMode::Kind::Full
                             ? full_trial_is_error(full, t, hyp, normal, z, x)
                             : lt_trial_is_error(lt, t, hyp, normal);
        if (err) ++errs;
      }
      errors[static_cast<size_t>(w)] = errs;
    };
    if (workers == 1) {
      run(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
      for (auto& th : pool) th.join();
    }
    long long total = 0;
    for (long long e : errors) total += e;
    est.error_counts.push_back(total);
    est.error_rates.push_back(static_cast<double>(total) / static_cast<double>(trials));
  }

  est.lower_bound_only = est.error_counts.back() == 0;

  // Fit -ln P_e against T, skipping unreliable points (< 10 errors).
  std::vector<double> xs, ys;
  for (size_t k = 0; k < t_grid.size(); ++k) {
    if (est.error_counts[k] >= 10) {
      xs.push_back(static_cast<double>(t_grid[k]));
      ys.push_back(-std::log(est.error_rates[k]));
    }
  }
  if (xs.size() >= 2) {
    const size_t m = xs.size();
    double xm = 0.0, ym = 0.0;
    for (size_t k = 0; k < m; ++k) {
      xm += xs[k];
      ym += ys[k];
    }
    xm /= static_cast<double>(m);
    ym /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (size_t k = 0; k < m; ++k) {
      sxx += (xs[k] - xm) * (xs[k] - xm);
      sxy += (xs[k] - xm) * (ys[k] - ym);
    }
    const double slope = sxy / sxx;
    est.slope = std::max(0.0, slope);
    if (m > 2) {
      double rss = 0.0;
      for (size_t k = 0; k < m; ++k) {
        const double r = ys[k] - ym - slope * (xs[k] - xm);
        rss += r * r;
      }
      est.slope_se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
    }
  }
  return est;
}

NormalizedCi normalized_ci(const CanonicalPair& cp) {
  NormalizedCi out;
  out.ci1 = scalar_g(lambda_max(cp));
  out.ci2 = ci_full_closed(cp);
  out.ci1_hat = out.ci1;
  out.ci2_hat = out.ci2 / 3.0;
  out.ratio = out.ci2 / out.ci1;
  out.normalized_ratio = out.ratio / 3.0;
  return out;
}

std::vector<SurfaceRow> ratio_surface(const std::vector<double>& w1_grid,
                                      const std::vector<double>& w2_grid) {
  std::vector<SurfaceRow> rows;
  rows.reserve(w1_grid.size() * w2_grid.size());
  for (double w1 : w1_grid) {
    for (double w2 : w2_grid) {
      SurfaceRow row;
      row.w1 = w1;
      row.w2 = w2;
      const bool in_domain =
          std::abs(w1) < 1.0 && std::abs(w2) > 0.0 && std::abs(w2) < 1.0;
      if (in_domain) {
        const CanonicalPair cp(w1, w2);
        row.lambda_max = lambda_max(cp);
        row.ci1 = scalar_g(row.lambda_max);
        row.ci2 = ci_full_closed(cp);
        row.ratio = row.ci2 / row.ci1;
        row.valid = true;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

GInequalityReport g_inequality_check(const std::vector<double>& x_grid) {
  GInequalityReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  for (double x : x_grid) {
    if (!(x > 1.0)) throw ModelError("g_inequality_check: grid points must be > 1");
    const double lhs = 2.0 * scalar_g(x);
    const double t = x - 1.0;
    const double rhs = std::log1p(0.5 * t) - 0.5 * std::log1p(t);
    const double gap = lhs - rhs;
    ++report.points;
    if (gap < -1e-12) ++report.violations;
    if (gap < report.min_gap) {
      report.min_gap = gap;
      report.min_gap_x = x;
    }
  }
  return report;
}

}  // namespace treeci
