#include "treeci/info_engine.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace treeci {

namespace {

// Every divergence computation goes through this one factorization; the
// tree closed forms are never used on this path.
Eigen::LLT<Eigen::MatrixXd> pd_factor(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw ModelError(std::string(what) + ": matrix must be square");
  }
  if (!m.isApprox(m.transpose(), 1e-12)) {
    throw ModelError(std::string(what) + ": matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw ModelError(std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

double logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd inverse_of(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto n = llt.matrixLLT().rows();
  return llt.solve(Eigen::MatrixXd::Identity(n, n));
}

// D(S_lambda || S_i) given the precision P_i, log|S_i|, and S_lambda pieces.
double kl_from_parts(const Eigen::MatrixXd& precision_i, double logdet_i,
                     const Eigen::MatrixXd& sl, double logdet_sl) {
  const double n = static_cast<double>(sl.rows());
  const double trace = precision_i.cwiseProduct(sl).sum();
  return 0.5 * (logdet_i - logdet_sl + trace - n);
}

}  // namespace

double kl(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2) {
  if (sigma1.rows() != sigma2.rows()) {
    throw ModelError("kl: dimension mismatch");
  }
  auto llt1 = pd_factor(sigma1, "kl: sigma1");
  auto llt2 = pd_factor(sigma2, "kl: sigma2");
  const double n = static_cast<double>(sigma1.rows());
  const double trace = llt2.solve(sigma1).trace();
  return 0.5 * (logdet(llt2) - logdet(llt1) + trace - n);
}

Eigen::MatrixXd sigma_lambda(const Eigen::MatrixXd& sigma1,
                             const Eigen::MatrixXd& sigma2, double lambda) {
  if (sigma1.rows() != sigma2.rows()) {
    throw ModelError("sigma_lambda: dimension mismatch");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ModelError("sigma_lambda: lambda must lie in [0, 1]");
  }
  auto llt1 = pd_factor(sigma1, "sigma_lambda: sigma1");
  auto llt2 = pd_factor(sigma2, "sigma_lambda: sigma2");
  const Eigen::MatrixXd prec =
      lambda * inverse_of(llt1) + (1.0 - lambda) * inverse_of(llt2);
  return inverse_of(pd_factor(prec, "sigma_lambda: precision"));
}

ChernoffResult chernoff(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2) {
  if (sigma1.rows() != sigma2.rows()) {
    throw ModelError("chernoff: dimension mismatch");
  }
  auto llt1 = pd_factor(sigma1, "chernoff: sigma1");
  auto llt2 = pd_factor(sigma2, "chernoff: sigma2");
  const Eigen::MatrixXd p1 = inverse_of(llt1);
  const Eigen::MatrixXd p2 = inverse_of(llt2);
  const double ld1 = logdet(llt1);
  const double ld2 = logdet(llt2);

  struct Divergences {
    double to_1, to_2;
  };
  auto at = [&](double lambda) -> Divergences {
    const Eigen::MatrixXd prec = lambda * p1 + (1.0 - lambda) * p2;
    auto llt = pd_factor(prec, "chernoff: interpolated precision");
    const Eigen::MatrixXd sl = inverse_of(llt);
    const double ld_sl = -logdet(llt);
    return {kl_from_parts(p1, ld1, sl, ld_sl), kl_from_parts(p2, ld2, sl, ld_sl)};
  };

  // h(0) = D(S2||S1) > 0 and h(1) = -D(S1||S2) < 0 unless the inputs agree;
  // no sign change means they agree (up to fp noise) and CI is 0.
  const auto d0 = at(0.0);
  const auto d1 = at(1.0);
  const double h0 = d0.to_1 - d0.to_2;
  const double h1 = d1.to_1 - d1.to_2;
  if (!(h0 > 0.0) || !(h1 < 0.0)) {
    return ChernoffResult{0.5, 0.0, 0.0, 0.0};
  }

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto d = at(mid);
    if (d.to_1 - d.to_2 > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda_star = 0.5 * (lo + hi);
  const auto d = at(lambda_star);
  return ChernoffResult{lambda_star, d.to_2, d.to_1, d.to_2};
}

double scalar_g(double x) {
  if (!(x > 0.0)) throw ModelError("scalar_g: x must be positive");
  const double t = x - 1.0;
  if (std::abs(t) < 1e-6) return t * t / 16.0;  // leading Taylor term
  const double lx = std::log1p(t);
  const double s = (t - lx) / lx;  // (x-1)/ln(x) - 1
  return 0.5 * (std::log1p(s) - s / (1.0 + s));
}

double scalar_chernoff(double var1, double var2) {
  if (!(var1 > 0.0) || !(var2 > 0.0)) {
    throw ModelError("scalar_chernoff: variances must be positive");
  }
  return scalar_g(var2 / var1);
}

DiscretePmf::DiscretePmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ModelError("pmf must have at least one state");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw ModelError("pmf entries must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ModelError("pmf entries must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

double discrete_chernoff(const DiscretePmf& p, const DiscretePmf& q) {
  if (p.size() != q.size()) {
    throw ModelError("discrete_chernoff: support size mismatch");
  }
  if (p.probs() == q.probs()) return 0.0;
  // Common support only: states with q_i = 0 (or p_i = 0) contribute nothing
  // to F(lambda) on the open interval.
  std::vector<double> lp, lq;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] > 0.0) {
      lp.push_back(std::log(p[i]));
      lq.push_back(std::log(q[i]));
    }
  }
  if (lp.empty()) return std::numeric_limits<double>::infinity();

  auto ln_f = [&](double lambda) {
    double sum = 0.0;
    for (size_t i = 0; i < lp.size(); ++i) {
      sum += std::exp(lambda * lp[i] + (1.0 - lambda) * lq[i]);
    }
    return std::log(sum);
  };

  // Golden-section minimization; ln F is convex in lambda.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = ln_f(c), fd = ln_f(d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = ln_f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = ln_f(d);
    }
  }
  const double interior = std::min(fc, fd);
  const double best = std::min({interior, ln_f(0.0), ln_f(1.0)});
  return std::max(0.0, -best);
}

DiscretePmf merge_states(const DiscretePmf& p, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= p.size() || j >= p.size()) {
    throw ModelError("merge_states: invalid state indices");
  }
  if (p.size() < 2) throw ModelError("merge_states: nothing to merge");
  const int keep = std::min(i, j), drop = std::max(i, j);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(p.size()) - 1);
  for (int k = 0; k < p.size(); ++k) {
    if (k == drop) continue;
    out.push_back(k == keep ? p[keep] + p[drop] : p[k]);
  }
  return DiscretePmf(std::move(out));
}

Eigen::MatrixXd drop_variable(const Eigen::MatrixXd& sigma, int node) {
  const auto n = sigma.rows();
  if (node < 0 || node >= n || n < 2) {
    throw ModelError("drop_variable: index out of range");
  }
  Eigen::MatrixXd out(n - 1, n - 1);
  for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
    if (r == node) continue;
    for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
      if (c == node) continue;
      out(rr, cc) = sigma(r, c);
      ++cc;
    }
    ++rr;
  }
  return out;
}

}  // namespace treeci
