#include "treeci/lt_observe.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

#include "treeci/info_engine.hpp"
#include "treeci/rng.hpp"

namespace treeci {

namespace {

Eigen::VectorXd normalize_largest_coord(Eigen::VectorXd alpha) {
  Eigen::Index at = 0;
  alpha.cwiseAbs().maxCoeff(&at);
  if (alpha[at] != 0.0) alpha /= alpha[at];
  return alpha;
}

double folded(double ratio) { return ratio >= 1.0 ? ratio : 1.0 / ratio; }

struct WhitenedEigs {
  Eigen::VectorXd values;             // ascending
  Eigen::MatrixXd alphas;             // columns: generalized eigenvectors
};

WhitenedEigs whitened_eigs(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2) {
  if (sigma1.rows() != sigma2.rows() || sigma1.rows() != sigma1.cols() ||
      sigma2.rows() != sigma2.cols()) {
    throw ModelError("generalized eigenproblem: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma2);
  if (llt.info() != Eigen::Success) {
    throw ModelError("generalized eigenproblem: sigma2 is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd half = l.triangularView<Eigen::Lower>().solve(sigma1);
  const Eigen::MatrixXd whitened =
      l.triangularView<Eigen::Lower>().solve(half.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(whitened);
  if (es.info() != Eigen::Success) {
    throw ModelError("generalized eigenproblem: eigensolver failed");
  }
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw ModelError("generalized eigenproblem: sigma1 is not positive definite");
  }
  // Map whitened eigenvectors v back to alpha = L^-T v.
  Eigen::MatrixXd alphas =
      l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  return {es.eigenvalues(), std::move(alphas)};
}

}  // namespace

double rayleigh_ratio(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                      const Eigen::VectorXd& alpha) {
  const double num = alpha.dot(sigma1 * alpha);
  const double den = alpha.dot(sigma2 * alpha);
  if (!(den > 0.0)) throw ModelError("rayleigh_ratio: alpha' sigma2 alpha <= 0");
  return num / den;
}

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& sigma1,
                                        const Eigen::MatrixXd& sigma2) {
  return whitened_eigs(sigma1, sigma2).values;
}

LtSolution optimal_alpha_canonical(const CanonicalPair& cp) {
  const double sb = std::sqrt(cp.beta());
  Eigen::VectorXd alpha(3);
  alpha << -0.5 * (cp.w2() + sb), -0.5 * (cp.w2() - sb), 1.0;
  const double lm = lambda_max(cp);
  return {normalize_largest_coord(std::move(alpha)), lm, scalar_g(lm)};
}

LtSolution optimize_alpha_numeric(const Eigen::MatrixXd& sigma1,
                                  const Eigen::MatrixXd& sigma2) {
  if (sigma1.rows() < 2) {
    throw ModelError("optimize_alpha_numeric: needs dimension >= 2");
  }
  const auto eigs = whitened_eigs(sigma1, sigma2);
  const Eigen::Index last = eigs.values.size() - 1;
  const double low = eigs.values[0], high = eigs.values[last];
  const Eigen::Index pick = folded(high) >= folded(low) ? last : 0;
  return {normalize_largest_coord(eigs.alphas.col(pick)),
          folded(eigs.values[pick]), scalar_g(folded(eigs.values[pick]))};
}

ZeroCoordinateReport verify_zero_coordinate(const GaussianTree& t1,
                                            const GaussianTree& t2, int node) {
  if (!has_identical_local_structure(t1, t2, node)) {
    throw ModelError("verify_zero_coordinate: node " + std::to_string(node) +
                     " does not have identical local structure in both trees");
  }
  const Eigen::MatrixXd s1 = build_covariance(t1).mat();
  const Eigen::MatrixXd s2 = build_covariance(t2).mat();
  const double full = optimize_alpha_numeric(s1, s2).ci;
  // Forcing alpha_node = 0 reduces the quotient to the submatrices without
  // that row and column.
  const double constrained =
      optimize_alpha_numeric(drop_variable(s1, node - 1), drop_variable(s2, node - 1)).ci;
  return {node, full, constrained, full - constrained};
}

DimensionMonotonicityReport dimension_monotonicity_check(
    const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, int p, int q,
    int trials, std::uint64_t seed) {
  const int n = static_cast<int>(sigma1.rows());
  if (!(1 <= q && q <= p && p <= n)) {
    throw ModelError("dimension_monotonicity_check: need 1 <= q <= p <= N");
  }
  if (trials < 1) throw ModelError("dimension_monotonicity_check: trials < 1");

  auto mapped_ci = [&](const Eigen::MatrixXd& a) {
    return chernoff(a * sigma1 * a.transpose(), a * sigma2 * a.transpose()).value;
  };
  auto random_rows = [&](int rows, std::uint64_t stream) {
    NormalSampler normal(derive_seed(seed, stream, 0));
    Eigen::MatrixXd m(rows, n);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = normal();
    return m;
  };

  DimensionMonotonicityReport report;
  report.q = q;
  report.p = p;
  report.trials = trials;

  Eigen::MatrixXd best_q_map;
  if (q == 1) {
    const LtSolution opt = optimize_alpha_numeric(sigma1, sigma2);
    report.best_q_ci = opt.ci;
    best_q_map = opt.alpha.transpose();
  } else {
    report.best_q_ci = -1.0;
    for (int t = 0; t < trials; ++t) {
      Eigen::MatrixXd m = random_rows(q, static_cast<std::uint64_t>(t));
      const double ci = mapped_ci(m);
      if (ci > report.best_q_ci) {
        report.best_q_ci = ci;
        best_q_map = std::move(m);
      }
    }
  }

  if (p == q) {
    report.best_p_ci = report.best_q_ci;
  } else if (p == n) {
    report.best_p_ci = chernoff(sigma1, sigma2).value;
  } else {
    report.best_p_ci = -1.0;
    for (int t = 0; t < trials; ++t) {
      Eigen::MatrixXd ext(p, n);
      ext.topRows(q) = best_q_map;
      ext.bottomRows(p - q) =
          random_rows(p - q, derive_seed(seed, 1, static_cast<std::uint64_t>(t)));
      report.best_p_ci = std::max(report.best_p_ci, mapped_ci(ext));
    }
  }

  report.holds = report.best_q_ci <= report.best_p_ci + 1e-10;
  return report;
}

}  // namespace treeci
