#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "treeci/experiment.hpp"
#include "treeci/info_engine.hpp"
#include "treeci/lt_observe.hpp"
#include "treeci/reduction.hpp"
#include "treeci/tree_model.hpp"

namespace {

using nlohmann::json;

constexpr int kExitDomainError = 1;
constexpr int kExitParseError = 2;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

treeci::GaussianTree read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw treeci::ParseError("cannot open `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return treeci::parse_tree(buf.str());
  } catch (const treeci::ParseError& e) {
    throw treeci::ParseError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw treeci::ParseError("cannot write `" + path + "`");
  out << content;
}

void require_same_dimension(const treeci::GaussianTree& a, const treeci::GaussianTree& b) {
  if (a.node_count() != b.node_count()) {
    throw treeci::ModelError("trees have different node counts (" +
                             std::to_string(a.node_count()) + " vs " +
                             std::to_string(b.node_count()) + ")");
  }
}

std::vector<double> linspace(double lo, double hi, int steps) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(steps));
  if (steps == 1) {
    out.push_back(0.5 * (lo + hi));
    return out;
  }
  for (int k = 0; k < steps; ++k) {
    out.push_back(lo + (hi - lo) * static_cast<double>(k) / (steps - 1));
  }
  return out;
}

int cmd_ci(const std::string& path1, const std::string& path2, const std::string& out) {
  const auto t1 = read_tree_file(path1);
  const auto t2 = read_tree_file(path2);
  require_same_dimension(t1, t2);
  const Eigen::MatrixXd s1 = treeci::build_covariance(t1).mat();
  const Eigen::MatrixXd s2 = treeci::build_covariance(t2).mat();
  const auto res = treeci::chernoff(s1, s2);
  std::cout << "chernoff_information " << fmt(res.value) << "\n"
            << "lambda_star          " << fmt(res.lambda_star) << "\n"
            << "kl_to_tree1          " << fmt(res.kl_to_1) << "\n"
            << "kl_to_tree2          " << fmt(res.kl_to_2) << "\n"
            << "det_sigma1           " << fmt(treeci::tree_determinant(t1)) << "\n"
            << "det_sigma2           " << fmt(treeci::tree_determinant(t2)) << "\n";
  if (!out.empty()) {
    json j{{"chernoff_information", res.value},
           {"lambda_star", res.lambda_star},
           {"kl_to_tree1", res.kl_to_1},
           {"kl_to_tree2", res.kl_to_2},
           {"det_sigma1", treeci::tree_determinant(t1)},
           {"det_sigma2", treeci::tree_determinant(t2)}};
    write_file(out, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_reduce(const std::string& path1, const std::string& path2,
               const std::string& out) {
  const auto t1 = read_tree_file(path1);
  const auto t2 = read_tree_file(path2);
  require_same_dimension(t1, t2);
  const auto pair = treeci::detect_graft(t1, t2);
  const auto cp = treeci::reduce_pair(pair);
  const double lm = treeci::lambda_max(cp);
  const auto norm = treeci::normalized_ci(cp);
  std::cout << "cut_edge             (" << pair.cut_i << "," << pair.cut_j << ")\n"
            << "attach_node          " << pair.attach_k << "\n"
            << "w1                   " << fmt(cp.w1()) << "\n"
            << "w2                   " << fmt(cp.w2()) << "\n"
            << "beta                 " << fmt(cp.beta()) << "\n"
            << "lambda_max           " << fmt(lm) << "\n"
            << "ci1_lt               " << fmt(norm.ci1) << "\n"
            << "ci2_full             " << fmt(norm.ci2) << "\n"
            << "ratio_ci2_ci1        " << fmt(norm.ratio) << "\n"
            << "normalized_ratio     " << fmt(norm.normalized_ratio) << "\n";
  if (!out.empty()) {
    json j{{"cut_i", pair.cut_i},    {"cut_j", pair.cut_j},
           {"attach_k", pair.attach_k}, {"w1", cp.w1()},
           {"w2", cp.w2()},          {"beta", cp.beta()},
           {"lambda_max", lm},       {"ci1_lt", norm.ci1},
           {"ci2_full", norm.ci2},   {"ratio_ci2_ci1", norm.ratio},
           {"normalized_ratio", norm.normalized_ratio}};
    write_file(out, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_graft(const std::string& path, int cut_i, int cut_j, int attach_k,
              const std::string& out1, const std::string& out2) {
  const auto tree = read_tree_file(path);
  const auto pair = treeci::graft(tree, cut_i, cut_j, attach_k);
  write_file(out1, treeci::serialize_tree(pair.tree1));
  write_file(out2, treeci::serialize_tree(pair.tree2));
  std::cout << "w2 " << fmt(pair.w2) << "\n"
            << "w1 " << fmt(pair.w1) << "\n"
            << "wrote " << out1 << " and " << out2 << "\n";
  return 0;
}

int cmd_lt(const std::string& path1, const std::string& path2, const std::string& out) {
  const auto t1 = read_tree_file(path1);
  const auto t2 = read_tree_file(path2);
  require_same_dimension(t1, t2);
  const Eigen::MatrixXd s1 = treeci::build_covariance(t1).mat();
  const Eigen::MatrixXd s2 = treeci::build_covariance(t2).mat();
  const auto sol = treeci::optimize_alpha_numeric(s1, s2);
  const bool degenerate = sol.ratio <= 1.0 + 1e-12;
  std::cout << "alpha               ";
  for (Eigen::Index k = 0; k < sol.alpha.size(); ++k) {
    std::cout << (k ? " " : "") << fmt(sol.alpha[k]);
  }
  std::cout << "\nratio               " << fmt(sol.ratio) << "\n"
            << "ci1                 " << fmt(sol.ci) << "\n";
  if (degenerate) {
    std::cout << "alpha_undefined     true (distributions coincide)\n";
  }
  json j{{"alpha", std::vector<double>(sol.alpha.begin(), sol.alpha.end())},
         {"ratio", sol.ratio},
         {"ci1", sol.ci},
         {"alpha_undefined", degenerate}};
  // For a recognizable grafted pair, also report the closed form.
  try {
    const auto cp = treeci::reduce_pair(treeci::detect_graft(t1, t2));
    const double lm = treeci::lambda_max(cp);
    const auto closed = treeci::optimal_alpha_canonical(cp);
    std::cout << "closed_form_lambda_max " << fmt(lm) << "\n"
              << "closed_form_ci1        " << fmt(closed.ci) << "\n"
              << "numeric_minus_closed   " << fmt(sol.ci - closed.ci) << "\n";
    j["closed_form_lambda_max"] = lm;
    j["closed_form_ci1"] = closed.ci;
  } catch (const treeci::ModelError&) {
    // not a grafted pair; numeric result stands alone
  }
  if (!out.empty()) write_file(out, j.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const std::string& path1, const std::string& path2,
                 const std::string& mode_name, long long trials, int tmax, int tsteps,
                 std::uint64_t seed, const std::string& out) {
  const auto t1 = read_tree_file(path1);
  const auto t2 = read_tree_file(path2);
  require_same_dimension(t1, t2);
  const Eigen::MatrixXd s1 = treeci::build_covariance(t1).mat();
  const Eigen::MatrixXd s2 = treeci::build_covariance(t2).mat();

  treeci::ObservationMode mode = treeci::ObservationMode::full();
  if (mode_name == "lt") {
    mode = treeci::ObservationMode::lt(treeci::optimize_alpha_numeric(s1, s2).alpha);
  } else if (mode_name != "full") {
    throw treeci::ModelError("mode must be `full` or `lt`");
  }

  if (tsteps < 1 || tmax < tsteps) {
    throw treeci::ModelError("need tmax >= tsteps >= 1");
  }
  std::vector<int> grid;
  for (int k = 1; k <= tsteps; ++k) {
    const int t = tmax * k / tsteps;
    if (grid.empty() || grid.back() != t) grid.push_back(t);
  }

  const auto est = treeci::simulate_exponent(s1, s2, mode, grid, trials, seed);

  std::ostringstream csv;
  csv << "T,errors,trials,pe,minus_ln_pe\n";
  csv.precision(12);
  for (size_t k = 0; k < est.sample_lengths.size(); ++k) {
    csv << est.sample_lengths[k] << ',' << est.error_counts[k] << ',' << est.trials
        << ',' << est.error_rates[k] << ',';
    if (est.error_counts[k] > 0) {
      csv << -std::log(est.error_rates[k]);
    } else {
      csv << "inf";
    }
    csv << '\n';
  }
  if (!out.empty()) {
    write_file(out, csv.str());
  } else {
    std::cout << csv.str();
  }
  std::cout << "fitted_slope        " << fmt(est.slope) << "\n"
            << "slope_se            " << fmt(est.slope_se) << "\n"
            << "ci_reference        " << fmt(est.ci_reference) << "\n";
  if (est.lower_bound_only) {
    std::cout << "lower_bound_only    true (no errors at largest T)\n";
  }
  return 0;
}

int cmd_surface(int w1_steps, int w2_steps, const std::string& out) {
  if (w1_steps < 2 || w2_steps < 2) {
    throw treeci::ModelError("surface needs at least 2 steps per axis");
  }
  const auto rows =
      treeci::ratio_surface(linspace(-0.9, 0.9, w1_steps), linspace(-0.9, 0.9, w2_steps));
  std::ostringstream csv;
  csv << "w1,w2,ci1,ci2,ratio,lambda_max\n";
  csv.precision(12);
  for (const auto& row : rows) {
    if (!row.valid) {
      csv << "# skipped w1=" << row.w1 << " w2=" << row.w2
          << " (outside weight domain)\n";
      continue;
    }
    csv << row.w1 << ',' << row.w2 << ',' << row.ci1 << ',' << row.ci2 << ','
        << row.ratio << ',' << row.lambda_max << '\n';
  }
  if (!out.empty()) {
    write_file(out, csv.str());
  } else {
    std::cout << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chernoff information toolkit for Gaussian trees"};
  app.require_subcommand(1);

  std::string path1, path2, out;
  std::string mode = "full";
  long long trials = 100000;
  int tmax = 200, tsteps = 10;
  int cut_i = 0, cut_j = 0, attach_k = 0;
  int w1_steps = 50, w2_steps = 50;
  std::uint64_t seed = 1;
  std::string out1 = "graft_tree1.txt", out2 = "graft_tree2.txt";

  auto* ci = app.add_subcommand("ci", "Chernoff information between two tree files");
  ci->add_option("tree1", path1)->required();
  ci->add_option("tree2", path2)->required();
  ci->add_option("--out", out, "write the report as JSON");

  auto* reduce = app.add_subcommand(
      "reduce", "reduce a grafted pair to its 3-node canonical parameters");
  reduce->add_option("tree1", path1)->required();
  reduce->add_option("tree2", path2)->required();
  reduce->add_option("--out", out, "write the report as JSON");

  auto* graft_cmd =
      app.add_subcommand("graft", "cut edge (i,j) and reattach j below node k");
  graft_cmd->add_option("tree", path1)->required();
  graft_cmd->add_option("i", cut_i)->required();
  graft_cmd->add_option("j", cut_j)->required();
  graft_cmd->add_option("k", attach_k)->required();
  graft_cmd->add_option("--out1", out1, "output file for the original tree");
  graft_cmd->add_option("--out2", out2, "output file for the grafted tree");

  auto* lt = app.add_subcommand("lt", "optimal 1-dim linear-transform observation");
  lt->add_option("tree1", path1)->required();
  lt->add_option("tree2", path2)->required();
  lt->add_option("--out", out, "write the report as JSON");

  auto* simulate =
      app.add_subcommand("simulate", "Monte Carlo error-exponent estimate");
  simulate->add_option("tree1", path1)->required();
  simulate->add_option("tree2", path2)->required();
  simulate->add_option("--mode", mode, "full or lt")->check(CLI::IsMember({"full", "lt"}));
  simulate->add_option("--trials", trials, "trials per T (>= 10^4)");
  simulate->add_option("--tmax", tmax, "largest sample length");
  simulate->add_option("--tsteps", tsteps, "number of T grid points");
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--out", out, "write per-T results as CSV");

  auto* surface = app.add_subcommand("surface", "CI2/CI1 ratio over a (w1,w2) grid");
  surface->add_option("--w1-steps", w1_steps, "grid points for w1 in (-0.9, 0.9)");
  surface->add_option("--w2-steps", w2_steps, "grid points for w2 in (-0.9, 0.9)");
  surface->add_option("--out", out, "write the surface as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParseError;
  }

  try {
    if (*ci) return cmd_ci(path1, path2, out);
    if (*reduce) return cmd_reduce(path1, path2, out);
    if (*graft_cmd) return cmd_graft(path1, cut_i, cut_j, attach_k, out1, out2);
    if (*lt) return cmd_lt(path1, path2, out);
    if (*simulate)
      return cmd_simulate(path1, path2, mode, trials, tmax, tsteps, seed, out);
    if (*surface) return cmd_surface(w1_steps, w2_steps, out);
  } catch (const treeci::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const treeci::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return 0;
}
