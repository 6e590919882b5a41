#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "treeci/tree_model.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(TREECI_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string temp_dir() {
  static const std::string dir = [] {
    std::string d = "/tmp/treeci_cli_test_XXXXXX";
    REQUIRE(mkdtemp(d.data()) != nullptr);
    return d;
  }();
  return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = temp_dir() + "/" + name;
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kCanonical1 = "nodes 3\nedge 1 2 0.5\nedge 1 3 0.6\n";
const std::string kCanonical2 = "nodes 3\nedge 1 2 0.5\nedge 2 3 0.6\n";

}  // namespace

TEST_CASE("ci subcommand") {
  const auto t1 = write_temp("c1.txt", kCanonical1);
  const auto t2 = write_temp("c2.txt", kCanonical2);

  SUBCASE("canonical pair value") {
    const auto res = run_cli("ci " + t1 + " " + t2);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("0.0657881788944") != std::string::npos);
    CHECK(res.output.find("lambda_star") != std::string::npos);
  }
  SUBCASE("identical files give zero") {
    const auto res = run_cli("ci " + t1 + " " + t1);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("chernoff_information 0\n") != std::string::npos);
  }
  SUBCASE("missing input file exits with code 2") {
    const auto res = run_cli("ci " + temp_dir() + "/absent.txt " + t2);
    CHECK(res.exit_code == 2);
  }
  SUBCASE("malformed weight exits with code 2") {
    const auto bad = write_temp("bad.txt", "nodes 2\nedge 1 2 1.0\n");
    const auto res = run_cli("ci " + bad + " " + bad);
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("line 2") != std::string::npos);
  }
  SUBCASE("dimension mismatch exits with code 1") {
    const auto small = write_temp("small.txt", "nodes 2\nedge 1 2 0.5\n");
    const auto res = run_cli("ci " + t1 + " " + small);
    CHECK(res.exit_code == 1);
  }
}

TEST_CASE("reduce subcommand") {
  const auto t1 = write_temp("r1.txt", kCanonical1);
  const auto t2 = write_temp("r2.txt", kCanonical2);

  SUBCASE("canonical parameters are reported") {
    const auto res = run_cli("reduce " + t1 + " " + t2);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("lambda_max           2.08225035112") != std::string::npos);
    CHECK(res.output.find("ratio_ci2_ci1        1.9712703563") != std::string::npos);
  }
  SUBCASE("identical trees are a trivial graft") {
    const auto res = run_cli("reduce " + t1 + " " + t1);
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("trivial") != std::string::npos);
  }
  SUBCASE("pairs two edits apart are rejected") {
    const auto chain =
        write_temp("r3.txt", "nodes 4\nedge 1 2 0.5\nedge 2 3 0.6\nedge 3 4 0.7\n");
    const auto star =
        write_temp("r4.txt", "nodes 4\nedge 1 2 0.5\nedge 1 3 0.6\nedge 1 4 0.7\n");
    const auto res = run_cli("reduce " + chain + " " + star);
    CHECK(res.exit_code == 1);
  }
}

TEST_CASE("graft subcommand") {
  const auto tree = write_temp("g.txt", "nodes 4\nedge 1 2 0.5\nedge 2 3 0.6\nedge 2 4 0.7\n");
  const std::string out1 = temp_dir() + "/g_t1.txt";
  const std::string out2 = temp_dir() + "/g_t2.txt";

  SUBCASE("valid grafts write both trees") {
    const auto res =
        run_cli("graft " + tree + " 2 4 3 --out1 " + out1 + " --out2 " + out2);
    CHECK(res.exit_code == 0);
    const auto back1 = treeci::parse_tree(slurp(out1));
    const auto back2 = treeci::parse_tree(slurp(out2));
    CHECK(back1.has_edge(2, 4));
    CHECK(back2.has_edge(3, 4));
    CHECK(!back2.has_edge(2, 4));
  }
  SUBCASE("attach node inside the severed subtree is a domain error") {
    const auto res =
        run_cli("graft " + tree + " 2 3 3 --out1 " + out1 + " --out2 " + out2);
    CHECK(res.exit_code == 1);
  }
}

TEST_CASE("lt subcommand") {
  const auto t1 = write_temp("l1.txt", kCanonical1);
  const auto t2 = write_temp("l2.txt", kCanonical2);
  const auto res = run_cli("lt " + t1 + " " + t2);
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("ci1                 0.0333734937393") != std::string::npos);
  CHECK(res.output.find("closed_form_ci1        0.0333734937393") != std::string::npos);

  SUBCASE("identical trees flag the undefined direction") {
    const auto res2 = run_cli("lt " + t1 + " " + t1);
    CHECK(res2.exit_code == 0);
    CHECK(res2.output.find("alpha_undefined") != std::string::npos);
  }
}

TEST_CASE("simulate subcommand is seed-deterministic") {
  const auto t1 = write_temp("s1.txt", kCanonical1);
  const auto t2 = write_temp("s2.txt", kCanonical2);
  const std::string csv1 = temp_dir() + "/sim1.csv";
  const std::string csv2 = temp_dir() + "/sim2.csv";
  const std::string flags = " --mode full --trials 10000 --tmax 30 --tsteps 3 --seed 11 --out ";
  const auto a = run_cli("simulate " + t1 + " " + t2 + flags + csv1);
  const auto b = run_cli("simulate " + t1 + " " + t2 + flags + csv2);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  const std::string body = slurp(csv1);
  CHECK(body == slurp(csv2));
  CHECK(body.rfind("T,errors,trials,pe,minus_ln_pe\n", 0) == 0);
  CHECK(a.output.find("fitted_slope") != std::string::npos);

  SUBCASE("too few trials is a domain error") {
    const auto res = run_cli("simulate " + t1 + " " + t2 + " --trials 100");
    CHECK(res.exit_code == 1);
  }
  SUBCASE("lt mode reports the scalar reference") {
    const auto res = run_cli("simulate " + t1 + " " + t2 +
                             " --mode lt --trials 10000 --tmax 30 --tsteps 3 --seed 5");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("ci_reference        0.0333734937393") != std::string::npos);
  }
}

TEST_CASE("surface subcommand") {
  const std::string csv = temp_dir() + "/surface.csv";
  const auto res = run_cli("surface --w1-steps 6 --w2-steps 6 --out " + csv);
  CHECK(res.exit_code == 0);
  const std::string body = slurp(csv);
  std::istringstream lines(body);
  std::string line;
  int data_rows = 0;
  bool header_seen = false;
  while (std::getline(lines, line)) {
    if (line == "w1,w2,ci1,ci2,ratio,lambda_max") {
      header_seen = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    ++data_rows;
    // 5th column is the ratio
    std::istringstream cells(line);
    std::string cell;
    for (int k = 0; k < 5; ++k) std::getline(cells, cell, ',');
    const double ratio = std::stod(cell);
    CHECK(ratio >= 1.0 - 1e-9);
    CHECK(ratio <= 2.0 + 1e-9);
  }
  CHECK(header_seen);
  CHECK(data_rows == 36);  // 6x6 grid avoids w2 = 0

  SUBCASE("unknown flags exit with code 2") {
    const auto bad = run_cli("surface --nope 3");
    CHECK(bad.exit_code == 2);
  }
}
