#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "perturbreg/io/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + PERTURBREG_CLI + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("perturbreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string line_csv(std::size_t n) {
  std::ostringstream out;
  out << "t,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = perturbreg::GridFunction::node(0.0, 1.0, n, i);
    out << perturbreg::io::format_real(t) << ',' << perturbreg::io::format_real(3 * t - 1) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_F(Cli, DifferentiatesLine) {
  write(path("line.csv"), line_csv(101));
  ASSERT_EQ(run("differentiate " + path("line.csv") + " --alpha 0.1 --out " + path("dy.csv")), 0);
  std::ifstream in(path("dy.csv"));
  const auto table = perturbreg::io::read_table(in);
  ASSERT_EQ(table.header, (std::vector<std::string>{"t", "dy", "x_alpha"}));
  for (double dy : table.columns[1]) EXPECT_NEAR(dy, 3.0, 1e-8);
}

TEST_F(Cli, BadInputExitCodes) {
  write(path("line.csv"), line_csv(11));
  write(path("bad.csv"), "t,y\n0,1\n1,abc\n");
  write(path("skew.csv"), "t,y\n0,1\n0.3,2\n1,3\n");
  EXPECT_EQ(run("differentiate " + path("bad.csv") + " --alpha 0.1"), 2);
  EXPECT_EQ(run("differentiate " + path("missing.csv") + " --alpha 0.1"), 2);
  EXPECT_EQ(run("differentiate " + path("line.csv")), 2);
  EXPECT_EQ(run("differentiate " + path("line.csv") + " --alpha -1"), 2);
  EXPECT_EQ(run("differentiate " + path("line.csv") + " --delta 0.01 --rule cubic"), 2);
  EXPECT_EQ(run("differentiate " + path("line.csv") + " --alpha 0.1 --baseline 1"), 2);
  EXPECT_EQ(run("differentiate " + path("skew.csv") + " --alpha 0.1"), 3);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("experiment --example 9 --out " + path("x")), 2);
}

TEST_F(Cli, StrictRejectsUnresolvedAlpha) {
  write(path("line.csv"), line_csv(11));
  EXPECT_EQ(run("differentiate " + path("line.csv") + " --alpha 0.01 --out " + path("a.csv")), 0);
  EXPECT_EQ(run("differentiate " + path("line.csv") + " --alpha 0.01 --strict --out " + path("b.csv")), 4);
  EXPECT_FALSE(fs::exists(path("b.csv")));
}

TEST_F(Cli, SolveDiagonal) {
  write(path("p.json"), R"({"matrix":[[0,0],[0,1]],"rhs":[0,1],"alpha":0.01})");
  ASSERT_EQ(run("solve " + path("p.json") + " --out " + path("r.json")), 0);
  const auto r = json::parse(slurp(path("r.json")));
  EXPECT_NEAR(r["solution"][0].get<double>(), 0.0, 1e-15);
  EXPECT_NEAR(r["solution"][1].get<double>(), 1 / 1.01, 1e-12);
}

TEST_F(Cli, SolveSingular) {
  write(path("p.json"), R"({"matrix":[[-0.1,0],[0,1]],"rhs":[1,1],"alpha":0.1})");
  EXPECT_EQ(run("solve " + path("p.json")), 5);
  write(path("q.json"), R"({"matrix":[[1,2]],"rhs":[1],"alpha":0.1})");
  EXPECT_EQ(run("solve " + path("q.json")), 2);
}

TEST_F(Cli, SolveSampleReportsBoundAboveError) {
  ASSERT_EQ(run(std::string("solve ") + PERTURBREG_SAMPLES + "/volterra_linear.json --out " + path("r.json")), 0);
  const auto r = json::parse(slurp(path("r.json")));
  ASSERT_TRUE(r.contains("bound"));
  EXPECT_GE(r["bound"].get<double>(), r["observed_error"].get<double>());
  EXPECT_FALSE(r["q_exceeded"].get<bool>());
}

TEST_F(Cli, SolveFredholmSample) {
  ASSERT_EQ(run(std::string("solve ") + PERTURBREG_SAMPLES + "/fredholm_diag.json --out " + path("r.json")), 0);
  const auto r = json::parse(slurp(path("r.json")));
  EXPECT_NEAR(r["solution"][0].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(r["solution"][1].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(r["solution"][2].get<double>(), 0.5, 1e-12);
  EXPECT_LE(std::abs(r["selection_functionals"][0].get<double>()), 1e-10);
}

TEST_F(Cli, LargeQIsWarningNotFailure) {
  write(path("p.json"), R"({"operator":"volterra","interval":[0,1],"n":33,"alpha":0.1,"delta":0.1,
      "rhs":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]})");
  ASSERT_EQ(run("solve " + path("p.json") + " --out " + path("r.json")), 0);
  const auto r = json::parse(slurp(path("r.json")));
  EXPECT_TRUE(r["q_exceeded"].get<bool>());
  EXPECT_GE(r["q_est"].get<double>(), 1.0);
}

TEST_F(Cli, ExperimentIsDeterministicAndReplayable) {
  const std::string flags = " --example 1 --deltas 0.1,0.01 --seeds 2 --n 128 --out ";
  ASSERT_EQ(run("experiment" + flags + path("a")), 0);
  ASSERT_EQ(run("experiment" + flags + path("b")), 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(path("a"))) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(fs::path(path("b")) / entry.path().filename())) << entry.path();
  }
  EXPECT_EQ(files, 2u * 2u * 2u + 2u);

  // The logged input replays through differentiate to the logged run.
  const auto input = fs::path(path("a")) / "input_e1_d0.01_s42.csv";
  ASSERT_TRUE(fs::exists(input));
  ASSERT_EQ(run("differentiate " + input.string() + " --delta 0.01 --out " + path("replay.csv")), 0);
  EXPECT_EQ(slurp(path("replay.csv")), slurp(fs::path(path("a")) / "run_e1_d0.01_s42.csv"));
}

TEST_F(Cli, SeedFromEnvironment) {
  ASSERT_EQ(std::system(("PERTURBREG_SEED=7 \"" + std::string(PERTURBREG_CLI) + "\" experiment --deltas 0.1 --n 64 --out " +
                         path("e") + " 2>/dev/null")
                            .c_str()),
            0);
  EXPECT_TRUE(fs::exists(fs::path(path("e")) / "input_e1_d0.1_s7.csv"));
}

TEST_F(Cli, SweepGaps) {
  // Linear solution on a grid that resolves the kernel: 0 < S <= alpha.
  std::string ramp, ones;
  for (int i = 0; i < 257; ++i) {
    ramp += (i ? "," : "") + perturbreg::io::format_real(perturbreg::GridFunction::node(0.0, 1.0, 257, i));
    ones += (i ? ",1" : "1");
  }
  write(path("l.json"), R"({"operator":"volterra","interval":[0,1],"n":257,"alpha":0.1,"exact_solution":[)" + ramp + "]}");
  ASSERT_EQ(run("sweep " + path("l.json") + " --alphas 0.1,0.05 --out " + path("s.csv")), 0);
  std::ifstream in(path("s.csv"));
  const auto table = perturbreg::io::read_table(in);
  ASSERT_EQ(table.header, (std::vector<std::string>{"alpha", "S", "c_alpha_est", "q_est"}));
  ASSERT_EQ(table.columns[0].size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GT(table.columns[1][i], 0.0);
    EXPECT_LE(table.columns[1][i], table.columns[0][i] * (1 + 1e-9));
  }

  write(path("c.json"), R"({"operator":"volterra","interval":[0,1],"n":257,"alpha":0.1,"exact_solution":[)" + ones + "]}");
  ASSERT_EQ(run("sweep " + path("c.json") + " --alphas 0.1 --out " + path("c.csv")), 0);
  std::ifstream cin(path("c.csv"));
  EXPECT_NEAR(perturbreg::io::read_table(cin).columns[1][0], 1.0, 1e-12);

  EXPECT_EQ(run(std::string("sweep ") + PERTURBREG_SAMPLES + "/volterra_linear.json --alphas 0.1 --out " + path("v.csv")), 0);
  EXPECT_EQ(run(std::string("sweep ") + PERTURBREG_SAMPLES + "/volterra_linear.json --alphas \"\""), 2);
  EXPECT_EQ(run(std::string("sweep ") + PERTURBREG_SAMPLES + "/volterra_linear.json --alphas 0.1,-1"), 2);
}
