#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "difftest/rng.hpp"
#include "difftest/simulator.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(DIFFTEST_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) return {};
  const auto end = text.find_first_of(" \n", pos);
  return text.substr(pos + key.size() + 1, end - pos - key.size() - 1);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("difftest_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesHeaderAndRows) {
  const auto r = run("simulate --model ou --n 100 --seed 42 --out " + path("a.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("n=100"), std::string::npos);
  EXPECT_NE(r.out.find("T=4.64158"), std::string::npos);
  const std::string csv = slurp(path("a.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1");
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 102u);  // header + 101 observations

  ASSERT_EQ(run("simulate --model ou --n 100 --seed 42 --out " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("b.csv")), csv);
}

TEST_F(Cli, SimulateMouHeaderAndStdout) {
  const auto r = run("simulate --model mou --n 10 --seed 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,x1,x2");
}

TEST_F(Cli, EstimateReportsConvergence) {
  ASSERT_EQ(run("simulate --model ou --n 1000 --seed 3 --out " + path("s.csv")).code, 0);
  const auto r = run("estimate --model OU --sample " + path("s.csv") + " --init 0.5,0.5,0.25");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("converged=true"), std::string::npos);
  EXPECT_FALSE(field(r.out, "theta_hat").empty());
}

TEST_F(Cli, TestLogEqualsGqlrtAndDegenerateBoundsGiveZero) {
  ASSERT_EQ(run("simulate --model ou --n 500 --seed 8 --out " + path("s.csv")).code, 0);
  const auto log = run("test --model ou --sample " + path("s.csv") + " --phi log");
  const auto gq = run("test --model ou --sample " + path("s.csv") + " --phi gqlrt");
  ASSERT_EQ(log.code, 0);
  EXPECT_EQ(field(log.out, "statistic"), field(gq.out, "statistic"));
  EXPECT_GE(std::stod(field(log.out, "statistic")), 0.0);

  const auto fixed = run("test --model ou --sample " + path("s.csv") +
                         " --phi akl --lower 0.5,0.5,0.25 --upper 0.5,0.5,0.25");
  ASSERT_EQ(fixed.code, 0);
  EXPECT_EQ(field(fixed.out, "statistic"), "0");
  EXPECT_EQ(field(fixed.out, "decision"), "accept");
}

TEST_F(Cli, TestReportsTheoreticalPower) {
  ASSERT_EQ(run("simulate --model ou --n 1000 --seed 5 --out " + path("s.csv")).code, 0);
  const auto r = run("test --model ou --sample " + path("s.csv") + " --power-h 0.5");
  ASSERT_EQ(r.code, 0);
  const double mu = std::stod(field(r.out, "noncentrality"));
  // h'Ih with h = (0.5, 0.5, 0.5) and the OU information is 8.25.
  EXPECT_GT(mu, 4.0);
  EXPECT_LT(mu, 14.0);
  EXPECT_GT(std::stod(field(r.out, "theoretical_power")), 0.05);
}

// Samples under theta0 are rejected in about 5% of seeds.
TEST_F(Cli, TestRejectsAtNominalRateUnderNull) {
  const auto ou = difftest::make_builtin_model("OU");
  int rejects = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = difftest::simulate(ou.model, ou.theta0, ou.x0, difftest::SamplingScheme::rapidly_increasing(1000),
                                      difftest::derive_seed(77, {seed}));
    {
      std::ofstream out(path("s.csv"));
      difftest::write_sample_csv(s, out);
    }
    const auto r = run("test --model ou --sample " + path("s.csv") + " --phi akl --alpha 0.05");
    ASSERT_EQ(r.code, 0);
    rejects += field(r.out, "decision") == "reject";
  }
  // Binomial(100, 0.05): P(X > 13) < 1e-3.
  EXPECT_LE(rejects, 13);
}

TEST_F(Cli, PowerFastProfileAndCsv) {
  {
    std::ofstream cfg(path("c.json"));
    cfg << R"({"model": "OU", "n": 50, "profile": "fast"})";
  }
  const auto r = run("power --config " + path("c.json") + " --csv " + path("p.csv") + " --threads 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("h=1.00"), std::string::npos);
  EXPECT_NE(r.out.find("lambda=-20"), std::string::npos);
  const std::string csv = slurp(path("p.csv"));
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 13u * 6u);
  EXPECT_NE(csv.find("OU,50,akl,0,0.05,200,0,"), std::string::npos);

  const auto t = run("tables --csv " + path("p.csv"));
  ASSERT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("model=OU n=50 R=200"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("simulate --model heston --n 10 --seed 1").code, 2);
  EXPECT_EQ(run("simulate --model ou --n 10").code, 2);
  EXPECT_EQ(run("estimate --model ou --sample " + path("missing.csv") + " --init 0.5,0.5,0.25").code, 2);
  {
    std::ofstream cfg(path("bad.json"));
    cfg << R"({"model": "OU", "bogus": 1})";
  }
  EXPECT_EQ(run("power --config " + path("bad.json")).code, 2);
  EXPECT_EQ(run("test --model ou --sample x.csv --alpha 2").code, 2);

  // CIR sample containing a zero state: Sigma is singular, a numeric failure.
  {
    std::ofstream s(path("zero.csv"));
    s << "t,x1\n0,1\n0.1,0\n0.2,0.5\n";
  }
  EXPECT_EQ(run("estimate --model cir --sample " + path("zero.csv") + " --init 0.5,0.5,0.125").code, 3);
}

TEST_F(Cli, NonConvergenceIsPartial) {
  ASSERT_EQ(run("simulate --model ou --n 200 --seed 3 --out " + path("s.csv")).code, 0);
  const auto r = run("estimate --model ou --sample " + path("s.csv") + " --init 0.5,0.5,0.25 --max-evaluations 8");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("converged=false"), std::string::npos);
  const auto t = run("test --model ou --sample " + path("s.csv") + " --max-evaluations 8");
  EXPECT_EQ(t.code, 4);
  EXPECT_FALSE(field(t.out, "decision").empty());
}
