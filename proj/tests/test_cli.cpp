// Scenario parsing and the command-line contract
#include "commands.hpp"
#include "figures.hpp"
#include "scenario.hpp"

#include <oupop/errors.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace oupop;
using namespace oupop::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_rows(const fs::path &p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oupop_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string &name, const std::string &text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char *kLogisticK = R"(# perturbed carrying capacity
model = logistic-k
a = 3
alpha = 2
beta = 1
gamma = 0.1
x0 = 2.4
horizon = 5
seeds = 5
)";

} // namespace

// =============================================================================
// Scenario parsing
// =============================================================================

TEST(Scenario, ParsesCommentsAndTrims) {
  std::istringstream is("# c\n  a = 3  \n\nmodel=logistic-k # trailing\n");
  auto kv = parse_key_values(is);
  EXPECT_EQ(kv.at("a"), "3");
  EXPECT_EQ(kv.at("model"), "logistic-k");
}

TEST(Scenario, DuplicateKeyIsConfigError) {
  std::istringstream is("a = 3\na = 4\n");
  EXPECT_THROW(parse_key_values(is), ConfigError);
}

TEST(Scenario, MissingAlphaNamesField) {
  std::istringstream is("model = logistic-k\na = 3\ngamma = 0.1\nx0 = 1\nhorizon = 1\n");
  try {
    scenario_from_key_values(parse_key_values(is));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field(), "alpha");
  }
}

TEST(Scenario, UnknownKeyRejected) {
  std::istringstream is(std::string(kLogisticK) + "lambda = 3\n");
  try {
    scenario_from_key_values(parse_key_values(is));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.field(), "lambda");
  }
}

TEST(Scenario, FormatRoundTrips) {
  std::istringstream is(kLogisticK);
  const auto s = scenario_from_key_values(parse_key_values(is));
  std::istringstream again(format_scenario(s));
  const auto t = scenario_from_key_values(parse_key_values(again));
  EXPECT_EQ(format_scenario(s), format_scenario(t));
  EXPECT_EQ(t.seeds().size(), 5u);
  EXPECT_EQ(t.seeds()[0].value, 42u);
  EXPECT_EQ(t.seeds()[4].value, 46u);
}

TEST(Scenario, EveryFigureScenarioRoundTrips) {
  for (const auto &fig : figure_manifest(42))
    for (const auto &panel : fig.panels)
      if (const auto *s = std::get_if<Scenario>(&panel.job)) {
        std::istringstream is(format_scenario(*s));
        EXPECT_NO_THROW(scenario_from_key_values(parse_key_values(is))) << fig.id;
      }
}

// =============================================================================
// simulate
// =============================================================================

TEST_F(Cli, SimulateWritesBundle) {
  const auto sc = write("k.txt", kLogisticK);
  const auto r = run({"--out-dir", (dir_ / "out").string(), "simulate", sc.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int s = 42; s < 47; ++s) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / ("trajectory_seed" + std::to_string(s) + ".csv")));
    EXPECT_TRUE(fs::exists(dir_ / "out" / ("noise_seed" + std::to_string(s) + ".csv")));
  }
  EXPECT_TRUE(fs::exists(dir_ / "out" / "envelope.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "absorption.csv"));
  EXPECT_EQ(read_rows(dir_ / "out" / "absorption.csv").size(), 5u);
}

TEST_F(Cli, SimulateNoNoiseEnvelopeCollapses) {
  std::string text = kLogisticK;
  text.replace(text.find("alpha = 2"), 9, "alpha = 0");
  const auto sc = write("k0.txt", text);
  ASSERT_EQ(run({"--out-dir", (dir_ / "o").string(), "simulate", sc.string()}).code, 0);
  for (const auto &row : read_rows(dir_ / "o" / "envelope.csv"))
    EXPECT_EQ(row[1], row[2]);
}

TEST_F(Cli, SimulateMissingAlphaExits2) {
  const auto sc = write("bad.txt", "model = logistic-k\na = 3\ngamma = 0.1\nx0 = 1\nhorizon = 1\n");
  const auto r = run({"simulate", sc.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("alpha"), std::string::npos);
}

TEST_F(Cli, SimulateHandTypedEnvelopeNeedsTrust) {
  const auto sc = write("env.txt", std::string(kLogisticK) +
                                       "envelope_lower = 2.5\nenvelope_upper = 3.5\n");
  const auto out = (dir_ / "o").string();
  EXPECT_EQ(run({"--out-dir", out, "simulate", sc.string()}).code, 2);
  const auto r = run({"--out-dir", out, "simulate", sc.string(), "--trust-envelope"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("hand-typed"), std::string::npos);
}

TEST_F(Cli, SimulateRuntimeFailureExits1) {
  // alpha * z drives a + alpha z below zero
  const auto sc = write("neg.txt", "model = logistic-k\na = 3\nalpha = 50\nbeta = 1\n"
                                   "gamma = 1\nx0 = 1\nhorizon = 5\n");
  EXPECT_EQ(run({"--out-dir", (dir_ / "o").string(), "simulate", sc.string()}).code, 1);
}

TEST_F(Cli, SimulateLotkaVolterraIndependent) {
  const auto sc = write("lv.txt", R"(model = lotka-volterra
lambda = 25
mu = 22
a = 20
b = 4
c = 1
e = 30
alpha = 2
beta = 1
gamma = 0.5
x0 = 3.2
y0 = 1.2
horizon = 3
noise = independent
seeds = 2
)");
  const auto r = run({"--out-dir", (dir_ / "o").string(), "simulate", sc.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "o" / "noise_mu_seed42.csv"));
  EXPECT_EQ(slurp(dir_ / "o" / "trajectory_seed42.csv").substr(0, 6), "t,x,y\n");
}

TEST_F(Cli, SimulateIsByteReproducible) {
  const auto sc = write("k.txt", kLogisticK);
  ASSERT_EQ(run({"--out-dir", (dir_ / "a").string(), "simulate", sc.string()}).code, 0);
  ASSERT_EQ(run({"--out-dir", (dir_ / "b").string(), "simulate", sc.string()}).code, 0);
  for (const auto &e : fs::directory_iterator(dir_ / "a"))
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path();
  ASSERT_EQ(run({"--out-dir", (dir_ / "c").string(), "--seed-base", "7", "simulate",
                 sc.string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "c" / "trajectory_seed7.csv"));
}

// =============================================================================
// calibrate
// =============================================================================

TEST(CliCalibrate, DefaultsPass) {
  const auto r = run({"calibrate", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("verdict = PASS"), std::string::npos);
}

TEST(CliCalibrate, NoNoiseKeepsStart) {
  const auto r = run({"calibrate", "--alpha", "0", "--beta-start", "0.5"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("beta = 0.5"), std::string::npos);
}

TEST(CliCalibrate, ImpossibleExits1) {
  const auto r = run({"calibrate", "--lower", "2.9999999", "--upper", "3.0000001"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("verdict = FAIL"), std::string::npos);
}

TEST(CliCalibrate, BadFlagExits2) {
  EXPECT_EQ(run({"calibrate", "--gamma", "abc"}).code, 2);
  EXPECT_EQ(run({"calibrate", "--no-such-flag"}).code, 2);
}

// =============================================================================
// observe / fit / figures
// =============================================================================

TEST_F(Cli, ObserveDirectIsExact) {
  const auto r = run({"--out-dir", dir_.string(), "observe", "--observer", "direct", "--p0", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto &row : read_rows(dir_ / "observe_direct.csv"))
    EXPECT_NEAR(row[3], 2.0, 1e-8);
}

TEST_F(Cli, ObserveHighGainConverges) {
  const auto r = run({"--out-dir", dir_.string(), "observe", "--observer", "highgain",
                      "--theta", "15", "--horizon", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(dir_ / "observe_highgain.csv");
  EXPECT_LT(std::abs(rows.back()[3] - 2.0) / 2.0, 0.05);
}

TEST_F(Cli, ObserveSaturatedExits1) {
  const auto r = run({"--out-dir", dir_.string(), "observe", "--observer", "luenberger",
                      "--horizon", "20"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("guard"), std::string::npos);
}

TEST_F(Cli, ObserveFromDataFile) {
  std::string text = "t,value\n";
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.01 * k;
    text += format_double(t) + "," + format_double(0.05 / (0.05 + 0.95 * std::exp(-2 * t))) + "\n";
  }
  const auto f = write("p.csv", text);
  const auto r = run({"--out-dir", dir_.string(), "observe", "--data", f.string(),
                      "--observer", "direct"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"observe", "--observer", "kalman"}).code, 2);
}

TEST_F(Cli, FitExitCodes) {
  auto grid = uniform_grid(999.0, 0.1);
  auto z = sample_ou({1.3, 0.03}, grid, RngSeed{1});
  write_path_csv(dir_ / "ou.csv", z);
  const auto ok = run({"fit", (dir_ / "ou.csv").string()});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("n_points = 9991"), std::string::npos);
  EXPECT_EQ(run({"fit", (dir_ / "ou.csv").string(), "--json"}).out.front(), '{');

  const auto flat = write("flat.csv", "t,value\n0,1\n1,1\n2,1\n3,1\n");
  EXPECT_EQ(run({"fit", flat.string()}).code, 1);
  const auto broken = write("broken.csv", "t,value\n0,1\n1,x\n2,1\n");
  const auto r = run({"fit", broken.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST_F(Cli, FiguresUnknownListsIds) {
  const auto r = run({"figures", "nope"});
  EXPECT_EQ(r.code, 2);
  for (const auto &id : figure_ids())
    EXPECT_NE(r.err.find(id), std::string::npos) << id;
  EXPECT_EQ(run({"figures", "--list"}).code, 0);
}

TEST_F(Cli, FiguresObserverDetInnovationDecays) {
  const auto r = run({"--out-dir", dir_.string(), "figures", "observer-det"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(dir_ / "observer-det" / "highgain" / "observer.csv");
  EXPECT_LT(std::abs(rows.back()[4]), 1e-3);
  EXPECT_TRUE(fs::exists(dir_ / "observer-det" / "manifest.txt"));
}

TEST_F(Cli, FiguresLvContainsBoxBounds) {
  const auto r = run({"--out-dir", dir_.string(), "figures", "lv-1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto abs = slurp(dir_ / "lv-1" / "phase" / "absorption.csv");
  EXPECT_NE(abs.find("box_x_lower"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "lv-1" / "phase" / "scenario.txt").find("e = 30"), std::string::npos);
}

// The installed binary honours the same contract as run_cli.
TEST_F(Cli, BinaryExitCodes) {
  const char *bin = std::getenv("OUPOP_BIN");
  if (!bin)
    GTEST_SKIP() << "OUPOP_BIN not set";
  auto status = [&](const std::string &args) {
    const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("calibrate --alpha 0"), 0);
  EXPECT_EQ(status("figures nope"), 2);
  EXPECT_EQ(status("calibrate --lower 2.9999999 --upper 3.0000001"), 1);
}
