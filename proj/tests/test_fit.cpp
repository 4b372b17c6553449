// OU regression fit and series CSV loading
#include <oupop/errors.hpp>
#include <oupop/fit.hpp>
#include <oupop/noise.hpp>

#include <json.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace oupop;

namespace {

SamplePath synthetic(double mu, double beta, double gamma, double dt,
                     std::size_t n, std::uint64_t seed) {
  auto grid = uniform_grid(dt * static_cast<double>(n - 1), dt);
  auto z = sample_ou({beta, gamma}, grid, RngSeed{seed});
  std::vector<double> v(z.values().begin(), z.values().end());
  for (double &x : v)
    x += mu;
  return SamplePath(std::move(grid), std::move(v));
}

SamplePath transformed(const SamplePath &p, double value_scale, double time_scale) {
  std::vector<double> t(p.grid().begin(), p.grid().end());
  std::vector<double> v(p.values().begin(), p.values().end());
  for (double &x : t)
    x *= time_scale;
  for (double &x : v)
    x *= value_scale;
  return SamplePath(std::move(t), std::move(v));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

// Raw (uncentered) normal equations as an independent oracle.
TEST(Fit, MatchesNormalEquations) {
  const auto p = synthetic(0.2, 1.3, 0.03, 0.1, 500, 3);
  const auto v = p.values();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(v.size() - 1);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    sx += v[k];
    sy += v[k + 1];
    sxx += v[k] * v[k];
    sxy += v[k] * v[k + 1];
  }
  const double a = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double c = (sy - a * sx) / m;
  double ssr = 0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    ssr += std::pow(v[k + 1] - c - a * v[k], 2);
  const double s = std::sqrt(ssr / (m - 2));
  const double beta = -std::log(a) / 0.1;

  const auto fit = fit_ou(p);
  EXPECT_NEAR(fit.slope, a, 1e-9);
  EXPECT_NEAR(fit.intercept, c, 1e-9);
  EXPECT_NEAR(fit.beta, beta, 1e-7);
  EXPECT_NEAR(fit.mu, c / (1 - a), 1e-8);
  EXPECT_NEAR(fit.gamma, s * std::sqrt(2 * beta / (1 - a * a)), 1e-9);
  EXPECT_EQ(fit.n_points, 500u);
  EXPECT_NEAR(fit.spacing, 0.1, 1e-12);
}

TEST(Fit, RoundTripMedianOverSeeds) {
  std::vector<double> eb, eg, em;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fit = fit_ou(synthetic(0.2, 1.3, 0.03, 0.1, 100000, seed));
    eb.push_back(std::abs(fit.beta / 1.3 - 1));
    eg.push_back(std::abs(fit.gamma / 0.03 - 1));
    em.push_back(std::abs(fit.mu / 0.2 - 1));
  }
  EXPECT_LT(median(eb), 0.10);
  EXPECT_LT(median(eg), 0.05);
  EXPECT_LT(median(em), 0.02);
}

TEST(Fit, ScaleEquivariance) {
  const auto p = synthetic(0.2, 1.3, 0.03, 0.1, 2000, 8);
  const auto base = fit_ou(p);
  for (double k : {1e-3, 0.5, 7.0, 1e4}) {
    const auto f = fit_ou(transformed(p, k, 1.0));
    EXPECT_NEAR(f.beta / base.beta, 1.0, 1e-9) << k;
    EXPECT_NEAR(f.mu / (k * base.mu), 1.0, 1e-9) << k;
    EXPECT_NEAR(f.gamma / (k * base.gamma), 1.0, 1e-9) << k;
  }
}

TEST(Fit, TimeRescaleEquivariance) {
  const auto p = synthetic(0.2, 1.3, 0.03, 0.1, 2000, 9);
  const auto base = fit_ou(p);
  for (double c : {0.25, 2.0, 60.0}) {
    const auto f = fit_ou(transformed(p, 1.0, c));
    EXPECT_NEAR(f.beta * c / base.beta, 1.0, 1e-9) << c;
    EXPECT_NEAR(f.mu, base.mu, 1e-12 * std::abs(base.mu) + 1e-15);
  }
}

TEST(Fit, ConstantSeriesIsNotMeanReverting) {
  SamplePath p({0.0, 1.0, 2.0, 3.0}, {5.0, 5.0, 5.0, 5.0});
  EXPECT_THROW(fit_ou(p), NonMeanReverting);
}

TEST(Fit, TrendIsNotMeanReverting) {
  std::vector<double> t, v;
  for (int k = 0; k < 100; ++k) {
    t.push_back(k);
    v.push_back(std::exp(0.05 * k));
  }
  EXPECT_THROW(fit_ou(SamplePath(t, v)), NonMeanReverting);
}

TEST(Fit, RejectsNonuniformAndShortGrids) {
  SamplePath p({0.0, 0.1, 0.2, 0.31}, {0.0, 1.0, 0.0, 1.0});
  EXPECT_THROW(fit_ou(p), InvalidGrid);
  SamplePath q({0.0, 0.1}, {0.0, 1.0});
  EXPECT_THROW(fit_ou(q), InvalidGrid);
}

TEST(Fit, ReportFormats) {
  const auto fit = fit_ou(synthetic(0.2, 1.3, 0.03, 0.1, 1000, 1));
  const auto report = format_fit_report(fit);
  EXPECT_NE(report.find("n_points = 1000"), std::string::npos);
  EXPECT_NE(report.find("beta = "), std::string::npos);
  const auto j = nlohmann::json::parse(format_fit_json(fit));
  EXPECT_EQ(j["n_points"].get<std::size_t>(), 1000u);
  EXPECT_EQ(j["beta"].get<double>(), fit.beta);
  EXPECT_EQ(j["mu"].get<double>(), fit.mu);
}

// =============================================================================
// CSV loading
// =============================================================================

namespace {

SamplePath parse(const std::string &text) {
  std::istringstream is(text);
  return read_path_csv(is);
}

std::size_t parse_error_line(const std::string &text) {
  try {
    parse(text);
  } catch (const ParseError &e) {
    return e.line();
  }
  return 0;
}

} // namespace

TEST(SeriesCsv, WellFormed) {
  auto p = parse("t,value\n0,1.5\n0.1,2\n0.2,-3e-2\n");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.values()[2], -3e-2);
}

TEST(SeriesCsv, NonNumericNamesLine) {
  EXPECT_EQ(parse_error_line("t,value\n0,1\n0.1,abc\n0.2,3\n"), 3u);
  EXPECT_EQ(parse_error_line("t,value\n0,1\n0.1,nan\n0.2,3\n"), 3u);
  EXPECT_EQ(parse_error_line("t,value\n0,1\n0.1,2,9\n0.2,3\n"), 3u);
  EXPECT_EQ(parse_error_line("time,v\n0,1\n"), 1u);
}

TEST(SeriesCsv, DuplicateTimestampIsGridError) {
  EXPECT_THROW(parse("t,value\n0,1\n0.1,2\n0.1,3\n"), InvalidGrid);
}

TEST(SeriesCsv, TooFewRows) {
  EXPECT_THROW(parse("t,value\n0,1\n0.1,2\n"), ParseError);
}

TEST(SeriesCsv, FileRoundTripThroughFit) {
  const auto dir = std::filesystem::temp_directory_path() / "oupop_fit_test";
  std::filesystem::create_directories(dir);
  const auto p = synthetic(0.2, 1.3, 0.03, 0.1, 5000, 2);
  write_path_csv(dir / "s.csv", p);
  const auto q = load_series_csv(dir / "s.csv");
  const auto a = fit_ou(p), b = fit_ou(q);
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_THROW(load_series_csv(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}
