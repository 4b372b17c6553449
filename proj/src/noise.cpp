#include <oupop/errors.hpp>
#include <oupop/noise.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace oupop {

void OUParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw ParameterError("OU beta must be > 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ParameterError("OU gamma must be > 0");
}

RngSeed companion_seed(RngSeed seed) {
  // splitmix64 finalizer: decorrelates base + k families from their companions
  std::uint64_t x = seed.value + 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return RngSeed{x ^ (x >> 31)};
}

SamplePath sample_wiener(std::span<const double> grid, RngSeed seed) {
  check_grid(grid);
  if (grid.front() != 0.0)
    throw InvalidGrid("Wiener grid must start at 0");
  std::mt19937_64 rng(seed.value);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(grid.size());
  w[0] = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    w[k] = w[k - 1] + std::sqrt(grid[k] - grid[k - 1]) * normal(rng);
  return SamplePath({grid.begin(), grid.end()}, std::move(w));
}

SamplePath sample_ou(const OUParams &params, std::span<const double> grid,
                     RngSeed seed, OUInit init) {
  params.validate();
  check_grid(grid);
  std::mt19937_64 rng(seed.value);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double beta = params.beta, gamma = params.gamma;
  std::vector<double> z(grid.size());
  const double first = normal(rng);
  if (std::holds_alternative<StationaryInit>(init))
    z[0] = std::sqrt(params.stationary_variance()) * first;
  else
    z[0] = std::get<ValueInit>(init).value;

  // Uniform grids reuse the transition coefficients.
  double last_dt = -1.0, decay = 0.0, scale = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    if (dt != last_dt) {
      decay = std::exp(-beta * dt);
      scale = gamma * std::sqrt(-std::expm1(-2.0 * beta * dt) / (2.0 * beta));
      last_dt = dt;
    }
    z[k + 1] = z[k] * decay + scale * normal(rng);
  }
  return SamplePath({grid.begin(), grid.end()}, std::move(z));
}

EnvelopeBounds perturbed_envelope(const SamplePath &z, double nominal,
                                  double alpha) {
  if (z.empty())
    throw InvalidGrid("empty noise path");
  const auto [lo, hi] = std::minmax_element(z.values().begin(), z.values().end());
  double a = nominal + alpha * *lo, b = nominal + alpha * *hi;
  if (a > b)
    std::swap(a, b);
  return {a, b};
}

namespace {

void validate_request(const CalibrationRequest &req) {
  if (!(req.lower < req.nominal && req.nominal < req.upper))
    throw ParameterError("calibration requires lower < nominal < upper");
  if (!(req.beta_start > 0.0))
    throw ParameterError("beta_start must be > 0");
  if (!(req.horizon > 0.0))
    throw ParameterError("calibration horizon must be > 0");
  if (!(req.grid_step > 0.0))
    throw ParameterError("calibration grid_step must be > 0");
  if (!(req.alpha >= 0.0))
    throw ParameterError("alpha must be >= 0");
  if (!(req.gamma > 0.0))
    throw ParameterError("OU gamma must be > 0");
}

bool strictly_inside(const EnvelopeBounds &env, const CalibrationRequest &req) {
  return env.lower > req.lower && env.upper < req.upper;
}

} // namespace

Calibration calibrate_beta(const CalibrationRequest &req) {
  validate_request(req);
  const auto grid = uniform_grid(req.horizon, req.grid_step);

  if (req.alpha == 0.0) {
    Calibration out;
    out.beta = req.beta_start;
    out.envelope = {req.nominal, req.nominal};
    out.path = sample_ou({req.beta_start, req.gamma}, grid, req.seed);
    out.trials = 1;
    return out;
  }

  constexpr int max_doublings = 40;
  EnvelopeBounds tightest{};
  double best_width = INFINITY;
  double beta = req.beta_start;
  for (int trial = 0; trial <= max_doublings; ++trial) {
    SamplePath z = sample_ou({beta, req.gamma}, grid, req.seed);
    const EnvelopeBounds env = perturbed_envelope(z, req.nominal, req.alpha);
    if (strictly_inside(env, req))
      return Calibration{beta, env, std::move(z), trial + 1};
    if (env.width() < best_width) {
      best_width = env.width();
      tightest = env;
    }
    beta *= 2.0;
  }
  std::ostringstream os;
  os << "no beta up to " << format_double(req.beta_start) << "*2^"
     << max_doublings << " keeps the perturbed parameter inside ("
     << format_double(req.lower) << ", " << format_double(req.upper)
     << "); tightest envelope [" << format_double(tightest.lower) << ", "
     << format_double(tightest.upper) << "]";
  throw CalibrationFailure(os.str(), tightest.lower, tightest.upper,
                           beta / 2.0);
}

bool recheck_calibration(const CalibrationRequest &req, double beta) {
  const auto grid = uniform_grid(req.horizon, req.grid_step);
  const SamplePath z = sample_ou({beta, req.gamma}, grid, req.seed);
  for (double v : z.values()) {
    const double p = req.nominal + req.alpha * v;
    if (!(p > req.lower && p < req.upper))
      return false;
  }
  return true;
}

ErgodicReport ergodic_diagnostics(const SamplePath &path) {
  if (path.size() < 2)
    throw InvalidGrid("ergodic diagnostics need at least two nodes");
  const auto t = path.grid();
  const auto z = path.values();
  double integral = 0.0, abs_integral = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    integral += 0.5 * h * (z[k] + z[k + 1]);
    abs_integral += 0.5 * h * (std::abs(z[k]) + std::abs(z[k + 1]));
  }
  ErgodicReport r;
  r.horizon = t.back() - t.front();
  r.time_avg = integral / r.horizon;
  r.abs_time_avg = abs_integral / r.horizon;
  r.z_over_t = std::abs(z.back()) / r.horizon;
  return r;
}

} // namespace oupop
