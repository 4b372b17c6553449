#include <oupop/errors.hpp>
#include <oupop/rk4.hpp>
#include <oupop/solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace oupop {

namespace {

void check_coverage(const SamplePath &noise, double horizon) {
  if (noise.empty() || noise.front_time() > 0.0 || noise.back_time() < horizon) {
    std::ostringstream os;
    os << "noise path must cover [0, " << horizon << "]";
    if (!noise.empty())
      os << ", got [" << noise.front_time() << ", " << noise.back_time() << "]";
    throw CoverageError(os.str());
  }
}

void check_state(double t, double v, double start) {
  if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold)
    throw BlowUp(t);
  // Axes are invariant: a positive start must stay positive.
  if (start > 0.0 && !(v > 0.0))
    throw BlowUp(t);
}

template <std::size_t N, class Rhs>
void run_rk4(Rhs &&rhs, Vec<N> state, const std::vector<double> &grid,
             const Vec<N> &start, Trajectory &out) {
  out.grid = grid;
  out.x.assign(grid.size(), 0.0);
  if constexpr (N == 2)
    out.y.assign(grid.size(), 0.0);
  auto store = [&](std::size_t k, const Vec<N> &s) {
    out.x[k] = s[0];
    if constexpr (N == 2)
      out.y[k] = s[1];
  };
  store(0, state);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double h = grid[k + 1] - grid[k];
    state = rk4_step<N>(rhs, grid[k], state, h);
    for (std::size_t i = 0; i < N; ++i)
      check_state(grid[k + 1], state[i], start[i]);
    store(k + 1, state);
  }
}

} // namespace

Trajectory integrate(const ModelSpec &spec, State x0, double horizon,
                     double step, const SamplePath &noise,
                     const SamplePath *noise_mu) {
  std::visit([](const auto &s) { s.validate(); }, spec);
  if (!(step > 0.0))
    throw ParameterError("integration step must be > 0");
  if (!(x0.x >= 0.0) || (state_dimension(spec) == 2 && !(x0.y >= 0.0)))
    throw ParameterError("initial state must be componentwise >= 0");
  check_coverage(noise, horizon);
  if (noise_mu)
    check_coverage(*noise_mu, horizon);

  const auto grid = uniform_grid(horizon, step);
  const double t_max = noise.back_time();
  // Rounding in t + h can step one ulp past the last node.
  auto z_at = [&](const SamplePath &p, double t) {
    return p.at(std::min(t, std::min(t_max, p.back_time())));
  };

  Trajectory out;
  out.model = std::string(model_name(spec));

  if (const auto *k = std::get_if<LogisticKSpec>(&spec)) {
    auto rhs = [&](double t, const Vec<1> &s) {
      return Vec<1>{rhs_logistic_k(*k, s[0], z_at(noise, t))};
    };
    run_rk4<1>(rhs, {x0.x}, grid, {x0.x}, out);
  } else if (const auto *r = std::get_if<LogisticRSpec>(&spec)) {
    auto rhs = [&](double t, const Vec<1> &s) {
      return Vec<1>{rhs_logistic_r(*r, s[0], z_at(noise, t))};
    };
    run_rk4<1>(rhs, {x0.x}, grid, {x0.x}, out);
  } else {
    const auto &lv = std::get<LVSpec>(spec);
    const SamplePath &second = noise_mu ? *noise_mu : noise;
    auto rhs = [&](double t, const Vec<2> &s) {
      const double zl = z_at(noise, t);
      const double zm = noise_mu ? z_at(second, t) : zl;
      const auto [dx, dy] = rhs_lv(lv, s[0], s[1], zl, zm);
      return Vec<2>{dx, dy};
    };
    run_rk4<2>(rhs, {x0.x, x0.y}, grid, {x0.x, x0.y}, out);
  }
  return out;
}

// Closed forms --------------------------------------------------------------

namespace {

void check_closed_form_inputs(const SamplePath &noise, double x0) {
  if (!(x0 >= 0.0))
    throw ParameterError("closed form needs x0 >= 0");
  if (noise.size() < 2 || noise.front_time() != 0.0)
    throw InvalidGrid("closed form needs a noise grid starting at 0");
}

} // namespace

LogisticKClosedForm::LogisticKClosedForm(const LogisticKSpec &spec,
                                         const SamplePath &noise, double x0)
    : noise_(noise), a_(spec.a), alpha_(spec.alpha), x0_(x0) {
  check_closed_form_inputs(noise, x0);
  const auto t = noise_.grid();
  const auto z = noise_.values();
  exponent_.assign(t.size(), 0.0);
  scaled_.assign(t.size(), 0.0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    const double rise = 0.5 * h * (2.0 * a_ + alpha_ * (z[k] + z[k + 1]));
    const double decay = std::exp(-rise);
    exponent_[k + 1] = exponent_[k] + rise;
    scaled_[k + 1] = scaled_[k] * decay + 0.5 * h * (decay + 1.0);
  }
}

double LogisticKClosedForm::operator()(double t) const {
  const double zt = noise_.at(t); // range check
  if (x0_ == 0.0)
    return 0.0;
  const std::size_t k = noise_.bracket(t);
  const double tau = t - noise_.grid()[k];
  const double rise = 0.5 * tau * (2.0 * a_ + alpha_ * (noise_.values()[k] + zt));
  const double decay = std::exp(-rise);
  const double exponent = exponent_[k] + rise;
  const double scaled = scaled_[k] * decay + 0.5 * tau * (decay + 1.0);
  return x0_ / (std::exp(-exponent) + x0_ * scaled);
}

LogisticRClosedForm::LogisticRClosedForm(const LogisticRSpec &spec,
                                         const SamplePath &noise, double x0)
    : noise_(noise), r_(spec.r), c_(spec.c), alpha_(spec.alpha), x0_(x0) {
  check_closed_form_inputs(noise, x0);
  const auto t = noise_.grid();
  const auto z = noise_.values();
  exponent_.assign(t.size(), 0.0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    exponent_[k + 1] =
        exponent_[k] + 0.5 * h * (2.0 * r_ + alpha_ * (z[k] + z[k + 1]));
  }
}

double LogisticRClosedForm::operator()(double t) const {
  const double zt = noise_.at(t);
  if (x0_ == 0.0)
    return 0.0;
  const std::size_t k = noise_.bracket(t);
  const double tau = t - noise_.grid()[k];
  const double exponent =
      exponent_[k] + 0.5 * tau * (2.0 * r_ + alpha_ * (noise_.values()[k] + zt));
  const double ratio = x0_ / c_;
  return x0_ / (std::exp(-exponent) * (1.0 - ratio) + ratio);
}

double closed_form_logistic_k(const LogisticKSpec &spec,
                              const SamplePath &noise, double x0, double t) {
  return LogisticKClosedForm(spec, noise, x0)(t);
}

double closed_form_logistic_r(const LogisticRSpec &spec,
                              const SamplePath &noise, double x0, double t) {
  return LogisticRClosedForm(spec, noise, x0)(t);
}

// Noise realizations and ensembles -----------------------------------------

namespace {

struct Calibrated {
  double beta;
  SamplePath path;
  EnvelopeBounds envelope;
};

// Fixed beta when no target is given, otherwise a doubling search.
Calibrated calibrate_one(double nominal, double alpha, const OUParams &ou,
                         const std::optional<Interval> &target, double horizon,
                         double grid_step, RngSeed seed) {
  if (!target) {
    SamplePath z = sample_ou(ou, uniform_grid(horizon, grid_step), seed);
    const EnvelopeBounds env = alpha == 0.0
                                   ? EnvelopeBounds{nominal, nominal}
                                   : perturbed_envelope(z, nominal, alpha);
    return {ou.beta, std::move(z), env};
  }
  CalibrationRequest req;
  req.seed = seed;
  req.gamma = ou.gamma;
  req.alpha = alpha;
  req.nominal = nominal;
  req.lower = target->lower;
  req.upper = target->upper;
  req.horizon = horizon;
  req.grid_step = grid_step;
  req.beta_start = ou.beta;
  Calibration cal = calibrate_beta(req);
  return {cal.beta, std::move(cal.path), cal.envelope};
}

} // namespace

Realization realize_noise(const ModelSpec &spec, const NoiseSetup &setup,
                          double horizon, RngSeed seed) {
  std::visit([](const auto &s) { s.validate(); }, spec);
  Realization out;
  out.seed = seed;

  if (const auto *k = std::get_if<LogisticKSpec>(&spec)) {
    auto cal = calibrate_one(k->a, k->alpha, k->ou, setup.target, horizon,
                             setup.grid_step, seed);
    if (!(cal.envelope.lower > 0.0))
      throw ParameterError("calibrated carrying-capacity envelope must have a "
                           "positive lower bound");
    out.beta = cal.beta;
    out.noise = std::move(cal.path);
    out.envelope = cal.envelope;
    return out;
  }
  if (const auto *r = std::get_if<LogisticRSpec>(&spec)) {
    auto cal = calibrate_one(r->r, r->alpha, r->ou, setup.target, horizon,
                             setup.grid_step, seed);
    out.beta = cal.beta;
    out.noise = std::move(cal.path);
    out.envelope = cal.envelope;
    return out;
  }

  const auto &lv = std::get<LVSpec>(spec);
  if (lv.independent_noise) {
    auto first = calibrate_one(lv.lambda, lv.alpha, lv.ou, setup.target,
                               horizon, setup.grid_step, seed);
    auto second = calibrate_one(lv.mu, lv.alpha, lv.ou, setup.target_mu,
                                horizon, setup.grid_step, companion_seed(seed));
    out.beta = first.beta;
    out.noise = std::move(first.path);
    out.envelope = first.envelope;
    out.beta_mu = second.beta;
    out.noise_mu = std::move(second.path);
    out.envelope_mu = second.envelope;
    return out;
  }

  // Shared noise: both targets constrain the same z, so intersect them in z
  // units and express the result in lambda units.
  std::optional<Interval> target;
  if ((setup.target || setup.target_mu) && lv.alpha > 0.0) {
    double zlo = -INFINITY, zhi = INFINITY;
    if (setup.target) {
      zlo = std::max(zlo, (setup.target->lower - lv.lambda) / lv.alpha);
      zhi = std::min(zhi, (setup.target->upper - lv.lambda) / lv.alpha);
    }
    if (setup.target_mu) {
      zlo = std::max(zlo, (setup.target_mu->lower - lv.mu) / lv.alpha);
      zhi = std::min(zhi, (setup.target_mu->upper - lv.mu) / lv.alpha);
    }
    if (!(zlo < 0.0 && 0.0 < zhi))
      throw ParameterError("lambda/mu target intervals must contain their "
                           "nominal values");
    target = Interval{lv.lambda + lv.alpha * zlo, lv.lambda + lv.alpha * zhi};
  }
  auto cal = calibrate_one(lv.lambda, lv.alpha, lv.ou, target, horizon,
                           setup.grid_step, seed);
  out.beta = cal.beta;
  out.envelope = cal.envelope;
  out.envelope_mu = lv.alpha == 0.0 ? EnvelopeBounds{lv.mu, lv.mu}
                                    : perturbed_envelope(cal.path, lv.mu, lv.alpha);
  out.noise = std::move(cal.path);
  return out;
}

SeedFailure::SeedFailure(RngSeed seed, const std::string &what)
    : Error("seed " + std::to_string(seed.value) + ": " + what), seed_(seed) {}

namespace {

ComponentEnvelope nodewise(const std::vector<Trajectory> &trajs,
                           std::vector<double> Trajectory::*component) {
  ComponentEnvelope env;
  const std::size_t n = (trajs.front().*component).size();
  env.min.assign(n, INFINITY);
  env.max.assign(n, -INFINITY);
  env.mean.assign(n, 0.0);
  for (const auto &tr : trajs) {
    const auto &v = tr.*component;
    for (std::size_t k = 0; k < n; ++k) {
      env.min[k] = std::min(env.min[k], v[k]);
      env.max[k] = std::max(env.max[k], v[k]);
      env.mean[k] += v[k];
    }
  }
  for (double &m : env.mean)
    m /= static_cast<double>(trajs.size());
  return env;
}

} // namespace

EnsembleResult ensemble(const ModelSpec &spec, State x0, double horizon,
                        double step, const std::vector<RngSeed> &seeds,
                        const NoiseSetup &setup) {
  if (seeds.empty())
    throw ParameterError("ensemble needs at least one seed");
  EnsembleResult out;
  out.realizations.reserve(seeds.size());
  out.trajectories.reserve(seeds.size());
  for (RngSeed seed : seeds) {
    try {
      Realization real = realize_noise(spec, setup, horizon, seed);
      Trajectory tr = integrate(spec, x0, horizon, step, real.noise,
                                real.noise_mu ? &*real.noise_mu : nullptr);
      tr.seed = seed;
      out.trajectories.push_back(std::move(tr));
      out.realizations.push_back(std::move(real));
    } catch (const Error &e) {
      throw SeedFailure(seed, e.what());
    }
  }
  out.grid = out.trajectories.front().grid;
  out.x = nodewise(out.trajectories, &Trajectory::x);
  if (state_dimension(spec) == 2)
    out.y = nodewise(out.trajectories, &Trajectory::y);
  return out;
}

// Absorption ----------------------------------------------------------------

AbsorptionReport absorption_report(const Trajectory &traj,
                                   const Region &region, double eps) {
  AbsorptionReport rep;
  std::function<bool(std::size_t)> inside;
  if (const auto *iv = std::get_if<Interval>(&region)) {
    if (iv->lower > iv->upper)
      throw InconsistentBounds("absorption region is empty");
    const Interval r = iv->inflated(eps);
    rep.region = r;
    inside = [&traj, r](std::size_t k) { return r.contains(traj.x[k]); };
  } else {
    const auto &box = std::get<Box2D>(region);
    if (box.x.lower > box.x.upper || box.y.lower > box.y.upper)
      throw InconsistentBounds("absorption region is empty");
    if (traj.dimension() != 2)
      throw ParameterError("box region needs a two-dimensional trajectory");
    const Box2D r = box.inflated(eps);
    rep.region = r;
    inside = [&traj, r](std::size_t k) {
      return r.contains(traj.x[k], traj.y[k]);
    };
  }
  std::size_t k = traj.size();
  while (k > 0 && inside(k - 1))
    --k;
  if (k < traj.size()) {
    rep.entry_time = traj.grid[k];
    rep.stayed = true;
  }
  return rep;
}

// CSV -----------------------------------------------------------------------

void write_trajectory_csv(const std::filesystem::path &file,
                          const Trajectory &traj) {
  if (traj.dimension() == 2) {
    const std::string header[] = {"t", "x", "y"};
    const std::span<const double> cols[] = {traj.grid, traj.x, traj.y};
    write_csv(file, header, cols);
  } else {
    const std::string header[] = {"t", "x"};
    const std::span<const double> cols[] = {traj.grid, traj.x};
    write_csv(file, header, cols);
  }
}

void write_envelope_csv(const std::filesystem::path &file,
                        const EnsembleResult &result) {
  if (result.y.min.empty()) {
    const std::string header[] = {"t", "min", "max", "mean"};
    const std::span<const double> cols[] = {result.grid, result.x.min,
                                            result.x.max, result.x.mean};
    write_csv(file, header, cols);
  } else {
    const std::string header[] = {"t",     "x_min", "x_max", "x_mean",
                                  "y_min", "y_max", "y_mean"};
    const std::span<const double> cols[] = {
        result.grid,  result.x.min, result.x.max, result.x.mean,
        result.y.min, result.y.max, result.y.mean};
    write_csv(file, header, cols);
  }
}

} // namespace oupop
