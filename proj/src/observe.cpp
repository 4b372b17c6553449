#include <oupop/errors.hpp>
#include <oupop/observe.hpp>
#include <oupop/rk4.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oupop {

void LuenbergerConfig::validate() const {
  if (!(gamma_p < 0.0) || !(gamma_r < 0.0))
    throw ParameterError("Luenberger gamma_p and gamma_r must be < 0");
}

void HighGainConfig::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ParameterError("high-gain theta must be > 0");
}

namespace {

void check_measurements(const SamplePath &measured) {
  if (measured.size() < 2)
    throw InvalidGrid("observer needs at least two measurements");
  const auto t = measured.grid();
  const auto y = measured.values();
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(y[k] > kMeasurementGuard && y[k] < 1.0 - kMeasurementGuard)) {
      std::ostringstream os;
      os << "measurement p=" << y[k] << " at t=" << t[k]
         << " is within the guard of 0 or 1 (system not observable)";
      throw SingularMeasurement(os.str());
    }
  }
}

std::vector<double> observer_grid(const SamplePath &measured, double step) {
  if (!(step > 0.0))
    throw ParameterError("observer step must be > 0");
  const double t0 = measured.front_time();
  auto grid = uniform_grid(measured.back_time() - t0, step);
  for (double &t : grid)
    t += t0;
  grid.back() = measured.back_time();
  return grid;
}

double measurement_at(const SamplePath &measured, double t) {
  return measured.at(std::clamp(t, measured.front_time(), measured.back_time()));
}

double project(double r, const std::optional<Interval> &band) {
  return band ? std::clamp(r, band->lower, band->upper) : r;
}

} // namespace

double direct_estimator(double p0, double p_t, double t) {
  if (!(p0 > 0.0 && p0 < 1.0) || !(p_t > 0.0 && p_t < 1.0))
    throw SingularMeasurement("direct estimator needs p0 and p_t in (0, 1)");
  if (!(t > 0.0))
    throw ParameterError("direct estimator needs t > 0");
  return std::log(p_t * (1.0 - p0) / (p0 * (1.0 - p_t))) / t;
}

ObserverRun direct_run(const SamplePath &measured) {
  check_measurements(measured);
  const auto t = measured.grid();
  const auto y = measured.values();
  ObserverRun run;
  for (std::size_t k = 1; k < t.size(); ++k) {
    run.grid.push_back(t[k]);
    run.measured.push_back(y[k]);
    run.p_hat.push_back(y[k]);
    run.r_hat.push_back(direct_estimator(y[0], y[k], t[k] - t[0]));
    run.innovation.push_back(0.0);
  }
  return run;
}

LuenbergerInit default_luenberger_init(const SamplePath &measured) {
  return {measured.values().front(), 0.0};
}

ObserverRun luenberger_run(const LuenbergerConfig &config,
                           const SamplePath &measured,
                           const LuenbergerInit &init,
                           const ObserverOptions &options) {
  config.validate();
  check_measurements(measured);
  const double g1 = config.g1(), g2 = config.g2();
  auto rhs = [&](double t, const Vec<2> &s) {
    const double y = measurement_at(measured, t);
    const double innov = s[0] - y;
    return Vec<2>{s[1] * y * (1.0 - y) + g1 * innov, g2 * innov};
  };

  ObserverRun run;
  run.grid = observer_grid(measured, options.step);
  const std::size_t n = run.grid.size();
  run.measured.resize(n);
  run.p_hat.resize(n);
  run.r_hat.resize(n);
  run.innovation.resize(n);
  Vec<2> s{init.p_hat, init.r_hat};
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      s = rk4_step<2>(rhs, run.grid[k - 1], s, run.grid[k] - run.grid[k - 1]);
      if (!std::isfinite(s[0]) || !std::isfinite(s[1]))
        throw BlowUp(run.grid[k]);
    }
    const double y = measured.at(run.grid[k]);
    run.measured[k] = y;
    run.p_hat[k] = s[0];
    run.r_hat[k] = project(s[1], options.projection);
    run.innovation[k] = s[0] - y;
  }
  return run;
}

double lyapunov_V(double e_p, double e_r, double gamma_r) {
  const double u = e_p + gamma_r * e_r;
  return 0.5 * u * u + 0.5 * e_r * e_r;
}

double highgain_phi(double z1, double z2) { return z2 / (z1 * (1.0 - z1)); }

double highgain_psi(double z1, double z2) {
  return (1.0 - 2.0 * z1) * z2 * z2 / (z1 * (1.0 - z1));
}

HighGainInit highgain_init(const SamplePath &measured, double r0) {
  const double y0 = measured.values().front();
  return {y0, r0 * y0 * (1.0 - y0)};
}

ObserverRun highgain_run(const HighGainConfig &config,
                         const SamplePath &measured, const HighGainInit &init,
                         const ObserverOptions &options) {
  config.validate();
  check_measurements(measured);
  const double g1 = config.g1(), g2 = config.g2();
  auto rhs = [&](double t, const Vec<2> &s) {
    const double y = measurement_at(measured, t);
    const double innov = s[0] - y;
    return Vec<2>{s[1] + g1 * innov, highgain_psi(y, s[1]) + g2 * innov};
  };

  ObserverRun run;
  run.grid = observer_grid(measured, options.step);
  const std::size_t n = run.grid.size();
  run.measured.resize(n);
  run.p_hat.resize(n);
  run.r_hat.resize(n);
  run.innovation.resize(n);
  Vec<2> s{init.z1_hat, init.z2_hat};
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      s = rk4_step<2>(rhs, run.grid[k - 1], s, run.grid[k] - run.grid[k - 1]);
      if (!std::isfinite(s[0]) || !std::isfinite(s[1]) ||
          std::abs(s[1]) > 1e12)
        throw BlowUp(run.grid[k]);
    }
    const double y = measured.at(run.grid[k]);
    run.measured[k] = y;
    run.p_hat[k] = s[0];
    run.r_hat[k] = project(highgain_phi(y, s[1]), options.projection);
    run.innovation[k] = s[0] - y;
  }
  return run;
}

std::vector<bool> innovation_trust(const ObserverRun &run, double tol) {
  std::vector<bool> flags(run.innovation.size());
  std::transform(run.innovation.begin(), run.innovation.end(), flags.begin(),
                 [tol](double v) { return std::abs(v) < tol; });
  return flags;
}

LyapunovGains highgain_gains_from_lyapunov(double theta) {
  if (!(theta > 0.0))
    throw ParameterError("theta must be > 0");
  Eigen::Matrix2d A;
  A << 0.0, 1.0, 0.0, 0.0;
  const Eigen::RowVector2d C(1.0, 0.0);
  const Eigen::Matrix2d CtC = C.transpose() * C;

  // Unknowns (s11, s12, s22) of the symmetric S; the residual
  // A'S + SA + theta S - C'C is linear in them. Build the 3x3 system from
  // the residual at the unit basis matrices.
  auto basis = [](int i) {
    Eigen::Matrix2d E = Eigen::Matrix2d::Zero();
    if (i == 0) E(0, 0) = 1.0;
    if (i == 1) E(0, 1) = E(1, 0) = 1.0;
    if (i == 2) E(1, 1) = 1.0;
    return E;
  };
  auto pick = [](const Eigen::Matrix2d &M) {
    return Eigen::Vector3d(M(0, 0), M(0, 1), M(1, 1));
  };
  Eigen::Matrix3d L;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix2d E = basis(i);
    L.col(i) = pick(A.transpose() * E + E * A + theta * E);
  }
  const Eigen::Vector3d s = L.fullPivLu().solve(pick(CtC));

  LyapunovGains out;
  out.S << s(0), s(1), s(1), s(2);
  const Eigen::Vector2d G = -out.S.inverse() * C.transpose();
  out.g1 = G(0);
  out.g2 = G(1);
  return out;
}

SamplePath logistic_measurements(double r, double p0,
                                 std::span<const double> grid) {
  if (!(p0 > 0.0 && p0 < 1.0))
    throw ParameterError("p0 must be in (0, 1)");
  std::vector<double> p(grid.size());
  const double odds = 1.0 / p0 - 1.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    p[k] = 1.0 / (1.0 + odds * std::exp(-r * grid[k]));
  return SamplePath({grid.begin(), grid.end()}, std::move(p));
}

} // namespace oupop
