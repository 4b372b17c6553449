#pragma once

#include <oupop/models.hpp>
#include <oupop/path.hpp>

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace oupop {

// Online estimation of the intrinsic growth rate r of dp/dt = r p (1 - p)
// from measurements y(t) = p(t). The system is unobservable at p in {0, 1};
// measurements closer than kMeasurementGuard to either end are rejected.

inline constexpr double kMeasurementGuard = 1e-6;

/// Luenberger observer
///   dp^/dt = r^ y (1 - y) + G1 (p^ - y),   dr^/dt = G2 (p^ - y)
/// with G1 = (1 + gamma_r^2) gamma_p and G2 = -gamma_r gamma_p. Both shaping
/// constants must be negative; V below then decreases along the error
/// dynamics.
struct LuenbergerConfig {
  double gamma_p = -5.0;
  double gamma_r = -1.0;

  void validate() const;
  double g1() const { return (1.0 + gamma_r * gamma_r) * gamma_p; }
  double g2() const { return -gamma_r * gamma_p; }
};

/// High-gain observer in the normal coordinates z1 = p, z2 = r p (1 - p).
struct HighGainConfig {
  double theta = 15.0;

  void validate() const;
  double g1() const { return -2.0 * theta; }
  double g2() const { return -theta * theta; }
};

struct ObserverRun {
  std::vector<double> grid;
  std::vector<double> measured; ///< y interpolated at the grid
  std::vector<double> p_hat;
  std::vector<double> r_hat;
  std::vector<double> innovation; ///< p_hat - y
};

struct ObserverOptions {
  double step = 1e-3;
  /// Reported r^ is clamped to this band when set; the observer dynamics are
  /// unaffected.
  std::optional<Interval> projection;
};

/// (1/t) log(p_t (1 - p0) / (p0 (1 - p_t))). Throws SingularMeasurement for
/// p0 or p_t outside (0, 1) and ParameterError for t <= 0.
double direct_estimator(double p0, double p_t, double t);

/// Applies the direct estimator at every node after the first, using the
/// first node as the reference. p_hat is the measurement itself and the
/// innovation is zero.
ObserverRun direct_run(const SamplePath &measured);

/// Initial (p^0, r^0) for the Luenberger observer.
struct LuenbergerInit {
  double p_hat = 0.0;
  double r_hat = 0.0;
};

/// p^0 = first measurement, r^0 = 0.
LuenbergerInit default_luenberger_init(const SamplePath &measured);

ObserverRun luenberger_run(const LuenbergerConfig &config,
                           const SamplePath &measured,
                           const LuenbergerInit &init,
                           const ObserverOptions &options = {});

/// V(e_p, e_r) = 1/2 (e_p + gamma_r e_r)^2 + 1/2 e_r^2.
double lyapunov_V(double e_p, double e_r, double gamma_r);

/// r = phi(z1, z2) = z2 / (z1 (1 - z1)).
double highgain_phi(double z1, double z2);
/// psi(z1, z2) = (1 - 2 z1) z2^2 / (z1 (1 - z1)), the time derivative of
/// z2 = r p (1 - p) along dp/dt = r p (1 - p).
double highgain_psi(double z1, double z2);

struct HighGainInit {
  double z1_hat = 0.0;
  double z2_hat = 0.0;
};

/// z^1 = first measurement, z^2 = r0 y0 (1 - y0).
HighGainInit highgain_init(const SamplePath &measured, double r0 = 0.0);

/// dz^1/dt = z^2 + G1 (z^1 - y),  dz^2/dt = psi(y, z^2) + G2 (z^1 - y),
/// G1 = -2 theta, G2 = -theta^2; reports r^ = phi(y, z^2).
ObserverRun highgain_run(const HighGainConfig &config,
                         const SamplePath &measured, const HighGainInit &init,
                         const ObserverOptions &options = {});

/// flag[k] = |innovation[k]| < tol.
std::vector<bool> innovation_trust(const ObserverRun &run, double tol);

/// Positive definite solution S of A' S + S A - C' C + theta S = 0 for the
/// double integrator A = [[0, 1], [0, 0]] measured through C = [1, 0], and
/// the gains G = -S^{-1} C'.
struct LyapunovGains {
  Eigen::Matrix2d S;
  double g1 = 0.0;
  double g2 = 0.0;
};

LyapunovGains highgain_gains_from_lyapunov(double theta);

/// Noise-free logistic data p(t) = 1 / (1 + (1/p0 - 1) e^{-r t}) on `grid`.
SamplePath logistic_measurements(double r, double p0,
                                 std::span<const double> grid);

} // namespace oupop
