#pragma once

#include <oupop/path.hpp>

#include <cstdint>
#include <span>
#include <variant>

namespace oupop {

/// Parameters of the Langevin equation dz + beta z dt = gamma dw.
struct OUParams {
  double beta = 1.0;  ///< mean-reversion rate [1/time]
  double gamma = 0.1; ///< volatility [units / sqrt(time)]

  /// Throws ParameterError unless beta > 0 and gamma > 0.
  void validate() const;
  double stationary_variance() const { return gamma * gamma / (2.0 * beta); }
};

/// Identifies one noise event. Same seed and grid give bit-identical paths.
struct RngSeed {
  std::uint64_t value = 0;
};

/// Seed of the k-th member of a family rooted at `base` (base + k).
inline RngSeed derive_seed(std::uint64_t base, std::uint64_t k) {
  return RngSeed{base + k};
}

/// Independent companion stream for a second noise source driven by `seed`.
RngSeed companion_seed(RngSeed seed);

/// Draw z(0) from the stationary law N(0, gamma^2 / (2 beta)).
struct StationaryInit {};
/// Start from a fixed value.
struct ValueInit {
  double value = 0.0;
};
using OUInit = std::variant<StationaryInit, ValueInit>;

/// Standard Wiener path on `grid` (which must start at 0).
SamplePath sample_wiener(std::span<const double> grid, RngSeed seed);

/// OU path by the exact Gaussian transition of the Langevin equation:
///   z[k+1] = z[k] e^{-beta dt} + gamma sqrt((1 - e^{-2 beta dt}) / (2 beta)) xi[k]
/// The first draw of the seeded stream always seeds z(0) (and is discarded
/// for ValueInit), so the innovations xi[k] line up across init modes and
/// across beta for a fixed seed.
SamplePath sample_ou(const OUParams &params, std::span<const double> grid,
                     RngSeed seed, OUInit init = StationaryInit{});

/// [lower, upper] of one perturbed parameter over a horizon.
struct EnvelopeBounds {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Nodewise [min, max] of nominal + alpha * z.
EnvelopeBounds perturbed_envelope(const SamplePath &z, double nominal,
                                  double alpha);

struct CalibrationRequest {
  RngSeed seed;
  double gamma = 0.1;
  double alpha = 0.0;
  double nominal = 0.0;
  double lower = 0.0; ///< b1, exclusive
  double upper = 0.0; ///< b2, exclusive
  double horizon = 1.0;
  double grid_step = 1e-2;
  double beta_start = 1.0;
};

struct Calibration {
  double beta = 0.0;
  EnvelopeBounds envelope;
  SamplePath path; ///< the accepted OU realization z
  int trials = 0;
};

/// Smallest beta in beta_start * {1, 2, 4, ...} (capped at 2^40 beta_start)
/// for which nominal + alpha z(t) stays strictly inside (lower, upper) at
/// every grid node. Every trial regenerates the stationary OU path from the
/// same seed. Throws CalibrationFailure carrying the tightest envelope seen.
Calibration calibrate_beta(const CalibrationRequest &req);

/// Independent re-check used to confirm a calibration: regenerates the path
/// with `beta` and the request's seed and tests every node.
bool recheck_calibration(const CalibrationRequest &req, double beta);

struct ErgodicReport {
  double time_avg = 0.0;     ///< (1/T) int z ds
  double abs_time_avg = 0.0; ///< (1/T) int |z| ds
  double z_over_t = 0.0;     ///< |z(T)| / T
  double horizon = 0.0;
};

/// Trapezoidal time averages over the whole grid. Throws InvalidGrid on a
/// single-node path.
ErgodicReport ergodic_diagnostics(const SamplePath &path);

} // namespace oupop
