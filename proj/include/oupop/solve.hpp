#pragma once

#include <oupop/errors.hpp>
#include <oupop/models.hpp>
#include <oupop/noise.hpp>
#include <oupop/path.hpp>

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace oupop {

/// Initial condition. `y` is ignored for scalar models.
struct State {
  double x = 0.0;
  double y = 0.0;
};

struct Trajectory {
  std::vector<double> grid;
  std::vector<double> x;
  std::vector<double> y; ///< empty for scalar models
  RngSeed seed;
  std::string model;

  int dimension() const { return y.empty() ? 1 : 2; }
  std::size_t size() const { return grid.size(); }
};

/// Default integration step and noise grid step.
inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultNoiseStep = 1e-2;
/// Any |state| above this (or a non-finite state) is reported as a blow-up.
inline constexpr double kBlowUpThreshold = 1e12;

/// Fixed-step RK4 along one noise realization; the noise is evaluated by
/// linear interpolation at every stage time. The last step is shortened so
/// the final node is exactly `horizon`. For the Lotka-Volterra model
/// `noise_mu` drives the second species when given; otherwise both species
/// share `noise`.
///
/// Throws CoverageError when the noise grid does not span [0, horizon] and
/// BlowUp when a state becomes non-finite, exceeds kBlowUpThreshold, or
/// crosses zero from a positive start.
Trajectory integrate(const ModelSpec &spec, State x0, double horizon,
                     double step, const SamplePath &noise,
                     const SamplePath *noise_mu = nullptr);

/// Variation-of-constants solution of the perturbed-carrying-capacity model
///   x(t) = x0 e^{E(t)} / (1 + x0 int_0^t e^{E(s)} ds),
///   E(t) = int_0^t (a + alpha z) ds,
/// with both integrals by trapezoidal quadrature on the noise grid. The
/// cumulative sums are built once; each evaluation is a bisection plus a
/// partial last panel. Evaluated in the rescaled form
///   x0 / (e^{-E(t)} + x0 int_0^t e^{E(s) - E(t)} ds)
/// which does not overflow for long horizons.
class LogisticKClosedForm {
public:
  LogisticKClosedForm(const LogisticKSpec &spec, const SamplePath &noise,
                      double x0);
  double operator()(double t) const;

private:
  SamplePath noise_;
  double a_, alpha_, x0_;
  std::vector<double> exponent_; // E at nodes
  std::vector<double> scaled_;   // int_0^{t_k} e^{E(s) - E(t_k)} ds
};

/// x(t) = x0 / (e^{-R(t)} (1 - x0/c) + x0/c), R(t) = int_0^t (r + alpha z) ds.
class LogisticRClosedForm {
public:
  LogisticRClosedForm(const LogisticRSpec &spec, const SamplePath &noise,
                      double x0);
  double operator()(double t) const;

private:
  SamplePath noise_;
  double r_, c_, alpha_, x0_;
  std::vector<double> exponent_; // R at nodes
};

double closed_form_logistic_k(const LogisticKSpec &spec,
                              const SamplePath &noise, double x0, double t);
double closed_form_logistic_r(const LogisticRSpec &spec,
                              const SamplePath &noise, double x0, double t);

/// How each seed's noise realization is produced.
///  - no target: beta is fixed to the spec's OU beta and the envelope is the
///    observed range of the perturbed parameter;
///  - target: beta is calibrated by doubling from the spec's OU beta until
///    the perturbed parameter stays inside the target interval.
/// For the Lotka-Volterra model `target` constrains lambda and `target_mu`
/// constrains mu.
struct NoiseSetup {
  std::optional<Interval> target;
  std::optional<Interval> target_mu;
  double grid_step = kDefaultNoiseStep;
};

struct Realization {
  RngSeed seed;
  double beta = 0.0;
  SamplePath noise;
  std::optional<SamplePath> noise_mu; ///< independent-noise LV only
  double beta_mu = 0.0;
  EnvelopeBounds envelope;                   ///< a, r or lambda
  std::optional<EnvelopeBounds> envelope_mu; ///< LV only
};

/// Generates (and calibrates, if requested) the noise for one seed.
/// Throws ParameterError when a logistic-k envelope is not strictly positive.
Realization realize_noise(const ModelSpec &spec, const NoiseSetup &setup,
                          double horizon, RngSeed seed);

/// Failure of one ensemble member, tagged with its seed.
class SeedFailure : public Error {
public:
  SeedFailure(RngSeed seed, const std::string &what);
  RngSeed seed() const { return seed_; }

private:
  RngSeed seed_;
};

struct ComponentEnvelope {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> mean;
};

struct EnsembleResult {
  std::vector<Realization> realizations;
  std::vector<Trajectory> trajectories;
  std::vector<double> grid;
  ComponentEnvelope x;
  ComponentEnvelope y; ///< empty for scalar models
};

EnsembleResult ensemble(const ModelSpec &spec, State x0, double horizon,
                        double step, const std::vector<RngSeed> &seeds,
                        const NoiseSetup &setup = {});

using Region = std::variant<Interval, Box2D>;

struct AbsorptionReport {
  std::optional<double> entry_time;
  bool stayed = false;
  Region region; ///< the eps-inflated region actually tested
};

/// First grid time after which the state stays inside the eps-inflated
/// region through the end of the trajectory.
AbsorptionReport absorption_report(const Trajectory &traj,
                                   const Region &region, double eps);

// CSV exports.
void write_trajectory_csv(const std::filesystem::path &file,
                          const Trajectory &traj);
void write_envelope_csv(const std::filesystem::path &file,
                        const EnsembleResult &result);

} // namespace oupop
