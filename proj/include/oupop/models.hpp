#pragma once

#include <oupop/noise.hpp>

#include <string_view>
#include <utility>
#include <variant>

namespace oupop {

/// dx/dt = x (a + alpha z - x): logistic growth with a perturbed carrying
/// capacity.
struct LogisticKSpec {
  double a = 3.0;
  double alpha = 0.0;
  OUParams ou;

  void validate() const;
};

/// dx/dt = (r + alpha z) x (1 - x / c): logistic growth with a perturbed
/// growth rate. x = c is an equilibrium for every realization.
struct LogisticRSpec {
  double r = 2.0;
  double c = 1.5;
  double alpha = 0.0;
  OUParams ou;

  void validate() const;
};

/// Competitive Lotka-Volterra system with perturbed growth rates
///   dx/dt = x (lambda + alpha z - a x - b y)
///   dy/dt = y (mu + alpha z - c x - e y)
/// By default both equations see the same realization z.
struct LVSpec {
  double lambda = 25.0;
  double mu = 22.0;
  double a = 20.0;
  double b = 4.0;
  double c = 1.0;
  double e = 30.0;
  double alpha = 0.0;
  OUParams ou;
  bool independent_noise = false;

  void validate() const;
};

using ModelSpec = std::variant<LogisticKSpec, LogisticRSpec, LVSpec>;

std::string_view model_name(const ModelSpec &spec);
int state_dimension(const ModelSpec &spec);
double noise_alpha(const ModelSpec &spec);
const OUParams &noise_params(const ModelSpec &spec);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double v) const { return v >= lower && v <= upper; }
  Interval inflated(double eps) const { return {lower - eps, upper + eps}; }
};

struct Box2D {
  Interval x;
  Interval y;

  bool contains(double px, double py) const {
    return x.contains(px) && y.contains(py);
  }
  Box2D inflated(double eps) const { return {x.inflated(eps), y.inflated(eps)}; }
};

double rhs_logistic_k(const LogisticKSpec &spec, double x, double z);
double rhs_logistic_r(const LogisticRSpec &spec, double x, double z);

/// Right-hand side with separate noise values for each species. The shared
/// form passes the same z twice.
std::pair<double, double> rhs_lv(const LVSpec &spec, double x, double y,
                                 double z_lambda, double z_mu);
inline std::pair<double, double> rhs_lv(const LVSpec &spec, double x, double y,
                                        double z) {
  return rhs_lv(spec, x, y, z, z);
}

/// Noise-free coexistence: e/b > mu/lambda > c/a and a e - b c > 0.
bool deterministic_coexistence(const LVSpec &spec);

struct PersistenceConditions {
  bool first_species = false;  ///< mu_hi / lambda_lo < e / b
  bool second_species = false; ///< mu_lo / lambda_hi > c / a

  bool both() const { return first_species && second_species; }
};

PersistenceConditions lv_persistence_conditions(const EnvelopeBounds &lambda,
                                                const EnvelopeBounds &mu,
                                                const LVSpec &spec);

/// Attracting box
///   [(lambda_lo - b mu_hi / e) / a - eps, lambda_hi / a]
/// x [(mu_lo - c lambda_hi / a) / e - eps, mu_hi / e]
/// with lower bounds floored at 0. Throws InconsistentBounds if a side is
/// empty.
Box2D lv_attracting_box(const EnvelopeBounds &lambda, const EnvelopeBounds &mu,
                        const LVSpec &spec, double eps = 0.0);

/// [a_lo - eps, a_hi + eps]; the envelope itself at eps = 0.
Interval logistic_k_attracting_interval(const EnvelopeBounds &a, double eps = 0.0);

} // namespace oupop
