#include <oupop/errors.hpp>
#include <oupop/models.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oupop {

namespace {

void require_positive(double v, const char *name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(name) + " must be > 0");
}

void require_nonnegative(double v, const char *name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(name) + " must be >= 0");
}

} // namespace

void LogisticKSpec::validate() const {
  require_positive(a, "a");
  require_nonnegative(alpha, "alpha");
  ou.validate();
}

void LogisticRSpec::validate() const {
  require_positive(r, "r");
  require_positive(c, "c");
  require_nonnegative(alpha, "alpha");
  ou.validate();
}

void LVSpec::validate() const {
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  require_positive(a, "a");
  require_positive(b, "b");
  require_positive(c, "c");
  require_positive(e, "e");
  require_nonnegative(alpha, "alpha");
  ou.validate();
}

std::string_view model_name(const ModelSpec &spec) {
  struct {
    std::string_view operator()(const LogisticKSpec &) const { return "logistic-k"; }
    std::string_view operator()(const LogisticRSpec &) const { return "logistic-r"; }
    std::string_view operator()(const LVSpec &) const { return "lotka-volterra"; }
  } visitor;
  return std::visit(visitor, spec);
}

int state_dimension(const ModelSpec &spec) {
  return std::holds_alternative<LVSpec>(spec) ? 2 : 1;
}

double noise_alpha(const ModelSpec &spec) {
  return std::visit([](const auto &s) { return s.alpha; }, spec);
}

const OUParams &noise_params(const ModelSpec &spec) {
  return std::visit([](const auto &s) -> const OUParams & { return s.ou; },
                    spec);
}

double rhs_logistic_k(const LogisticKSpec &spec, double x, double z) {
  return x * (spec.a + spec.alpha * z - x);
}

double rhs_logistic_r(const LogisticRSpec &spec, double x, double z) {
  return (spec.r + spec.alpha * z) * x * (1.0 - x / spec.c);
}

std::pair<double, double> rhs_lv(const LVSpec &spec, double x, double y,
                                 double z_lambda, double z_mu) {
  const double dx = x * (spec.lambda + spec.alpha * z_lambda - spec.a * x - spec.b * y);
  const double dy = y * (spec.mu + spec.alpha * z_mu - spec.c * x - spec.e * y);
  return {dx, dy};
}

bool deterministic_coexistence(const LVSpec &spec) {
  const double ratio = spec.mu / spec.lambda;
  return spec.e / spec.b > ratio && ratio > spec.c / spec.a &&
         spec.a * spec.e - spec.b * spec.c > 0.0;
}

PersistenceConditions lv_persistence_conditions(const EnvelopeBounds &lambda,
                                                const EnvelopeBounds &mu,
                                                const LVSpec &spec) {
  if (!(lambda.lower > 0.0) || !(mu.lower > 0.0))
    throw InconsistentBounds("persistence analysis needs positive envelopes");
  PersistenceConditions out;
  out.first_species = mu.upper / lambda.lower < spec.e / spec.b;
  out.second_species = mu.lower / lambda.upper > spec.c / spec.a;
  return out;
}

Box2D lv_attracting_box(const EnvelopeBounds &lambda, const EnvelopeBounds &mu,
                        const LVSpec &spec, double eps) {
  if (!(eps >= 0.0))
    throw ParameterError("eps must be >= 0");
  Box2D box;
  box.x.lower = (lambda.lower - spec.b * mu.upper / spec.e) / spec.a - eps;
  box.x.upper = lambda.upper / spec.a;
  box.y.lower = (mu.lower - spec.c * lambda.upper / spec.a) / spec.e - eps;
  box.y.upper = mu.upper / spec.e;
  if (box.x.lower > box.x.upper || box.y.lower > box.y.upper) {
    std::ostringstream os;
    os << "attracting box is empty: x [" << box.x.lower << ", " << box.x.upper
       << "], y [" << box.y.lower << ", " << box.y.upper << "]";
    throw InconsistentBounds(os.str());
  }
  box.x.lower = std::max(box.x.lower, 0.0);
  box.y.lower = std::max(box.y.lower, 0.0);
  return box;
}

Interval logistic_k_attracting_interval(const EnvelopeBounds &a, double eps) {
  if (!(a.lower > 0.0))
    throw InconsistentBounds("carrying-capacity envelope must be positive");
  return {a.lower - eps, a.upper + eps};
}

} // namespace oupop
