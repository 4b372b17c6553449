#pragma once

#include <oupop/path.hpp>

#include <cstddef>
#include <string>

namespace oupop {

struct FittedOU {
  double mu = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double residual_std = 0.0;
  std::size_t n_points = 0;
  double spacing = 0.0;
  double slope = 0.0;     ///< AR(1) coefficient e^{-beta dt}
  double intercept = 0.0;
};

/// Mean-square regression of v[k+1] on v[k] for a uniformly sampled series,
/// inverted through the exact OU transition:
///   beta = -ln(slope) / dt, mu = intercept / (1 - slope),
///   gamma = s sqrt(2 beta / (1 - slope^2)),
/// where s is the residual standard deviation with n - 2 degrees of freedom
/// (n = number of regression pairs).
/// Throws InvalidGrid for nonuniform spacing (relative deviation > 1e-9) or
/// fewer than 3 points, and NonMeanReverting unless 0 < slope < 1.
FittedOU fit_ou(const SamplePath &series);

/// `key = value` lines.
std::string format_fit_report(const FittedOU &fit);
/// JSON object with the same fields.
std::string format_fit_json(const FittedOU &fit);

} // namespace oupop
