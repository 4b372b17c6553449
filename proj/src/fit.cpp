#include <oupop/errors.hpp>
#include <oupop/fit.hpp>

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace oupop {

FittedOU fit_ou(const SamplePath &series) {
  const auto t = series.grid();
  const auto v = series.values();
  const std::size_t n = series.size();
  if (n < 3)
    throw InvalidGrid("OU fit needs at least 3 points");

  const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (std::abs((t[k + 1] - t[k]) - dt) > 1e-9 * dt) {
      std::ostringstream os;
      os << "OU fit needs a uniform grid; spacing at index " << k << " is "
         << t[k + 1] - t[k] << ", expected " << dt;
      throw InvalidGrid(os.str());
    }
  }

  // Centered sums keep the normal equations well conditioned.
  const std::size_t m = n - 1;
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mean_x += v[k];
    mean_y += v[k + 1];
  }
  mean_x /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = v[k] - mean_x;
    sxx += dx * dx;
    sxy += dx * (v[k + 1] - mean_y);
  }
  if (!(sxx > 0.0))
    throw NonMeanReverting("series is constant; regression is degenerate");
  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;
  if (!(slope > 0.0 && slope < 1.0)) {
    std::ostringstream os;
    os << "AR(1) slope " << slope << " outside (0, 1); series is not mean reverting";
    throw NonMeanReverting(os.str());
  }

  double ssr = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double res = v[k + 1] - (intercept + slope * v[k]);
    ssr += res * res;
  }
  const double dof = m > 2 ? static_cast<double>(m - 2) : 1.0;
  const double s = std::sqrt(ssr / dof);

  FittedOU fit;
  fit.slope = slope;
  fit.intercept = intercept;
  fit.spacing = dt;
  fit.beta = -std::log(slope) / dt;
  fit.mu = intercept / (1.0 - slope);
  fit.gamma = s * std::sqrt(2.0 * fit.beta / (1.0 - slope * slope));
  fit.residual_std = s;
  fit.n_points = n;
  if (!(fit.gamma > 0.0))
    throw NonMeanReverting("series has zero residual variance");
  return fit;
}

std::string format_fit_report(const FittedOU &fit) {
  std::ostringstream os;
  os << "mu = " << format_double(fit.mu) << '\n'
     << "beta = " << format_double(fit.beta) << '\n'
     << "gamma = " << format_double(fit.gamma) << '\n'
     << "residual_std = " << format_double(fit.residual_std) << '\n'
     << "n_points = " << fit.n_points << '\n'
     << "spacing = " << format_double(fit.spacing) << '\n';
  return os.str();
}

std::string format_fit_json(const FittedOU &fit) {
  nlohmann::ordered_json j;
  j["mu"] = fit.mu;
  j["beta"] = fit.beta;
  j["gamma"] = fit.gamma;
  j["residual_std"] = fit.residual_std;
  j["n_points"] = fit.n_points;
  j["spacing"] = fit.spacing;
  return j.dump(2);
}

} // namespace oupop
