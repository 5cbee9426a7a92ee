// fit.hpp
// Power-law exponent of sigma(t) ~ t^alpha from a log-log least-squares fit.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace qwalk {

// Degenerate or non-positive input to the exponent fit.
class FitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ScalingFit {
  double alpha = 0.0;      // minus the slope of ln(1/sigma) against ln t
  double intercept = 0.0;  // c in ln(1/sigma) = -alpha ln t + c
  double ci95 = 0.0;       // half-width of the 95% interval on alpha
  double lsq_error = 0.0;  // mean squared residual
  int t_min = 0;
  int t_max = 0;
  int points = 0;
};

// Ordinary least squares of ln(1/sigma_t) on ln t over t_min <= t <= t_max.
// `times` and `sigma` are parallel arrays.
inline ScalingFit fit_exponent(std::span<const double> times, std::span<const double> sigma, int t_min, int t_max) {
  if (times.size() != sigma.size()) throw std::invalid_argument("fit: series length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min || times[i] > t_max) continue;
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i]))
      throw FitError("fit: sigma must be positive inside the window (t = " + std::to_string(times[i]) + ")");
    if (!(times[i] > 0.0)) throw FitError("fit: t must be positive inside the window");
    xs.push_back(std::log(times[i]));
    ys.push_back(-std::log(sigma[i]));
  }
  const auto n = static_cast<int>(xs.size());
  if (n < 3) throw FitError("fit: need at least 3 points in [" + std::to_string(t_min) + ", " +
                                         std::to_string(t_max) + "], got " + std::to_string(n));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit: degenerate window (single t)");
  const double slope = sxy / sxx;
  const double c = my - slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - (slope * xs[i] + c);
    sse += r * r;
  }
  const boost::math::students_t dist(n - 2);
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  const double se = std::sqrt(sse / (n - 2) / sxx);
  return {-slope, c, tq * se, sse / n, t_min, t_max, n};
}

// Convenience for series indexed by t = 0, 1, 2, ...
inline ScalingFit fit_exponent(std::span<const double> sigma_by_t, int t_min, int t_max) {
  std::vector<double> t(sigma_by_t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return fit_exponent(t, sigma_by_t, t_min, t_max);
}

}  // namespace qwalk
