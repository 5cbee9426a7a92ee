// moments.hpp
// Moments and spread of position distributions.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qwalk/walker.hpp"

namespace qwalk {

// How the spread sigma(t) of a distribution is measured.
//   Radial:    sigma^2 = m2 - m1^2 with m_k = sum |r|^k P(r)  (the 2D convention)
//   Cartesian: sigma^2 = sum |r|^2 P - |sum r P|^2           (ordinary standard
//              deviation; on the line this is the usual Var(x))
enum class SpreadMeasure { Radial, Cartesian };

template <int Dim>
constexpr SpreadMeasure default_spread_measure() noexcept {
  return Dim == 2 ? SpreadMeasure::Radial : SpreadMeasure::Cartesian;
}

inline std::string_view to_string(SpreadMeasure m) { return m == SpreadMeasure::Radial ? "radial" : "cartesian"; }

inline SpreadMeasure parse_spread_measure(std::string_view s) {
  if (s == "radial") return SpreadMeasure::Radial;
  if (s == "cartesian") return SpreadMeasure::Cartesian;
  throw std::invalid_argument("unknown spread measure '" + std::string(s) + "'");
}

struct Moments {
  int t = 0;
  double m1 = 0.0;  // radial first moment
  double m2 = 0.0;  // radial second moment
  double sigma = 0.0;
};

using MomentSeries = std::vector<Moments>;

namespace detail {

template <int Dim>
double radius_of(const Site<Dim>& s) {
  if constexpr (Dim == 1) return std::abs(static_cast<double>(s[0]));
  else return std::sqrt(static_cast<double>(s[0]) * s[0] + static_cast<double>(s[1]) * s[1]);
}

}  // namespace detail

// m_k = sum (x^2 + y^2)^{k/2} P(x, y); on the line |x|^k.
template <int Dim>
double moment(const PositionDistribution<Dim>& p, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("moment order must be 1 or 2");
  double m = 0.0;
  for_each_site<Dim>(p.radius, [&](const Site<Dim>& s, std::size_t off) {
    const double r = detail::radius_of<Dim>(s);
    m += (k == 1 ? r : r * r) * p.probabilities[off];
  });
  return m;
}

// Single pass over the distribution. P is used as given; callers renormalise
// first when the total mass is not 1.
template <int Dim>
Moments spread(const PositionDistribution<Dim>& p, SpreadMeasure measure = default_spread_measure<Dim>()) {
  double m1 = 0.0, m2 = 0.0;
  double mean[2] = {0.0, 0.0};
  for_each_site<Dim>(p.radius, [&](const Site<Dim>& s, std::size_t off) {
    const double w = p.probabilities[off];
    const double r2 = Dim == 1 ? double(s[0]) * s[0] : double(s[0]) * s[0] + double(s[1]) * s[1];
    m1 += std::sqrt(r2) * w;
    m2 += r2 * w;
    for (int d = 0; d < Dim; ++d) mean[d] += s[d] * w;
  });
  double var = 0.0;
  if (measure == SpreadMeasure::Radial) {
    var = m2 - m1 * m1;
  } else {
    var = m2 - mean[0] * mean[0] - mean[1] * mean[1];
  }
  // Rounding can push an exactly-zero variance slightly negative.
  return {p.time, m1, m2, std::sqrt(std::max(0.0, var))};
}

}  // namespace qwalk
