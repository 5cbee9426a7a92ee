// classical.hpp
// Classical random walk on the square lattice: closed-form probabilities,
// their Gaussian approximant, and the jump-length iterative map.
//
// The value type is a template parameter so the same map runs in double
// precision and in exact rational arithmetic (boost::rational<long long>).

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/rational.hpp>

#include "qwalk/disorder.hpp"
#include "qwalk/ensemble.hpp"
#include "qwalk/moments.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

using Rational = boost::rational<long long>;

template <typename T = double>
struct ClassicalDistribution {
  int radius = 0;
  int time = 0;
  std::vector<T> probabilities;  // box [-radius, radius]^2, x major

  static ClassicalDistribution point_mass() { return {0, 0, {T(1)}}; }

  T at(int x, int y) const {
    const Site<2> s{x, y};
    return in_box<2>(s, radius) ? probabilities[box_offset<2>(s, radius)] : T(0);
  }
  T total() const {
    T s(0);
    for (const auto& p : probabilities) s += p;
    return s;
  }
};

namespace detail {

inline bool crw_reachable(int t, int x, int y) {
  if (t < 0) return false;
  if (std::abs(x) + std::abs(y) > t) return false;
  return ((x + y - t) % 2 + 2) % 2 == 0;
}

inline long long choose_exact(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace detail

// P_t(x, y) = 4^-t C(t, (t+x+y)/2) C(t, (t+x-y)/2) when x + y = t (mod 2) and
// |x| + |y| <= t; zero otherwise.
inline double crw_exact(int t, int x, int y) {
  if (!detail::crw_reachable(t, x, y)) return 0.0;
  const int a = (t + x + y) / 2;
  const int b = (t + x - y) / 2;
  if (t <= 60)
    return std::ldexp(static_cast<double>(detail::choose_exact(t, a)) * static_cast<double>(detail::choose_exact(t, b)),
                      -2 * t);
  return std::exp(detail::log_choose(t, a) + detail::log_choose(t, b) - 2.0 * t * std::numbers::ln2);
}

// Exact value as a fraction. Valid while 4^t fits in 63 bits (t <= 31).
inline Rational crw_exact_rational(int t, int x, int y) {
  if (t > 31) throw std::out_of_range("crw_exact_rational: t too large for 64-bit fractions");
  if (!detail::crw_reachable(t, x, y)) return Rational(0);
  const int a = (t + x + y) / 2;
  const int b = (t + x - y) / 2;
  // C(t,a) C(t,b) <= C(31,15)^2 < 2^62
  return Rational(detail::choose_exact(t, a) * detail::choose_exact(t, b), 1LL << (2 * t));
}

// (2 / (pi t)) exp(-(x^2 + y^2) / t). For cross-checks only.
inline double crw_asymptotic(int t, double x, double y) {
  if (t < 1) throw std::invalid_argument("crw_asymptotic: t must be >= 1");
  return 2.0 / (std::numbers::pi * t) * std::exp(-(x * x + y * y) / t);
}

template <typename T>
ClassicalDistribution<T> crw_exact_distribution(int t) {
  ClassicalDistribution<T> d{t, t, std::vector<T>(box_volume<2>(t), T(0))};
  for_each_site<2>(t, [&](const Site<2>& s, std::size_t off) {
    if constexpr (std::is_same_v<T, Rational>) d.probabilities[off] = crw_exact_rational(t, s[0], s[1]);
    else d.probabilities[off] = static_cast<T>(crw_exact(t, s[0], s[1]));
  });
  return d;
}

// P'(x, y) = [P(x-J, y) + P(x+J, y) + P(x, y-J) + P(x, y+J)] / 4
template <typename T>
ClassicalDistribution<T> crw_disordered_step(const ClassicalDistribution<T>& p, int jump) {
  if (jump < 0) throw std::invalid_argument("jump length must be nonnegative");
  const int next = p.radius + jump;
  ClassicalDistribution<T> out{next, p.time + 1, std::vector<T>(box_volume<2>(next), T(0))};
  const T quarter = T(1) / T(4);
  for_each_site<2>(p.radius, [&](const Site<2>& s, std::size_t off) {
    const T w = p.probabilities[off] * quarter;
    if (w == T(0)) return;
    out.probabilities[box_offset<2>({s[0] + jump, s[1]}, next)] += w;
    out.probabilities[box_offset<2>({s[0] - jump, s[1]}, next)] += w;
    out.probabilities[box_offset<2>({s[0], s[1] + jump}, next)] += w;
    out.probabilities[box_offset<2>({s[0], s[1] - jump}, next)] += w;
  });
  return out;
}

inline PositionDistribution<2> to_position_distribution(const ClassicalDistribution<double>& p) {
  return {p.radius, p.time, p.probabilities};
}

// Moments of each distribution in a trajectory (radial by default).
inline MomentSeries crw_sigma(const std::vector<ClassicalDistribution<double>>& trajectory,
                              SpreadMeasure measure = SpreadMeasure::Radial) {
  MomentSeries out;
  out.reserve(trajectory.size());
  for (const auto& p : trajectory) out.push_back(spread(to_position_distribution(p), measure));
  return out;
}

// sigma(t), t = 0..steps, for a clean (no spec) or Poisson-style disordered walk.
inline RealizationTrace classical_trace(int steps, const std::optional<DisorderSpec>& disorder, std::uint64_t seed,
                                        SpreadMeasure measure = SpreadMeasure::Radial) {
  std::vector<int> jumps(static_cast<std::size_t>(steps), 1);
  if (disorder && steps > 0) jumps = sample_sequence(*disorder, steps, seed).values;
  RealizationTrace trace;
  auto p = ClassicalDistribution<double>::point_mass();
  trace.sigma.push_back(0.0);
  trace.norm.push_back(1.0);
  for (int j : jumps) {
    p = crw_disordered_step(p, j);
    trace.sigma.push_back(spread(to_position_distribution(p), measure).sigma);
    trace.norm.push_back(p.total());
  }
  return trace;
}

inline EnsembleResult classical_ensemble(int steps, const std::optional<DisorderSpec>& disorder,
                                         const EnsembleProtocol& protocol,
                                         SpreadMeasure measure = SpreadMeasure::Radial) {
  return run_ensemble(protocol, steps,
                      [&](std::uint64_t seed) { return classical_trace(steps, disorder, seed, measure); });
}

}  // namespace qwalk
