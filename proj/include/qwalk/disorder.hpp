// disorder.hpp
// Discrete jump-length distributions: pmf, closed-form moments, truncation
// radius and seeded sampling of jump sequences.

#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "qwalk/rng.hpp"

namespace qwalk {

struct Poisson {
  double lambda;
  bool operator==(const Poisson&) const = default;
};
// N trials with success probability p. p == 1 is accepted as the degenerate
// constant-jump distribution.
struct Binomial {
  int n;
  double p;
  bool operator==(const Binomial&) const = default;
};
// Successes in n draws without replacement from N items of which m are successes.
struct Hypergeometric {
  int population;
  int successes;
  int draws;
  bool operator==(const Hypergeometric&) const = default;
};
// Failures before the r-th success.
struct NegativeBinomial {
  int r;
  double p;
  bool operator==(const NegativeBinomial&) const = default;
};
// Failures before the first success.
struct Geometric {
  double p;
  bool operator==(const Geometric&) const = default;
};

using Distribution = std::variant<Poisson, Binomial, Hypergeometric, NegativeBinomial, Geometric>;

struct DistributionMoments {
  double mean;
  double variance;
  double fano;  // variance / mean
};

inline constexpr double kDefaultTailBound = 1e-4;

namespace detail {

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Exact product form for small arguments, log-gamma beyond 20.
inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 20) return std::exp(log_choose(n, k));
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

inline void require(bool ok, const char* param, const std::string& why) {
  if (!ok) throw std::invalid_argument(std::string("invalid disorder parameter '") + param + "': " + why);
}

inline void validate(const Distribution& d) {
  std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Poisson>) {
          require(std::isfinite(x.lambda) && x.lambda > 0.0, "lambda", "must be > 0");
        } else if constexpr (std::is_same_v<T, Binomial>) {
          require(x.n >= 1, "n", "must be >= 1");
          require(x.p > 0.0 && x.p <= 1.0, "p", "must be in (0, 1]");
        } else if constexpr (std::is_same_v<T, Hypergeometric>) {
          require(x.population >= 1, "N", "must be >= 1");
          require(x.successes >= 0 && x.successes <= x.population, "m", "must be in [0, N]");
          require(x.draws >= 1 && x.draws <= x.population, "n", "must be in (0, N]");
        } else if constexpr (std::is_same_v<T, NegativeBinomial>) {
          require(x.r >= 1, "r", "must be an integer >= 1");
          require(x.p > 0.0 && x.p < 1.0, "p", "must be in (0, 1)");
        } else {
          require(x.p > 0.0 && x.p < 1.0, "p", "must be in (0, 1)");
        }
      },
      d);
}

}  // namespace detail

// Largest k with nonzero mass, or -1 for unbounded support.
inline int support_max(const Distribution& d) {
  if (auto* b = std::get_if<Binomial>(&d)) return b->n;
  if (auto* h = std::get_if<Hypergeometric>(&d)) return std::min(h->successes, h->draws);
  return -1;
}

inline double pmf(const Distribution& d, int k) {
  if (k < 0) return 0.0;
  return std::visit(
      [k](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Poisson>) {
          return std::exp(-x.lambda + k * std::log(x.lambda) - std::lgamma(k + 1.0));
        } else if constexpr (std::is_same_v<T, Binomial>) {
          if (k > x.n) return 0.0;
          if (x.p == 1.0) return k == x.n ? 1.0 : 0.0;
          return detail::choose(x.n, k) * std::pow(x.p, k) * std::pow(1.0 - x.p, x.n - k);
        } else if constexpr (std::is_same_v<T, Hypergeometric>) {
          const int failures = x.population - x.successes;
          if (k > x.successes || k > x.draws || x.draws - k > failures) return 0.0;
          if (x.population > 20)
            return std::exp(detail::log_choose(x.successes, k) + detail::log_choose(failures, x.draws - k) -
                            detail::log_choose(x.population, x.draws));
          return detail::choose(x.successes, k) * detail::choose(failures, x.draws - k) /
                 detail::choose(x.population, x.draws);
        } else if constexpr (std::is_same_v<T, NegativeBinomial>) {
          return std::exp(detail::log_choose(k + x.r - 1, x.r - 1) + x.r * std::log(x.p) +
                          k * std::log1p(-x.p));
        } else {
          return std::pow(1.0 - x.p, k) * x.p;
        }
      },
      d);
}

// P(X > k), summed from the pmf. For bounded supports the tail is summed
// directly so it reaches exactly zero at the support edge.
inline double tail_probability(const Distribution& d, int k) {
  if (k < 0) return 1.0;
  const int top = support_max(d);
  if (top >= 0) {
    double tail = 0.0;
    for (int j = top; j > k; --j) tail += pmf(d, j);
    return tail;
  }
  double cdf = 0.0;
  for (int j = 0; j <= k; ++j) cdf += pmf(d, j);
  return std::max(0.0, 1.0 - cdf);
}

// Minimal R with P(X > R) <= eps.
inline int truncation_radius(const Distribution& d, double eps = kDefaultTailBound) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("tail bound must be in (0, 1)");
  detail::validate(d);
  const int top = support_max(d);
  double cdf = 0.0;
  for (int r = 0;; ++r) {
    if (top >= 0 && r >= top) return top;
    cdf += pmf(d, r);
    const double tail = top >= 0 ? tail_probability(d, r) : 1.0 - cdf;
    if (tail <= eps) return r;
    if (r > 1'000'000) throw std::runtime_error("truncation radius search did not terminate");
  }
}

inline DistributionMoments exact_moments(const Distribution& d) {
  const auto mv = std::visit(
      [](const auto& x) -> std::pair<double, double> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Poisson>) {
          return {x.lambda, x.lambda};
        } else if constexpr (std::is_same_v<T, Binomial>) {
          return {x.n * x.p, x.n * x.p * (1.0 - x.p)};
        } else if constexpr (std::is_same_v<T, Hypergeometric>) {
          const double big_n = x.population;
          const double frac = x.successes / big_n;
          const double var = x.population > 1 ? x.draws * frac * (1.0 - frac) * (big_n - x.draws) / (big_n - 1.0) : 0.0;
          return {x.draws * frac, var};
        } else if constexpr (std::is_same_v<T, NegativeBinomial>) {
          return {x.r * (1.0 - x.p) / x.p, x.r * (1.0 - x.p) / (x.p * x.p)};
        } else {
          return {(1.0 - x.p) / x.p, (1.0 - x.p) / (x.p * x.p)};
        }
      },
      d);
  const double fano = mv.first > 0.0 ? mv.second / mv.first : std::numeric_limits<double>::quiet_NaN();
  return {mv.first, mv.second, fano};
}

inline std::string kind_name(const Distribution& d) {
  static constexpr const char* names[] = {"poisson", "binomial", "hypergeometric", "negative_binomial", "geometric"};
  return names[d.index()];
}

// A validated distribution together with its truncation radius.
class DisorderSpec {
 public:
  explicit DisorderSpec(Distribution dist, double tail_bound = kDefaultTailBound)
      : dist_(dist), eps_(tail_bound), radius_(qwalk::truncation_radius(dist, tail_bound)) {
    cdf_.reserve(radius_ + 1);
    double c = 0.0;
    for (int k = 0; k <= radius_; ++k) {
      c += pmf(dist_, k);
      cdf_.push_back(c);
    }
  }

  const Distribution& distribution() const noexcept { return dist_; }
  double tail_bound() const noexcept { return eps_; }
  int truncation_radius() const noexcept { return radius_; }
  // Untruncated cumulative distribution at k = 0..R.
  const std::vector<double>& cdf_table() const noexcept { return cdf_; }
  // pmf of the distribution conditioned on k <= R.
  double truncated_pmf(int k) const { return k > radius_ ? 0.0 : pmf(dist_, k) / cdf_.back(); }

 private:
  Distribution dist_;
  double eps_;
  int radius_;
  std::vector<double> cdf_;
};

// Inverse-CDF draw; a uniform beyond CDF(R) is rejected and redrawn, which
// realises the distribution conditioned on k <= R.
inline int sample_jump(const DisorderSpec& spec, RandomStream& stream) {
  const auto& cdf = spec.cdf_table();
  for (;;) {
    const double u = stream.uniform();
    if (u >= cdf.back()) continue;
    int k = 0;
    while (u >= cdf[k]) ++k;
    return k;
  }
}

struct JumpSequence {
  std::vector<int> values;  // J_1 .. J_T
  std::uint64_t seed = 0;
};

inline JumpSequence sample_sequence(const DisorderSpec& spec, int steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("jump sequence needs at least one step");
  RandomStream stream(seed);
  JumpSequence seq{std::vector<int>(static_cast<std::size_t>(steps)), seed};
  for (int& j : seq.values) j = sample_jump(spec, stream);
  return seq;
}

}  // namespace qwalk
