// walker.hpp
// Walker + coin state on the line (Dim = 1) or square lattice (Dim = 2), and
// the one-step evolution U = S (I (x) C) for clean, dynamically disordered and
// statically disordered shifts.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/disorder.hpp"

namespace qwalk {

template <int Dim>
using Site = std::array<int, Dim>;

// Number of lattice sites in the box [-radius, radius]^Dim.
template <int Dim>
constexpr std::size_t box_volume(int radius) noexcept {
  const auto side = static_cast<std::size_t>(2 * radius + 1);
  return Dim == 1 ? side : side * side;
}

// Row-major offset of `site` inside the box of the given radius (x major).
template <int Dim>
constexpr std::size_t box_offset(const Site<Dim>& site, int radius) noexcept {
  const auto side = static_cast<std::size_t>(2 * radius + 1);
  std::size_t off = static_cast<std::size_t>(site[0] + radius);
  if constexpr (Dim == 2) off = off * side + static_cast<std::size_t>(site[1] + radius);
  return off;
}

template <int Dim>
constexpr bool in_box(const Site<Dim>& site, int radius) noexcept {
  for (int d = 0; d < Dim; ++d)
    if (site[d] < -radius || site[d] > radius) return false;
  return true;
}

// Calls fn(site, linear_offset) for every site of the box in storage order.
template <int Dim, typename Fn>
void for_each_site(int radius, Fn&& fn) {
  std::size_t off = 0;
  if constexpr (Dim == 1) {
    for (int x = -radius; x <= radius; ++x) fn(Site<1>{x}, off++);
  } else {
    for (int x = -radius; x <= radius; ++x)
      for (int y = -radius; y <= radius; ++y) fn(Site<2>{x, y}, off++);
  }
}

// Per-vertex jump lengths for static disorder. Values are a pure function of
// (seed, site), so growing the field never changes a value already drawn.
template <int Dim>
class JumpField {
 public:
  JumpField(DisorderSpec spec, int radius, std::uint64_t seed)
      : spec_(std::move(spec)), seed_(seed), radius_(-1) {
    grow(radius);
  }

  // Field with explicit values over [-radius, radius]^Dim (storage order).
  JumpField(int radius, std::vector<int> values, std::uint64_t seed = 0)
      : seed_(seed), radius_(radius), values_(std::move(values)) {
    if (radius < 0 || values_.size() != box_volume<Dim>(radius))
      throw std::invalid_argument("JumpField: value count does not match radius");
    if (std::any_of(values_.begin(), values_.end(), [](int v) { return v < 0; }))
      throw std::invalid_argument("JumpField: negative jump length");
  }

  int radius() const noexcept { return radius_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const int> values() const noexcept { return values_; }
  bool can_grow() const noexcept { return spec_.has_value(); }

  int at(const Site<Dim>& site) const {
    if (!in_box<Dim>(site, radius_)) throw std::out_of_range("JumpField: site outside field");
    return values_[box_offset<Dim>(site, radius_)];
  }

  // Extends the field to cover [-radius, radius]^Dim. Only seeded fields grow.
  void grow(int radius) {
    if (radius <= radius_) return;
    if (!spec_) throw std::logic_error("JumpField: explicit fields cannot grow");
    std::vector<int> next(box_volume<Dim>(radius));
    for_each_site<Dim>(radius, [&](const Site<Dim>& s, std::size_t off) {
      next[off] = in_box<Dim>(s, radius_) ? values_[box_offset<Dim>(s, radius_)] : draw(s);
    });
    values_ = std::move(next);
    radius_ = radius;
  }

 private:
  int draw(const Site<Dim>& s) const {
    const auto ux = static_cast<std::uint32_t>(s[0]);
    const auto uy = Dim == 2 ? static_cast<std::uint32_t>(s[1]) : 0u;
    const std::uint64_t domain = (std::uint64_t{ux} << 32) | uy;
    RandomStream stream(seed_, domain ^ 0x5fa7u);
    return sample_jump(*spec_, stream);
  }

  std::optional<DisorderSpec> spec_;
  std::uint64_t seed_;
  int radius_;
  std::vector<int> values_;
};

template <int Dim>
inline JumpField<Dim> sample_field(const DisorderSpec& spec, int radius, std::uint64_t seed) {
  return JumpField<Dim>(spec, radius, seed);
}

template <int Dim>
class WalkerState {
 public:
  static_assert(Dim == 1 || Dim == 2, "walks are defined on the line and the square lattice");
  static constexpr int kCoinDim = 2 * Dim;

  // Walker at the origin with the given coin amplitudes (unit norm).
  explicit WalkerState(std::span<const Complex> coin_amplitudes) : amplitudes_(kCoinDim) {
    if (coin_amplitudes.size() != static_cast<std::size_t>(kCoinDim))
      throw std::invalid_argument("initial coin vector has wrong dimension");
    const double n = squared_norm(coin_amplitudes);
    if (!(std::abs(n - 1.0) <= kNormTolerance))
      throw std::invalid_argument("initial coin vector is not normalized");
    std::copy(coin_amplitudes.begin(), coin_amplitudes.end(), amplitudes_.begin());
  }

  int time() const noexcept { return t_; }
  int radius() const noexcept { return radius_; }
  std::size_t sites() const noexcept { return box_volume<Dim>(radius_); }
  std::span<const Complex> data() const noexcept { return amplitudes_; }

  // Amplitude psi^coin(site); zero outside the populated box.
  Complex amplitude(const Site<Dim>& site, int coin) const {
    if (coin < 0 || coin >= kCoinDim) throw std::out_of_range("coin index out of range");
    if (!in_box<Dim>(site, radius_)) return {};
    return amplitudes_[box_offset<Dim>(site, radius_) * kCoinDim + coin];
  }

  double norm_squared() const noexcept { return squared_norm(amplitudes_); }

  // Squared norm right after the last step, before any renormalisation.
  double last_step_norm() const noexcept { return last_norm_; }

  // (I (x) C) followed by the coin-conditioned displacement by `jump`.
  // jump == 1 is the clean shift; jump == 0 applies the coin only.
  void step(const CoinOperator& coin, int jump) {
    check_coin(coin);
    if (jump < 0) throw std::invalid_argument("jump length must be nonnegative");
    const int next_radius = radius_ + jump;
    prepare_scratch(next_radius);
    std::array<Complex, kCoinDim> mixed;
    for_each_site<Dim>(radius_, [&](const Site<Dim>& s, std::size_t off) {
      coin.apply(std::span<const Complex>(amplitudes_).subspan(off * kCoinDim, kCoinDim), mixed);
      scatter(s, mixed, jump, next_radius);
    });
    finish(next_radius);
  }

  // Static disorder: the amplitude at vertex v moves by J(v). Targets of
  // different vertices can coincide; amplitudes are then summed and the
  // squared norm is no longer 1 (see last_step_norm()).
  void step(const CoinOperator& coin, const JumpField<Dim>& field) {
    check_coin(coin);
    if (field.radius() < radius_)
      throw std::out_of_range("jump field radius " + std::to_string(field.radius()) +
                              " does not cover walker radius " + std::to_string(radius_));
    // the box only needs to reach the furthest target of a populated site
    auto empty = [&](std::size_t off) {
      const auto cell = std::span<const Complex>(amplitudes_).subspan(off * kCoinDim, kCoinDim);
      return std::all_of(cell.begin(), cell.end(), [](const Complex& a) { return a == Complex{}; });
    };
    int next_radius = radius_;
    for_each_site<Dim>(radius_, [&](const Site<Dim>& s, std::size_t off) {
      if (empty(off)) return;
      int reach = 0;
      for (int d = 0; d < Dim; ++d) reach = std::max(reach, std::abs(s[d]));
      next_radius = std::max(next_radius, reach + field.at(s));
    });
    prepare_scratch(next_radius);
    std::array<Complex, kCoinDim> mixed;
    for_each_site<Dim>(radius_, [&](const Site<Dim>& s, std::size_t off) {
      if (empty(off)) return;
      coin.apply(std::span<const Complex>(amplitudes_).subspan(off * kCoinDim, kCoinDim), mixed);
      scatter(s, mixed, field.at(s), next_radius);
    });
    finish(next_radius);
  }

 private:
  void check_coin(const CoinOperator& coin) const {
    if (coin.dimension() != kCoinDim) throw std::invalid_argument("coin dimension does not match lattice");
  }

  void prepare_scratch(int next_radius) {
    scratch_.assign(box_volume<Dim>(next_radius) * kCoinDim, Complex{});
  }

  void scatter(const Site<Dim>& s, const std::array<Complex, kCoinDim>& mixed, int jump, int next_radius) {
    for (int c = 0; c < kCoinDim; ++c) {
      Site<Dim> target = s;
      const int axis = c / 2;
      target[axis] += (c % 2 == 0) ? jump : -jump;
      scratch_[box_offset<Dim>(target, next_radius) * kCoinDim + c] += mixed[c];
    }
  }

  void finish(int next_radius) {
    amplitudes_.swap(scratch_);
    radius_ = next_radius;
    ++t_;
    last_norm_ = norm_squared();
  }

  int t_ = 0;
  int radius_ = 0;
  double last_norm_ = 1.0;
  std::vector<Complex> amplitudes_;
  std::vector<Complex> scratch_;
};

template <int Dim>
inline WalkerState<Dim> initial_state(std::span<const Complex> coin_amplitudes) {
  return WalkerState<Dim>(coin_amplitudes);
}

template <int Dim>
inline WalkerState<Dim> initial_state(CoinKind preset) {
  const auto v = preset_coin_state(preset);
  return WalkerState<Dim>(v);
}

// P(site) = sum_j |psi^j(site)|^2 over the populated box.
template <int Dim>
struct PositionDistribution {
  int radius = 0;
  int time = 0;
  std::vector<double> probabilities;

  double at(const Site<Dim>& site) const {
    return in_box<Dim>(site, radius) ? probabilities[box_offset<Dim>(site, radius)] : 0.0;
  }
  double total() const {
    double s = 0.0;
    for (double p : probabilities) s += p;
    return s;
  }
  // Copy scaled to unit total mass.
  PositionDistribution normalized() const {
    PositionDistribution out = *this;
    const double z = total();
    if (z > 0.0)
      for (double& p : out.probabilities) p /= z;
    return out;
  }
};

template <int Dim>
PositionDistribution<Dim> position_distribution(const WalkerState<Dim>& state) {
  constexpr int kc = WalkerState<Dim>::kCoinDim;
  PositionDistribution<Dim> out{state.radius(), state.time(), std::vector<double>(state.sites())};
  const auto data = state.data();
  for (std::size_t i = 0; i < out.probabilities.size(); ++i) {
    double p = 0.0;
    for (int c = 0; c < kc; ++c) p += std::norm(data[i * kc + c]);
    out.probabilities[i] = p;
  }
  return out;
}

// Source of the shift applied at each step of an evolution.
struct CleanShift {};

template <int Dim>
using ShiftSource = std::variant<CleanShift, std::span<const int>, JumpField<Dim>*>;

// Applies `steps` evolution steps, calling observer(state) after each one.
// A JumpField is grown in place (from its own seed) whenever the walker is
// about to leave it.
template <int Dim, typename Observer>
void evolve(WalkerState<Dim>& state, const CoinOperator& coin, ShiftSource<Dim> shift, int steps,
            Observer&& observer) {
  if (steps < 0) throw std::invalid_argument("evolve: negative step count");
  for (int i = 0; i < steps; ++i) {
    if (std::holds_alternative<CleanShift>(shift)) {
      state.step(coin, 1);
    } else if (auto* seq = std::get_if<std::span<const int>>(&shift)) {
      if (static_cast<std::size_t>(i) >= seq->size())
        throw std::out_of_range("evolve: jump sequence shorter than requested steps");
      state.step(coin, (*seq)[i]);
    } else {
      JumpField<Dim>& field = *std::get<JumpField<Dim>*>(shift);
      if (field.radius() < state.radius()) field.grow(state.radius());
      state.step(coin, field);
    }
    observer(state);
  }
}

}  // namespace qwalk
