// coin.hpp
// Coin operators acting on the internal direction space of the walker.
//
// Basis convention (2D): 0 -> +x, 1 -> -x, 2 -> +y, 3 -> -y.
// Basis convention (1D): 0 -> +x, 1 -> -x.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

using Complex = std::complex<double>;

enum class CoinKind { Grover, Fourier, Hadamard4, Hadamard2, Custom };

// Direction carried by each 2D coin basis index.
enum class CoinBasis2D : int { PlusX = 0, MinusX = 1, PlusY = 2, MinusY = 3 };

inline constexpr double kUnitarityTolerance = 1e-12;
inline constexpr double kNormTolerance = 1e-12;

inline std::string_view to_string(CoinKind kind) {
  switch (kind) {
    case CoinKind::Grover: return "grover";
    case CoinKind::Fourier: return "fourier";
    case CoinKind::Hadamard4: return "hadamard";
    case CoinKind::Hadamard2: return "hadamard2";
    case CoinKind::Custom: return "custom";
  }
  return "custom";
}

inline CoinKind parse_coin_kind(std::string_view name) {
  if (name == "grover") return CoinKind::Grover;
  if (name == "fourier") return CoinKind::Fourier;
  if (name == "hadamard" || name == "hadamard4") return CoinKind::Hadamard4;
  if (name == "hadamard2") return CoinKind::Hadamard2;
  throw std::invalid_argument("unknown coin '" + std::string(name) + "'");
}

// Dense unitary on C^2 or C^4, row-major. Construction checks unitarity.
class CoinOperator {
 public:
  CoinOperator(CoinKind kind, int dimension, std::vector<Complex> entries)
      : kind_(kind), dim_(dimension), entries_(std::move(entries)) {
    if (dim_ != 2 && dim_ != 4)
      throw std::invalid_argument("coin dimension must be 2 or 4");
    if (entries_.size() != static_cast<std::size_t>(dim_ * dim_))
      throw std::invalid_argument("coin entry count does not match dimension");
    const double err = unitarity_error();
    if (!(err <= kUnitarityTolerance))
      throw std::invalid_argument("coin is not unitary (max |CC^+ - I| = " + std::to_string(err) + ")");
  }

  CoinKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dim_; }
  std::span<const Complex> entries() const noexcept { return entries_; }
  const Complex& operator()(int row, int col) const { return entries_[row * dim_ + col]; }

  // out = C * in. Both spans have dimension() elements.
  void apply(std::span<const Complex> in, std::span<Complex> out) const noexcept {
    for (int i = 0; i < dim_; ++i) {
      Complex acc{0.0, 0.0};
      for (int j = 0; j < dim_; ++j) acc += entries_[i * dim_ + j] * in[j];
      out[i] = acc;
    }
  }

  std::vector<Complex> apply(std::span<const Complex> in) const {
    std::vector<Complex> out(dim_);
    apply(in, out);
    return out;
  }

  // max_{ij} |(C C^+ - I)_{ij}|
  double unitarity_error() const noexcept {
    double worst = 0.0;
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        Complex acc{0.0, 0.0};
        for (int k = 0; k < dim_; ++k) acc += entries_[i * dim_ + k] * std::conj(entries_[j * dim_ + k]);
        if (i == j) acc -= 1.0;
        worst = std::max(worst, std::abs(acc));
      }
    }
    return worst;
  }

 private:
  CoinKind kind_;
  int dim_;
  std::vector<Complex> entries_;
};

namespace detail {

inline std::vector<Complex> grover_entries() {
  std::vector<Complex> m(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i * 4 + j] = (i == j) ? -0.5 : 0.5;
  return m;
}

// F_{jk} = i^{jk} / 2
inline std::vector<Complex> fourier_entries() {
  static constexpr std::array<Complex, 4> powers_of_i{Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                                      Complex{0, -1}};
  std::vector<Complex> m(16);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) m[j * 4 + k] = 0.5 * powers_of_i[(j * k) % 4];
  return m;
}

inline std::vector<Complex> hadamard2_entries() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h, h, -h};
}

// H2 (x) H2. Entries are exactly +-1/2.
inline std::vector<Complex> hadamard4_entries() {
  static constexpr std::array<int, 4> sign2{1, 1, 1, -1};
  std::vector<Complex> m(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i * 4 + j] = 0.5 * sign2[(i >> 1) * 2 + (j >> 1)] * sign2[(i & 1) * 2 + (j & 1)];
  return m;
}

}  // namespace detail

inline CoinOperator make_coin(CoinKind kind) {
  switch (kind) {
    case CoinKind::Grover: return {kind, 4, detail::grover_entries()};
    case CoinKind::Fourier: return {kind, 4, detail::fourier_entries()};
    case CoinKind::Hadamard4: return {kind, 4, detail::hadamard4_entries()};
    case CoinKind::Hadamard2: return {kind, 2, detail::hadamard2_entries()};
    case CoinKind::Custom: break;
  }
  throw std::invalid_argument("make_coin: Custom coins need explicit entries");
}

inline CoinOperator make_custom_coin(int dimension, std::vector<Complex> entries) {
  return {CoinKind::Custom, dimension, std::move(entries)};
}

// Initial coin states that make the clean walks symmetric about y = x and y = -x.
inline std::vector<Complex> preset_coin_state(CoinKind kind) {
  const double s2 = std::sqrt(2.0);
  switch (kind) {
    case CoinKind::Grover: return {0.5, 0.5, -0.5, -0.5};
    case CoinKind::Fourier: {
      const Complex c = Complex{1.0, -1.0} / (2.0 * s2);
      return {0.5, c, 0.5, -c};
    }
    case CoinKind::Hadamard4: return {0.5, Complex{0, 0.5}, Complex{0, -0.5}, 0.5};
    // Symmetric Hadamard walk on the line.
    case CoinKind::Hadamard2: return {1.0 / s2, Complex{0, 1.0 / s2}};
    case CoinKind::Custom: break;
  }
  throw std::invalid_argument("no preset coin state for custom coins");
}

inline double squared_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

}  // namespace qwalk
