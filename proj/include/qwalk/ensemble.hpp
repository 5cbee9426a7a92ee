// ensemble.hpp
// Disorder-averaged sigma(t) with batch-wise growth of the realization set
// until two consecutive fitted exponents agree to two significant figures.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/disorder.hpp"
#include "qwalk/fit.hpp"
#include "qwalk/moments.hpp"
#include "qwalk/rng.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

enum class DisorderMode { None, Dynamic, Static };

struct EnsembleProtocol {
  int batch_size = 50;
  int min_realizations = 0;
  int max_realizations = 2000;
  bool convergence = true;
  std::uint64_t master_seed = 1;
  int t_min = 18;
  int t_max = 50;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ConvergencePoint {
  int realizations = 0;
  double alpha = 0.0;
  double ci95 = 0.0;
};

// sigma and raw squared norm for t = 0..T of one realization.
struct RealizationTrace {
  std::vector<double> sigma;
  std::vector<double> norm;
};

struct EnsembleResult {
  std::vector<double> sigma_mean;  // <sigma(t)>, t = 0..T
  std::vector<double> norm_mean;   // mean raw squared norm, t = 0..T
  int realizations = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;  // seeds[i] drives realization i
  std::vector<ConvergencePoint> history;
  ScalingFit fit;
  bool converged = false;
};

// Equality after rounding both values to two significant figures.
inline bool same_two_significant(double a, double b) {
  auto key = [](double v) -> std::pair<int, long long> {
    if (v == 0.0) return {0, 0};
    int e = static_cast<int>(std::floor(std::log10(std::abs(v))));
    long long m = std::llround(v / std::pow(10.0, e - 1));
    if (std::llabs(m) >= 100) {  // 9.96 -> 10
      ++e;
      m = std::llround(v / std::pow(10.0, e - 1));
    }
    return {e, m};
  };
  return key(a) == key(b);
}

namespace detail {

// Runs fn(i) for i in [begin, end) on up to `threads` workers.
template <typename Fn>
void parallel_for(int begin, int end, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const int count = end - begin;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < end; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// realize(seed) -> RealizationTrace with steps + 1 entries.
template <typename Realize>
EnsembleResult run_ensemble(const EnsembleProtocol& protocol, int steps, Realize&& realize) {
  if (protocol.batch_size < 1) throw std::invalid_argument("ensemble: batch size must be >= 1");
  if (protocol.max_realizations < 1) throw std::invalid_argument("ensemble: max realizations must be >= 1");
  if (protocol.t_max > steps) throw std::invalid_argument("ensemble: fit window exceeds step count");

  EnsembleResult result;
  result.master_seed = protocol.master_seed;
  std::vector<double> sigma_sum(steps + 1, 0.0), norm_sum(steps + 1, 0.0);

  while (result.realizations < protocol.max_realizations) {
    const int begin = result.realizations;
    const int end = std::min(begin + protocol.batch_size, protocol.max_realizations);
    std::vector<RealizationTrace> batch(end - begin);
    for (int i = begin; i < end; ++i) result.seeds.push_back(derive_seed(protocol.master_seed, i));
    detail::parallel_for(begin, end, protocol.threads,
                         [&](int i) { batch[i - begin] = realize(result.seeds[i]); });
    // Merge in realization order so the sums do not depend on scheduling.
    for (const auto& trace : batch) {
      if (trace.sigma.size() != sigma_sum.size() || trace.norm.size() != norm_sum.size())
        throw std::logic_error("ensemble: realization returned a series of the wrong length");
      for (std::size_t t = 0; t < sigma_sum.size(); ++t) {
        sigma_sum[t] += trace.sigma[t];
        norm_sum[t] += trace.norm[t];
      }
    }
    result.realizations = end;
    result.sigma_mean.resize(sigma_sum.size());
    result.norm_mean.resize(norm_sum.size());
    for (std::size_t t = 0; t < sigma_sum.size(); ++t) {
      result.sigma_mean[t] = sigma_sum[t] / end;
      result.norm_mean[t] = norm_sum[t] / end;
    }
    result.fit = fit_exponent(result.sigma_mean, protocol.t_min, protocol.t_max);
    result.history.push_back({end, result.fit.alpha, result.fit.ci95});

    const auto h = result.history.size();
    result.converged = h >= 2 && same_two_significant(result.history[h - 1].alpha, result.history[h - 2].alpha);
    if (protocol.convergence && result.converged && end >= protocol.min_realizations) break;
  }
  return result;
}

// Everything needed to run one quantum walk realization.
struct WalkSetup {
  CoinOperator coin = make_coin(CoinKind::Grover);
  std::vector<Complex> initial = preset_coin_state(CoinKind::Grover);
  int steps = 50;
  DisorderMode mode = DisorderMode::None;
  std::optional<DisorderSpec> disorder;
  std::optional<SpreadMeasure> measure;  // default per dimension when empty
};

template <int Dim>
RealizationTrace quantum_trace(const WalkSetup& setup, std::uint64_t seed) {
  const SpreadMeasure measure = setup.measure.value_or(default_spread_measure<Dim>());
  WalkerState<Dim> state(setup.initial);
  RealizationTrace trace;
  trace.sigma.reserve(setup.steps + 1);
  trace.norm.reserve(setup.steps + 1);
  trace.sigma.push_back(0.0);
  trace.norm.push_back(state.norm_squared());
  auto record = [&](const WalkerState<Dim>& s) {
    auto p = position_distribution(s);
    trace.norm.push_back(p.total());
    if (setup.mode == DisorderMode::Static) p = p.normalized();
    trace.sigma.push_back(spread(p, measure).sigma);
  };
  if (setup.mode != DisorderMode::None && !setup.disorder)
    throw std::invalid_argument("disordered walk needs a disorder spec");
  switch (setup.mode) {
    case DisorderMode::None:
      evolve<Dim>(state, setup.coin, CleanShift{}, setup.steps, record);
      break;
    case DisorderMode::Dynamic: {
      const auto seq = sample_sequence(*setup.disorder, setup.steps, seed);
      evolve<Dim>(state, setup.coin, std::span<const int>(seq.values), setup.steps, record);
      break;
    }
    case DisorderMode::Static: {
      auto field = sample_field<Dim>(*setup.disorder, 0, seed);
      evolve<Dim>(state, setup.coin, &field, setup.steps, record);
      break;
    }
  }
  return trace;
}

template <int Dim>
EnsembleResult ensemble_average(const WalkSetup& setup, const EnsembleProtocol& protocol) {
  return run_ensemble(protocol, setup.steps, [&](std::uint64_t seed) { return quantum_trace<Dim>(setup, seed); });
}

}  // namespace qwalk
