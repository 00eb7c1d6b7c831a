#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "gesturekit/rng.hpp"

namespace gesturekit {

/// A lazily sampled random value. Composition builds a new sampler; nothing is
/// evaluated until a query (sample, pr, expected_value) pulls samples.
template <class T>
class Uncertain {
 public:
  using Sampler = std::function<T(Rng&)>;

  explicit Uncertain(Sampler sampler) : sampler_(std::move(sampler)) {}

  static Uncertain constant(T value) {
    return Uncertain([value](Rng&) { return value; });
  }

  T sample(Rng& rng) const { return sampler_(rng); }

  template <class F>
  auto map(F f) const -> Uncertain<decltype(f(std::declval<T>()))> {
    using U = decltype(f(std::declval<T>()));
    auto s = sampler_;
    return Uncertain<U>([s, f](Rng& rng) { return f(s(rng)); });
  }

  template <class U, class F>
  auto combine(const Uncertain<U>& other, F f) const
      -> Uncertain<decltype(f(std::declval<T>(), std::declval<U>()))> {
    using R = decltype(f(std::declval<T>(), std::declval<U>()));
    auto a = sampler_;
    return Uncertain<R>([a, other, f](Rng& rng) {
      T x = a(rng);
      U y = other.sample(rng);
      return f(x, y);
    });
  }

  /// Uncertain<bool> that is true where the sample equals value.
  Uncertain<bool> equals(const T& value) const {
    return map([value](const T& x) { return x == value; });
  }

 private:
  Sampler sampler_;
};

struct HypothesisConfig {
  /// Threshold the Bernoulli mean is tested against.
  double prob = 0.5;
  double alpha = 0.1;
  std::size_t max_samples = 1000;
  std::size_t batch = 50;
};

/// Throws ValidationError unless 0 < prob < 1, 0 < alpha < 0.5, batch >= 1,
/// max_samples >= batch.
void validate(const HypothesisConfig& cfg);

/// Wald interval p̂ ± z_{1-α/2} sqrt(p̂(1-p̂)/n).
struct WaldInterval {
  double estimate;
  double lower;
  double upper;
};
WaldInterval wald_interval(std::size_t successes, std::size_t n, double alpha);

/// Sequential test of "mean > prob" fed one batch at a time. Decides true once
/// the lower bound exceeds prob, false once the upper bound falls below it, and
/// by the point estimate when max_samples is reached.
class SequentialTest {
 public:
  SequentialTest(double prob, const HypothesisConfig& cfg);

  /// Adds a batch of outcomes; returns true once decided. Batches past the
  /// decision are ignored.
  bool observe(std::size_t successes, std::size_t trials);

  bool decided() const { return decided_; }
  bool result() const { return result_; }
  std::size_t samples() const { return n_; }
  std::size_t successes() const { return k_; }
  /// Size of the next batch to feed (0 once decided).
  std::size_t next_batch() const;

 private:
  double prob_;
  HypothesisConfig cfg_;
  double z_;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  bool decided_ = false;
  bool result_ = false;
};

struct PrResult {
  bool decision = false;
  std::size_t samples = 0;
  std::size_t successes = 0;
};

/// Runs the sequential test on a recorded outcome stream (1 = true). The stream
/// must hold at least as many outcomes as the test consumes (max_samples suffices).
PrResult sequential_test(std::span<const std::uint8_t> outcomes, double prob, const HypothesisConfig& cfg);

/// Supremum of the thresholds at which sequential_test(outcomes, ·) accepts.
/// sequential_test(outcomes, t) is true exactly for t below this level (up to
/// the boundary point). Requires outcomes.size() >= cfg.max_samples.
double acceptance_level(std::span<const std::uint8_t> outcomes, const HypothesisConfig& cfg);

/// Hypothesis query on an uncertain truth value: is P(value) > cfg.prob?
PrResult pr_detailed(const Uncertain<bool>& value, const HypothesisConfig& cfg, Rng& rng);
bool pr(const Uncertain<bool>& value, const HypothesisConfig& cfg, Rng& rng);

/// Sample mean over n draws.
double expected_value(const Uncertain<double>& value, std::size_t n, Rng& rng);

}  // namespace gesturekit
