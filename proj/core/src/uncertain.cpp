#include "gesturekit/uncertain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "gesturekit/error.hpp"

namespace gesturekit {

namespace {

double two_sided_z(double alpha) {
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 1.0 - alpha / 2.0);
}

WaldInterval interval_with_z(std::size_t successes, std::size_t n, double z) {
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {p, p - half, p + half};
}

}  // namespace

void validate(const HypothesisConfig& cfg) {
  if (!(cfg.prob > 0.0 && cfg.prob < 1.0)) throw ValidationError("hypothesis prob must lie in (0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 0.5)) throw ValidationError("hypothesis alpha must lie in (0, 0.5)");
  if (cfg.batch == 0) throw ValidationError("hypothesis batch must be positive");
  if (cfg.max_samples < cfg.batch) throw ValidationError("max_samples must be at least one batch");
}

WaldInterval wald_interval(std::size_t successes, std::size_t n, double alpha) {
  if (n == 0) return {0.0, 0.0, 1.0};
  return interval_with_z(successes, n, two_sided_z(alpha));
}

SequentialTest::SequentialTest(double prob, const HypothesisConfig& cfg)
    : prob_(prob), cfg_(cfg), z_(two_sided_z(cfg.alpha)) {
  HypothesisConfig check = cfg;
  check.prob = prob;
  validate(check);
}

std::size_t SequentialTest::next_batch() const {
  if (decided_) return 0;
  return std::min(cfg_.batch, cfg_.max_samples - n_);
}

bool SequentialTest::observe(std::size_t successes, std::size_t trials) {
  if (decided_) return true;
  n_ += trials;
  k_ += successes;
  if (n_ == 0) return false;
  const auto w = interval_with_z(k_, n_, z_);
  if (w.lower > prob_) {
    decided_ = true;
    result_ = true;
  } else if (w.upper < prob_) {
    decided_ = true;
    result_ = false;
  } else if (n_ >= cfg_.max_samples) {
    decided_ = true;
    result_ = w.estimate > prob_;
  }
  return decided_;
}

PrResult sequential_test(std::span<const std::uint8_t> outcomes, double prob, const HypothesisConfig& cfg) {
  SequentialTest test(prob, cfg);
  std::size_t pos = 0;
  while (!test.decided()) {
    const std::size_t n = test.next_batch();
    if (pos + n > outcomes.size()) throw ValidationError("recorded outcome stream is too short for the test");
    std::size_t k = 0;
    for (std::size_t i = pos; i < pos + n; ++i) k += outcomes[i] ? 1 : 0;
    pos += n;
    test.observe(k, n);
  }
  return {test.result(), test.samples(), test.successes()};
}

double acceptance_level(std::span<const std::uint8_t> outcomes, const HypothesisConfig& cfg) {
  if (outcomes.size() < cfg.max_samples) throw ValidationError("recorded outcome stream is too short for the test");
  const double z = two_sided_z(cfg.alpha);
  // Accepts t iff some batch boundary n has lower_n > t while every earlier
  // upper bound stayed >= t (at the cap the point estimate plays lower_n).
  double level = -std::numeric_limits<double>::infinity();
  double min_upper = std::numeric_limits<double>::infinity();
  std::size_t n = 0, k = 0;
  while (n < cfg.max_samples) {
    const std::size_t step = std::min(cfg.batch, cfg.max_samples - n);
    for (std::size_t i = n; i < n + step; ++i) k += outcomes[i] ? 1 : 0;
    n += step;
    const auto w = interval_with_z(k, n, z);
    const double lower = n >= cfg.max_samples ? w.estimate : w.lower;
    level = std::max(level, std::min(lower, min_upper));
    min_upper = std::min(min_upper, w.upper);
  }
  return level;
}

PrResult pr_detailed(const Uncertain<bool>& value, const HypothesisConfig& cfg, Rng& rng) {
  validate(cfg);
  SequentialTest test(cfg.prob, cfg);
  while (!test.decided()) {
    const std::size_t n = test.next_batch();
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) k += value.sample(rng) ? 1 : 0;
    test.observe(k, n);
  }
  return {test.result(), test.samples(), test.successes()};
}

bool pr(const Uncertain<bool>& value, const HypothesisConfig& cfg, Rng& rng) {
  return pr_detailed(value, cfg, rng).decision;
}

double expected_value(const Uncertain<double>& value, std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("expected_value needs at least one sample");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += value.sample(rng);
  return s / static_cast<double>(n);
}

}  // namespace gesturekit
