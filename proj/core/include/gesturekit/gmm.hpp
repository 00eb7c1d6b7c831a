#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gesturekit {

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double stddev = 1.0;

  friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

/// One-dimensional Gaussian mixture with components sorted by ascending mean.
struct GaussianMixture {
  std::vector<MixtureComponent> components;
  /// True when the fit fell back to a single Gaussian (too little data).
  bool fallback = false;

  /// Component that governs a value d: the one whose midpoint-delimited band
  /// contains d, i.e. component c when (μ_{c-1}+μ_c)/2 <= d < (μ_c+μ_{c+1})/2.
  std::size_t select(double d) const;
  double mean() const;
  double log_density(double x) const;
  double log_likelihood(std::span<const double> xs) const;

  friend bool operator==(const GaussianMixture&, const GaussianMixture&) = default;
};

struct MixtureFitConfig {
  std::size_t components = 3;
  std::size_t max_iters = 200;
  double tol = 1e-8;
  double sigma_floor = 1e-3;
};

struct MixtureFit {
  GaussianMixture mixture;
  /// Data log-likelihood before each EM step, plus the final value.
  std::vector<double> log_likelihood_history;
  std::size_t iterations = 0;
};

/// EM fit with seeded k-means++ initialization. Fewer than 3*k points yields a
/// single Gaussian with the sample mean and (population) standard deviation,
/// flagged as a fallback. Throws ValidationError on empty input.
MixtureFit fit_gmm(std::span<const double> xs, const MixtureFitConfig& cfg, std::uint64_t seed);

}  // namespace gesturekit
