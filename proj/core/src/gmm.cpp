#include "gesturekit/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gesturekit/error.hpp"
#include "gesturekit/rng.hpp"
#include "numeric.hpp"

namespace gesturekit {

namespace {

constexpr double kMinWeight = 1e-12;

double log_normal(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - 0.5 * std::log(2.0 * std::numbers::pi);
}

GaussianMixture single_gaussian(std::span<const double> xs, double floor) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  GaussianMixture m;
  m.components.push_back({1.0, mean, std::max(std::sqrt(var), floor)});
  m.fallback = true;
  return m;
}

std::vector<double> seed_centers(std::span<const double> xs, std::size_t k, Rng& rng) {
  std::vector<double> centers;
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  centers.push_back(xs[pick(rng)]);
  std::vector<double> d2(xs.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (xs[i] - c) * (xs[i] - c));
      d2[i] = best;
      total += best;
    }
    if (!(total > 0.0)) {
      centers.push_back(xs[pick(rng)]);
      continue;
    }
    const double target = unit(rng) * total;
    double acc = 0.0;
    std::size_t chosen = xs.size() - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      acc += d2[i];
      if (acc >= target) {
        chosen = i;
        break;
      }
    }
    centers.push_back(xs[chosen]);
  }
  return centers;
}

}  // namespace

std::size_t GaussianMixture::select(double d) const {
  std::size_t c = 0;
  while (c + 1 < components.size() && d >= 0.5 * (components[c].mean + components[c + 1].mean)) ++c;
  return c;
}

double GaussianMixture::mean() const {
  double m = 0.0;
  for (const auto& c : components) m += c.weight * c.mean;
  return m;
}

double GaussianMixture::log_density(double x) const {
  std::vector<double> terms;
  terms.reserve(components.size());
  for (const auto& c : components) terms.push_back(std::log(c.weight) + log_normal(x, c.mean, c.stddev));
  return log_sum_exp(terms);
}

double GaussianMixture::log_likelihood(std::span<const double> xs) const {
  double ll = 0.0;
  for (double x : xs) ll += log_density(x);
  return ll;
}

MixtureFit fit_gmm(std::span<const double> xs, const MixtureFitConfig& cfg, std::uint64_t seed) {
  if (xs.empty()) throw ValidationError("cannot fit a mixture to zero points");
  if (cfg.components == 0) throw ValidationError("mixture needs at least one component");
  MixtureFit fit;
  if (xs.size() < 3 * cfg.components) {
    fit.mixture = single_gaussian(xs, cfg.sigma_floor);
    fit.log_likelihood_history.push_back(fit.mixture.log_likelihood(xs));
    return fit;
  }

  const std::size_t k = cfg.components;
  const std::size_t n = xs.size();
  Rng rng(seed);
  const auto centers = seed_centers(xs, k, rng);
  const double spread = std::max(single_gaussian(xs, cfg.sigma_floor).components[0].stddev, cfg.sigma_floor);

  std::vector<MixtureComponent> comps(k);
  for (std::size_t c = 0; c < k; ++c) comps[c] = {1.0 / static_cast<double>(k), centers[c], spread};

  std::vector<double> resp(n * k);
  std::vector<double> terms(k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    // E-step (also yields the log-likelihood of the current parameters).
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        terms[c] = std::log(comps[c].weight) + log_normal(xs[i], comps[c].mean, comps[c].stddev);
      }
      const double lse = log_sum_exp(terms);
      ll += lse;
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(terms[c] - lse);
    }
    fit.log_likelihood_history.push_back(ll);
    if (iter > 0 && ll - prev_ll < cfg.tol * std::max(1.0, std::abs(ll))) break;
    prev_ll = ll;

    // M-step; the variance floor is the constrained maximizer, so EM stays monotone.
    for (std::size_t c = 0; c < k; ++c) {
      double nc = 0.0, sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nc += resp[i * k + c];
        sx += resp[i * k + c] * xs[i];
      }
      if (nc < kMinWeight * static_cast<double>(n)) {
        comps[c].weight = kMinWeight;
        continue;
      }
      const double mean = sx / nc;
      double sv = 0.0;
      for (std::size_t i = 0; i < n; ++i) sv += resp[i * k + c] * (xs[i] - mean) * (xs[i] - mean);
      comps[c].weight = nc / static_cast<double>(n);
      comps[c].mean = mean;
      comps[c].stddev = std::max(std::sqrt(sv / nc), cfg.sigma_floor);
    }
    double wsum = 0.0;
    for (const auto& c : comps) wsum += c.weight;
    for (auto& c : comps) c.weight /= wsum;
    fit.iterations = iter + 1;
  }

  std::stable_sort(comps.begin(), comps.end(),
                   [](const MixtureComponent& a, const MixtureComponent& b) { return a.mean < b.mean; });
  fit.mixture.components = std::move(comps);
  return fit;
}

}  // namespace gesturekit
