#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "gesturekit/hmm.hpp"
#include "gesturekit/synthetic.hpp"
#include "gesturekit/rng.hpp"
#include "gesturekit/trace.hpp"

namespace gesturekit::testkit {

inline std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = e(rng) + 1e-3);
  for (auto& x : p) x /= s;
  return p;
}

/// Fully random ergodic HMM.
inline Hmm random_hmm(Rng& rng, std::size_t n, std::size_t v) {
  Matrix a(n, n), b(n, v);
  for (std::size_t i = 0; i < n; ++i) {
    auto ra = random_simplex(rng, n);
    auto rb = random_simplex(rng, v);
    for (std::size_t j = 0; j < n; ++j) a(i, j) = ra[j];
    for (std::size_t k = 0; k < v; ++k) b(i, k) = rb[k];
  }
  return Hmm(std::move(a), std::move(b), random_simplex(rng, n), Topology::ergodic());
}

inline SymbolSequence random_obs(Rng& rng, std::size_t len, std::size_t v) {
  std::uniform_int_distribution<std::size_t> d(0, v - 1);
  SymbolSequence obs(len);
  for (auto& o : obs) o = static_cast<Symbol>(d(rng));
  return obs;
}

/// P(obs | θ) by summing over every state path; no recursion shared with the
/// forward pass. Exponential in the length, so tiny inputs only.
inline long double enumerate_likelihood(const Hmm& hmm, const SymbolSequence& obs) {
  const std::size_t n = hmm.n_states(), len = obs.size();
  std::vector<std::size_t> path(len, 0);
  long double total = 0.0L;
  while (true) {
    long double p = hmm.pi(path[0]) * hmm.b(path[0], obs[0]);
    for (std::size_t t = 1; t < len; ++t) p *= hmm.a(path[t - 1], path[t]) * hmm.b(path[t], obs[t]);
    total += p;
    std::size_t t = 0;
    while (t < len && ++path[t] == n) path[t++] = 0;
    if (t == len) break;
  }
  return total;
}

/// Trace sampled every dt seconds from the given points.
inline Trace make_trace(const std::vector<Vec3>& pts, double dt = 0.02, std::optional<std::string> label = {},
                        std::string id = {}) {
  std::vector<AccelSample> s;
  for (std::size_t i = 0; i < pts.size(); ++i) s.push_back({static_cast<double>(i) * dt, pts[i]});
  return Trace(std::move(s), std::move(label), std::nullopt, std::move(id));
}

/// Small labeled set: the first `gestures` catalogue entries at their full
/// scale with mild noise.
inline Dataset small_dataset(std::size_t gestures, std::size_t per_gesture, std::uint64_t seed,
                             double sigma = 0.03) {
  const auto templates = gesture_catalog(gestures);
  std::vector<NoiseSpec> noise(gestures);
  for (auto& n : noise) {
    n.sigma = {sigma, sigma, sigma};
    n.orientation_jitter = 0.02;
    n.speed_jitter = 0.03;
  }
  SyntheticSetConfig cfg;
  cfg.traces_per_gesture = per_gesture;
  cfg.seed = seed;
  return generate_dataset(templates, noise, cfg);
}

/// One movement (line-x, sensor noise only) recorded under two labels, alternating. No model can
/// tell the labels apart, so statistical classification splits its votes.
inline Dataset twin_dataset(std::size_t per_label, std::uint64_t seed) {
  const auto t = make_template("line-x");
  std::vector<Trace> out;
  for (std::size_t i = 0; i < 2 * per_label; ++i) {
    const NoiseSpec n{{0.02, 0.02, 0.02}, 0.0, 0.0, derive_seed(seed, i)};
    out.emplace_back(generate_gesture(t, n, default_sample_count(t)).samples(), i % 2 ? "twin" : "line-x",
                     std::nullopt, "t" + std::to_string(i));
  }
  return Dataset(std::move(out));
}

}  // namespace gesturekit::testkit
