#include "gesturekit/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gesturekit/error.hpp"
#include "gesturekit/error_model.hpp"
#include "numeric.hpp"

namespace gesturekit {

std::string to_string(QuantizerKind kind) {
  switch (kind) {
    case QuantizerKind::kDeterministicSpherical: return "deterministic_spherical";
    case QuantizerKind::kDeterministicElliptical: return "deterministic_elliptical";
    case QuantizerKind::kStatisticalGmm: return "statistical_gmm";
    case QuantizerKind::kStatisticalRandom: return "statistical_random";
  }
  return "unknown";
}

QuantizerKind quantizer_kind_from_string(const std::string& s) {
  if (s == "deterministic_spherical" || s == "spherical") return QuantizerKind::kDeterministicSpherical;
  if (s == "deterministic_elliptical" || s == "elliptical") return QuantizerKind::kDeterministicElliptical;
  if (s == "statistical_gmm" || s == "gmm") return QuantizerKind::kStatisticalGmm;
  if (s == "statistical_random" || s == "random") return QuantizerKind::kStatisticalRandom;
  throw ValidationError("unknown quantizer kind '" + s + "'");
}

std::vector<Vec3> prepare_points(const Trace& trace, const QuantizeOptions& options) {
  auto pts = trace.points();
  if (!options.smooth || pts.size() < 3) return pts;
  std::vector<Vec3> out(pts.size());
  for (std::size_t t = 0; t < pts.size(); ++t) {
    const std::size_t lo = t == 0 ? 0 : t - 1;
    const std::size_t hi = std::min(t + 1, pts.size() - 1);
    Vec3 acc{};
    for (std::size_t j = lo; j <= hi; ++j) acc = acc + pts[j];
    out[t] = acc * (1.0 / static_cast<double>(hi - lo + 1));
  }
  return out;
}

SymbolSequence quantize_deterministic(const Trace& trace, const Codebook& codebook, const QuantizeOptions& options) {
  const auto pts = prepare_points(trace, options);
  SymbolSequence out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(static_cast<Symbol>(codebook.nearest(p)));
  return out;
}

CodewordDistribution axis_gaussian_distribution(std::span<const Vec3> offsets, std::span<const AxisGaussian> params) {
  if (offsets.size() != params.size() || offsets.empty()) {
    throw ValidationError("axis Gaussian distribution needs one parameter set per codeword");
  }
  std::vector<double> log_terms(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    double log_var_product = 0.0;
    double exponent = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double sigma = std::max(params[i].stddev[k], kSigmaFloor);
      const double z = offsets[i][k] - params[i].mean[k];
      log_var_product += 2.0 * std::log(sigma);
      exponent -= z * z / (2.0 * sigma * sigma);
    }
    log_terms[i] = -0.5 * (std::log(2.0 * std::numbers::pi) + log_var_product) + exponent;
  }
  const double lse = log_sum_exp(log_terms);
  CodewordDistribution p(offsets.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_terms[i] - lse);
  return p;
}

CodewordDistribution codeword_probabilities_gmm(const Vec3& sample, const Codebook& codebook,
                                                const GmmErrorModel& error_model) {
  if (error_model.size() != codebook.size()) {
    throw ValidationError("error model does not cover every codeword");
  }
  std::vector<Vec3> offsets(codebook.size());
  std::vector<AxisGaussian> params(codebook.size());
  for (std::size_t i = 0; i < codebook.size(); ++i) {
    offsets[i] = sample - codebook[i];
    params[i] = error_model.params_for(i, offsets[i]);
  }
  return axis_gaussian_distribution(offsets, params);
}

CodewordDistribution codeword_probabilities_inverse_distance(const Vec3& sample, const Codebook& codebook) {
  const std::size_t n = codebook.size();
  CodewordDistribution p(n, 0.0);
  std::vector<double> d(n);
  std::size_t nearest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = distance(sample, codebook[i]);
    if (d[i] < d[nearest]) nearest = i;
  }
  if (d[nearest] < kDistanceFloor) {
    p[nearest] = 1.0;
    return p;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += 1.0 / d[i];
  for (std::size_t i = 0; i < n; ++i) p[i] = (1.0 / d[i]) / total;
  return p;
}

SequenceSampler::SequenceSampler(std::span<const CodewordDistribution> per_sample) {
  cumulative_.reserve(per_sample.size());
  for (const auto& dist : per_sample) {
    std::vector<double> c(dist.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      acc += dist[i];
      c[i] = acc;
    }
    cumulative_.push_back(std::move(c));
  }
}

void SequenceSampler::draw(Rng& rng, SymbolSequence& out) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.resize(cumulative_.size());
  for (std::size_t t = 0; t < cumulative_.size(); ++t) {
    const auto& c = cumulative_[t];
    const double u = unit(rng) * c.back();
    auto it = std::upper_bound(c.begin(), c.end(), u);
    if (it == c.end()) --it;
    out[t] = static_cast<Symbol>(it - c.begin());
  }
}

SymbolSequence SequenceSampler::draw(Rng& rng) const {
  SymbolSequence out;
  draw(rng, out);
  return out;
}

std::vector<CodewordDistribution> trace_distributions(const Trace& trace, const Codebook& codebook, QuantizerKind kind,
                                                      const GmmErrorModel* error_model,
                                                      const QuantizeOptions& options) {
  const auto pts = prepare_points(trace, options);
  std::vector<CodewordDistribution> out;
  out.reserve(pts.size());
  switch (kind) {
    case QuantizerKind::kStatisticalGmm:
      if (!error_model) throw ValidationError("statistical_gmm quantization requires an error model");
      for (const auto& p : pts) out.push_back(codeword_probabilities_gmm(p, codebook, *error_model));
      break;
    case QuantizerKind::kStatisticalRandom:
      for (const auto& p : pts) out.push_back(codeword_probabilities_inverse_distance(p, codebook));
      break;
    default:
      for (const auto& p : pts) {
        CodewordDistribution d(codebook.size(), 0.0);
        d[codebook.nearest(p)] = 1.0;
        out.push_back(std::move(d));
      }
  }
  return out;
}

SymbolSequence sample_observation_sequence(const Trace& trace, const Codebook& codebook, QuantizerKind kind,
                                           const GmmErrorModel* error_model, std::uint64_t seed,
                                           const QuantizeOptions& options) {
  if (!is_statistical(kind)) return quantize_deterministic(trace, codebook, options);
  const auto dists = trace_distributions(trace, codebook, kind, error_model, options);
  Rng rng(seed);
  return SequenceSampler(dists).draw(rng);
}

}  // namespace gesturekit
