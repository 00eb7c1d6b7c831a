#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/codebook.hpp"
#include "gesturekit/rng.hpp"
#include "gesturekit/trace.hpp"

namespace gesturekit {

class GmmErrorModel;

using Symbol = int;
using SymbolSequence = std::vector<Symbol>;

enum class QuantizerKind { kDeterministicSpherical, kDeterministicElliptical, kStatisticalGmm, kStatisticalRandom };

std::string to_string(QuantizerKind kind);
/// Accepts the canonical names plus the short forms spherical, elliptical, gmm, random.
QuantizerKind quantizer_kind_from_string(const std::string& s);
inline bool is_statistical(QuantizerKind k) {
  return k == QuantizerKind::kStatisticalGmm || k == QuantizerKind::kStatisticalRandom;
}
inline bool uses_spherical_codebook(QuantizerKind k) { return k == QuantizerKind::kDeterministicSpherical; }

/// Probability of mapping one sample to each codeword.
using CodewordDistribution = std::vector<double>;

/// Per-axis Gaussian over the signed offset (sample - codeword).
struct AxisGaussian {
  Vec3 mean{};
  Vec3 stddev{1.0, 1.0, 1.0};
  friend bool operator==(const AxisGaussian&, const AxisGaussian&) = default;
};

struct QuantizeOptions {
  /// Centered moving average (window 3) applied before quantization.
  bool smooth = false;
};

/// Points of the trace after the optional smoothing pass.
std::vector<Vec3> prepare_points(const Trace& trace, const QuantizeOptions& options = {});

/// Nearest-codeword symbol for every sample; ties go to the lowest index.
SymbolSequence quantize_deterministic(const Trace& trace, const Codebook& codebook, const QuantizeOptions& options = {});

/// Normalized product of per-axis Gaussian densities of each codeword's offset:
///   P(i) ∝ (2π σx² σy² σz²)^(-1/2) exp(-Σ_k (d_ik - μ_ik)² / (2 σ_ik²)).
/// Evaluated in log space; sigmas are clamped at kSigmaFloor.
CodewordDistribution axis_gaussian_distribution(std::span<const Vec3> offsets, std::span<const AxisGaussian> params);

/// Error-model driven distribution: for each codeword the mixture component is
/// chosen from the offset magnitude, then its per-axis Gaussian enters
/// axis_gaussian_distribution.
CodewordDistribution codeword_probabilities_gmm(const Vec3& sample, const Codebook& codebook,
                                                const GmmErrorModel& error_model);

/// P(i) = (1/d_i) / Σ_j (1/d_j); a point mass on the nearest codeword when any
/// distance falls below kDistanceFloor.
CodewordDistribution codeword_probabilities_inverse_distance(const Vec3& sample, const Codebook& codebook);

/// Draws whole symbol sequences from fixed per-sample codeword distributions.
class SequenceSampler {
 public:
  explicit SequenceSampler(std::span<const CodewordDistribution> per_sample);

  std::size_t length() const { return cumulative_.size(); }
  void draw(Rng& rng, SymbolSequence& out) const;
  SymbolSequence draw(Rng& rng) const;

 private:
  std::vector<std::vector<double>> cumulative_;
};

/// Per-sample distributions of a trace under a statistical quantizer kind.
/// Throws ValidationError for statistical_gmm without an error model.
std::vector<CodewordDistribution> trace_distributions(const Trace& trace, const Codebook& codebook, QuantizerKind kind,
                                                      const GmmErrorModel* error_model,
                                                      const QuantizeOptions& options = {});

/// Deterministic kinds ignore the seed and return quantize_deterministic.
/// Statistical kinds draw every symbol independently from its distribution.
SymbolSequence sample_observation_sequence(const Trace& trace, const Codebook& codebook, QuantizerKind kind,
                                           const GmmErrorModel* error_model, std::uint64_t seed,
                                           const QuantizeOptions& options = {});

}  // namespace gesturekit
