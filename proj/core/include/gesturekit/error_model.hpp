#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gesturekit/codebook.hpp"
#include "gesturekit/gmm.hpp"
#include "gesturekit/quantizer.hpp"
#include "gesturekit/trace.hpp"

namespace gesturekit {

/// Codewords with fewer residuals than this inherit the gesture-global fit.
inline constexpr std::size_t kMinResidualsPerCodeword = 9;

/// Signed per-axis offsets (sample - assigned codeword), pooled by codeword.
struct ResidualSet {
  std::vector<std::vector<Vec3>> per_codeword;
  /// Same offsets pooled by sample position; diagnostic only.
  std::vector<std::vector<Vec3>> per_timestep;

  std::size_t total() const;
};

ResidualSet compute_residuals(std::span<const Trace> traces, const Codebook& codebook,
                              const QuantizeOptions& options = {});

/// Mean and standard deviation (population, floored) of a set of offsets.
AxisGaussian axis_statistics(std::span<const Vec3> offsets, double sigma_floor = kSigmaFloor);

struct CodewordErrorModel {
  /// Per-axis (μ_ik, σ_ik) over every residual of this codeword.
  AxisGaussian axis;
  /// Mixture over residual magnitudes |sample - codeword|.
  GaussianMixture magnitude;
  /// Per-axis statistics of the residuals falling in each magnitude band;
  /// parallel to magnitude.components.
  std::vector<AxisGaussian> band_axis;
  std::size_t residual_count = 0;
  /// True when this codeword had too few residuals and copies the global fit.
  bool inherited = false;

  friend bool operator==(const CodewordErrorModel&, const CodewordErrorModel&) = default;
};

/// Per-gesture quantization error model feeding the statistical GMM quantizer.
class GmmErrorModel {
 public:
  GmmErrorModel() = default;
  GmmErrorModel(std::vector<CodewordErrorModel> codewords, CodewordErrorModel global);

  const std::vector<CodewordErrorModel>& codewords() const { return codewords_; }
  const CodewordErrorModel& global() const { return global_; }
  std::size_t size() const { return codewords_.size(); }

  /// Per-axis Gaussian to use for codeword i given the sample's offset from it:
  /// the magnitude picks the mixture band, whose per-axis statistics are returned.
  const AxisGaussian& params_for(std::size_t codeword, const Vec3& offset) const;

  friend bool operator==(const GmmErrorModel&, const GmmErrorModel&) = default;

 private:
  std::vector<CodewordErrorModel> codewords_;
  CodewordErrorModel global_;
};

struct ErrorModelConfig {
  MixtureFitConfig mixture{};
  QuantizeOptions quantize{};
};

GmmErrorModel build_error_model(std::span<const Trace> traces, const Codebook& codebook, std::uint64_t seed,
                                const ErrorModelConfig& cfg = {});

/// Same model, built from an already computed residual set.
GmmErrorModel build_error_model(const ResidualSet& residuals, std::uint64_t seed, const ErrorModelConfig& cfg = {});

}  // namespace gesturekit
