#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/error_model.hpp"
#include "gesturekit/hmm.hpp"
#include "gesturekit/model.hpp"
#include "gesturekit/quantizer.hpp"

namespace gesturekit {

struct TrainingConfig {
  /// Selects the codebook: deterministic_spherical trains on one shared
  /// spherical codebook, every other kind on per-gesture elliptical ones.
  QuantizerKind quantizer = QuantizerKind::kStatisticalGmm;
  std::size_t codebook_size = kDefaultCodebookSize;
  std::size_t n_states = 8;
  Topology topology = Topology::left_to_right(3);
  std::size_t max_iters = 100;
  double tol = 1e-6;
  double emission_smoothing = 1e-6;
  ErrorModelConfig error{};
  std::uint64_t seed = 0;
};

struct GestureTrainingReport {
  std::string label;
  std::size_t traces = 0;
  TrainReport hmm;
  /// How many samples quantized onto each codeword.
  std::vector<std::size_t> codeword_usage;
  std::size_t inherited_codewords = 0;
};

struct TrainedModels {
  std::vector<GestureModel> models;
  std::vector<GestureTrainingReport> reports;
};

/// Trains one gesture against a fixed codebook: deterministic quantization,
/// Baum-Welch, then the residual error model. Prior is left at 1.
GestureModel train_gesture(const std::string& label, std::span<const Trace> traces,
                           std::shared_ptr<const Codebook> codebook, const TrainingConfig& cfg, std::uint64_t seed,
                           GestureTrainingReport* report = nullptr);

/// Per gesture: codebook, quantization, Baum-Welch, error model. Priors uniform.
/// Deterministic under cfg.seed. Throws ValidationError on an untrainable set.
TrainedModels train_all(const Dataset& train, const TrainingConfig& cfg);

std::string training_report_json(const TrainedModels& trained);

}  // namespace gesturekit
