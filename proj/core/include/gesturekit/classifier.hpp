#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/model.hpp"
#include "gesturekit/quantizer.hpp"
#include "gesturekit/uncertain.hpp"

namespace gesturekit {

struct ClassifierConfig {
  QuantizerKind quantizer = QuantizerKind::kStatisticalGmm;
  /// Conditional threshold each gesture's "attains the maximal posterior" event
  /// must clear. Overrides hypothesis.prob.
  double thr = 0.5;
  HypothesisConfig hypothesis{};
  /// Overrides the models' priors when set (must sum to 1).
  std::optional<std::vector<double>> priors;
  QuantizeOptions quantize{};
};

/// Throws ValidationError on thr outside (0,1), bad hypothesis settings, or
/// priors that don't match the model set.
void validate(const ClassifierConfig& cfg, std::size_t n_models);

struct GestureEstimate {
  std::string label;
  /// Fraction of drawn samples in which this gesture had the maximal posterior.
  double probability = 0.0;
  /// Mean of P(G|X) over the drawn samples.
  double mean_posterior = 0.0;
  /// Samples consumed by this gesture's hypothesis test.
  std::size_t samples = 0;
  bool passed = false;
};

struct ClassificationResult {
  /// Index into the model set, or nullopt on abstention.
  std::optional<std::size_t> decision;
  std::optional<std::string> label;
  std::vector<GestureEstimate> gestures;
  std::size_t samples_used = 0;
  double elapsed_ms = 0.0;
  /// Some sample had every likelihood at -inf (posterior fell back to uniform).
  bool degenerate = false;
};

struct PosteriorResult {
  std::vector<double> posterior;
  /// True when all likelihoods were -inf and the uniform fallback was used.
  bool degenerate = false;
};

/// Bayes over the gesture set, in log space:
///   P(G_k|X) = P(G_k) P(X|G_k) / Σ_j P(G_j) P(X|G_j).
PosteriorResult posterior_from_log_likelihoods(std::span<const double> log_likelihoods, std::span<const double> priors);

/// Posterior of every gesture given each gesture's own observation sequence.
PosteriorResult gesture_posteriors(std::span<const GestureModel> models, std::span<const SymbolSequence> observations,
                                   std::span<const double> priors);

/// P(G_k|X) for one gesture.
double posterior(std::span<const GestureModel> models, std::size_t k, std::span<const SymbolSequence> observations);

/// Quantizes once per gesture codebook and returns the argmax posterior. Always decides.
ClassificationResult classify_deterministic(const Trace& trace, std::span<const GestureModel> models,
                                            const ClassifierConfig& cfg = {});

/// Sampling classifier. Each draw quantizes the trace once per gesture with
/// that gesture's codebook and statistical quantizer; the event for gesture i
/// is "i attains the maximal posterior". Gestures whose sequential test passes
/// at cfg.thr are candidates; the winner is the candidate whose test clears the
/// highest threshold on the full recorded stream.
ClassificationResult classify_statistical(const Trace& trace, std::span<const GestureModel> models,
                                          const ClassifierConfig& cfg, std::uint64_t seed);

/// Dispatches on cfg.quantizer.
ClassificationResult classify(const Trace& trace, std::span<const GestureModel> models, const ClassifierConfig& cfg,
                              std::uint64_t seed);

/// Full-length sample stream for one trace, recorded for threshold replay.
struct SampleRecord {
  /// Winning gesture per draw (max_samples draws).
  std::vector<std::uint32_t> winners;
  std::vector<double> posterior_sums;
  bool degenerate = false;
};

SampleRecord record_samples(const Trace& trace, std::span<const GestureModel> models, const ClassifierConfig& cfg,
                            std::uint64_t seed);

/// Decision classify_statistical would make at thr given the same stream.
ClassificationResult replay(const SampleRecord& record, std::span<const GestureModel> models, double thr,
                            const HypothesisConfig& hypothesis);

/// Compact JSON: {"decision": label | null, "gestures": [...], "samples_used",
/// "elapsed_ms", "degenerate"}.
std::string classification_to_json(const ClassificationResult& result);

}  // namespace gesturekit
