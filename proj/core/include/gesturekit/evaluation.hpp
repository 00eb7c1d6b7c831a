#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gesturekit/classifier.hpp"
#include "gesturekit/synthetic.hpp"
#include "gesturekit/training.hpp"

namespace gesturekit {

struct EvalConfig {
  double split_ratio = 0.75;
  std::size_t repetitions = 10;
  std::vector<double> thr_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<QuantizerKind> kinds{QuantizerKind::kDeterministicSpherical, QuantizerKind::kDeterministicElliptical,
                                   QuantizerKind::kStatisticalGmm, QuantizerKind::kStatisticalRandom};
  double thr = 0.5;
  /// Use thr = 1/N (N = gestures in the model set) instead of thr.
  bool thr_one_over_n = false;
  HypothesisConfig hypothesis{};
  TrainingConfig training{};
  std::uint64_t seed = 0;
};

/// Throws ValidationError unless 0 < split_ratio < 1 and repetitions >= 1.
void validate(const EvalConfig& cfg);

/// Stratified split: per gesture, round(ratio * n) traces (clamped to [1, n-1])
/// go to training. Deterministic under seed.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double ratio, std::uint64_t seed);

struct GestureMetrics {
  std::string label;
  std::size_t tp = 0, fp = 0, fn = 0;
  std::size_t support = 0;
  double precision = 1.0;
  double recall = 0.0;
  /// False when tp + fp == 0; precision is then reported as 1.
  bool precision_defined = false;
};

struct TimingStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double mean_samples = 0.0;
  std::size_t classifications = 0;
};

struct RunMetrics {
  QuantizerKind kind{};
  std::size_t repetition = 0;
  double thr = 0.5;
  std::vector<GestureMetrics> gestures;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  /// Fraction of test traces assigned their true label.
  double recognition = 0.0;
  double abstention = 0.0;
  TimingStats timing;
};

/// Confusion bookkeeping. A truth label outside `labels` marks a negative
/// trace (dead start): any decision on it is a false positive. nullopt = abstention.
RunMetrics compute_metrics(std::span<const std::string> labels, std::span<const std::string> truth,
                           std::span<const std::optional<std::string>> predicted);

TimingStats timing_stats(std::span<const double> elapsed_ms, std::span<const std::size_t> samples);

/// Classifies every test trace (seed per trace derived from `seed` and its index).
RunMetrics evaluate(std::span<const GestureModel> models, const Dataset& test, QuantizerKind kind,
                    const ClassifierConfig& base, std::uint64_t seed);

struct ThresholdPoint {
  double thr = 0.0;
  RunMetrics metrics;
};

/// Records one full sample stream per test trace, then replays it at every
/// threshold so the curves come from the same samples.
std::vector<ThresholdPoint> sweep_threshold(std::span<const GestureModel> models, const Dataset& test,
                                            std::span<const double> thr_grid, const ClassifierConfig& base,
                                            std::uint64_t seed);

struct KindSummary {
  QuantizerKind kind{};
  double mean_recognition = 0.0;
  double stddev_recognition = 0.0;
  double mean_macro_precision = 0.0;
  double mean_macro_recall = 0.0;
  double mean_ms = 0.0;
};

struct MetricsReport {
  std::vector<RunMetrics> runs;
  std::vector<KindSummary> summary;
};

std::vector<KindSummary> summarize(std::span<const RunMetrics> runs);

/// 75/25 (by default) split repeated cfg.repetitions times; every kind is
/// evaluated on the same split of each repetition.
MetricsReport run_protocol(const Dataset& dataset, const EvalConfig& cfg);

struct CountRow {
  std::size_t count = 0;
  QuantizerKind kind{};
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_repetition;
};

/// For each count, draws that many gestures per repetition and runs the protocol.
std::vector<CountRow> gesture_count_sensitivity(const Dataset& dataset, std::span<const std::size_t> counts,
                                                const EvalConfig& cfg);

struct UserCountRow {
  std::size_t subjects = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Deterministic elliptical accuracy as the synthetic data is spread over more
/// subjects (each with its own orientation bias).
std::vector<UserCountRow> user_count_sensitivity(std::span<const GestureTemplate> templates,
                                                 std::span<const NoiseSpec> noise,
                                                 std::span<const std::size_t> subject_counts,
                                                 const SyntheticSetConfig& base, const EvalConfig& cfg);

/// Wall-clock per classification for one kind on identical inputs.
TimingStats time_classification(std::span<const GestureModel> models, const Dataset& test, QuantizerKind kind,
                                const ClassifierConfig& base, std::uint64_t seed);

/// Fraction of negative traces on which the classifier named any gesture.
double dead_start_false_positive_rate(std::span<const GestureModel> models, std::span<const Trace> negatives,
                                      const ClassifierConfig& cfg, std::uint64_t seed);

double mean(std::span<const double> v);
/// Sample standard deviation (0 for fewer than two values).
double stddev(std::span<const double> v);

/// Wall-clock fields are left out unless include_timing, so reports are
/// reproducible byte for byte.
std::string report_to_json(const MetricsReport& report, bool include_timing = false);
/// One row per gesture x kind x repetition.
std::string report_to_csv(const MetricsReport& report);
std::string sweep_to_csv(std::span<const ThresholdPoint> sweep, QuantizerKind kind);

}  // namespace gesturekit
