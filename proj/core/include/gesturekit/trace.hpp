#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gesturekit/vec3.hpp"

namespace gesturekit {

/// Standard gravity, m/s^2. Traces are stored in multiples of this.
inline constexpr double kStandardGravity = 9.80665;

/// Samples whose components exceed this magnitude (in g) are treated as corrupt.
inline constexpr double kMaxAccelG = 16.0;

struct AccelSample {
  double t = 0.0;  // seconds
  Vec3 accel{};    // g-units

  Vec3 xyz() const { return accel; }
};

/// An ordered, validated sequence of accelerometer samples. Immutable once built.
class Trace {
 public:
  Trace() = default;
  /// Throws ValidationError if fewer than 2 samples, non-increasing timestamps,
  /// non-finite or out-of-range components.
  explicit Trace(std::vector<AccelSample> samples, std::optional<std::string> label = std::nullopt,
                 std::optional<std::string> subject = std::nullopt, std::string id = {});

  const std::vector<AccelSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const AccelSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::optional<std::string>& label() const { return label_; }
  const std::optional<std::string>& subject() const { return subject_; }
  const std::string& id() const { return id_; }

  std::vector<Vec3> points() const;
  double duration() const { return samples_.back().t - samples_.front().t; }

  Trace with_label(std::string label) const;

 private:
  std::vector<AccelSample> samples_;
  std::optional<std::string> label_;
  std::optional<std::string> subject_;
  std::string id_;
};

/// Labeled traces grouped by gesture. Labels are kept in first-seen order.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Trace> traces, std::string provenance = {});

  const std::vector<Trace>& traces() const { return traces_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return traces_.size(); }
  bool empty() const { return traces_.empty(); }
  std::size_t sample_count() const;

  /// Traces with the given label, in dataset order.
  std::vector<Trace> traces_for(const std::string& label) const;
  std::map<std::string, std::size_t> counts() const;

  /// Every trace labeled and every label backed by at least two traces.
  /// Throws ValidationError naming the first offending label.
  void require_trainable() const;

 private:
  std::vector<Trace> traces_;
  std::vector<std::string> labels_;
  std::string provenance_;
};

enum class AccelUnits { kG, kMetersPerSecond2 };

/// CSV header every trace file must start with.
inline constexpr const char* kTraceCsvHeader = "trace_id,label,subject,t,ax,ay,az";

/// Parses the trace CSV schema. Throws ParseError (with line number) on malformed
/// rows and ValidationError (naming the trace) on invariant violations.
Dataset read_traces(std::istream& in, AccelUnits units = AccelUnits::kG, std::string provenance = {});
Dataset load_traces(const std::filesystem::path& path, AccelUnits units = AccelUnits::kG);

void write_traces(std::ostream& out, const std::vector<Trace>& traces);
void save_traces(const std::filesystem::path& path, const std::vector<Trace>& traces);

}  // namespace gesturekit
