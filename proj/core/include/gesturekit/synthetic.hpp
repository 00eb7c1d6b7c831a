#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/trace.hpp"

namespace gesturekit {

/// Device orientation as yaw/pitch/roll (radians); R = Rz(yaw) Ry(pitch) Rx(roll).
struct Orientation {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

inline constexpr double kDefaultSampleRateHz = 50.0;

/// Built-in path shapes.
std::vector<std::string> template_shapes();

struct GestureTemplate {
  /// Label written into generated traces.
  std::string id;
  /// One of template_shapes(), or "no-gesture" for low-energy idle motion.
  std::string shape;
  double duration = 1.0;  // seconds
  /// Path scale in metres.
  double scale = 0.3;
  /// Device orientation while performing the gesture.
  Orientation orientation{};
  /// Rotation of the drawn path in the world frame (same yaw/pitch/roll order).
  Orientation path_rotation{};
  /// Traverse the path backwards.
  bool reversed = false;
};

/// Template with the shape's default duration and scale; id = shape.
GestureTemplate make_template(const std::string& shape, Orientation orientation = {});

struct NoiseSpec {
  Vec3 sigma{};                    // per-axis sensor noise, g-units
  double orientation_jitter = 0.0;  // stddev per angle, radians
  double speed_jitter = 0.0;        // stddev of the relative duration change
  std::uint64_t seed = 0;
};

/// Throws ValidationError on negative stddevs.
void validate(const NoiseSpec& noise);

/// Noise-free device-frame path acceleration (m/s^2, gravity excluded) at time
/// t of a template played over `duration` seconds. Throws ValidationError for an
/// unknown shape.
Vec3 path_acceleration(const GestureTemplate& tmpl, double duration, double t);

/// Samples at `rate` Hz over the template's duration (at least 2).
std::size_t default_sample_count(const GestureTemplate& tmpl, double rate_hz = kDefaultSampleRateHz);

/// Measured acceleration a_m = R (a_path - g z) / g with R from the template
/// orientation plus `extra` and the jitter, plus per-axis Gaussian noise.
/// Deterministic under noise.seed.
Trace generate_gesture(const GestureTemplate& tmpl, const NoiseSpec& noise, std::size_t n_samples,
                       Orientation extra = {});

/// The first n entries of a fixed catalogue of 24 distinct gestures: the six
/// base shapes, then rotated, reversed and mirrored variants of them. All are
/// performed with the device held flat.
std::vector<GestureTemplate> gesture_catalog(std::size_t n);

/// Gesture-specific anisotropic noise: a per-index permutation of
/// (1, 1/2, 1/4) * base_sigma, with the given jitter.
NoiseSpec anisotropic_noise(std::size_t index, double base_sigma, double orientation_jitter = 0.05,
                            double speed_jitter = 0.05);

struct SyntheticSetConfig {
  std::size_t traces_per_gesture = 20;
  double rate_hz = kDefaultSampleRateHz;
  /// Traces are spread round-robin over this many subjects, each holding the
  /// device with its own fixed orientation bias.
  std::size_t subjects = 1;
  double subject_bias = 0.1;  // stddev per angle, radians
  std::uint64_t seed = 0;
};

/// noise[i] applies to templates[i]; its seed is replaced by one derived from
/// cfg.seed, the gesture index and the repetition.
Dataset generate_dataset(std::span<const GestureTemplate> templates, std::span<const NoiseSpec> noise,
                         const SyntheticSetConfig& cfg);

/// A reproducible multi-gesture set: the first n catalogue gestures at a
/// reduced path scale (small wrist motions, so gravity dominates the signal),
/// each with its own anisotropic sensor noise.
struct BenchmarkSetSpec {
  std::size_t gestures = 10;
  std::size_t traces_per_gesture = 20;
  double scale_factor = 0.3;
  double base_sigma = 0.03;
  double orientation_jitter = 0.01;
  double speed_jitter = 0.05;
  std::size_t subjects = 1;
};

std::vector<GestureTemplate> benchmark_templates(const BenchmarkSetSpec& spec);
std::vector<NoiseSpec> benchmark_noise(const BenchmarkSetSpec& spec);
Dataset benchmark_dataset(const BenchmarkSetSpec& spec, std::uint64_t seed);

}  // namespace gesturekit
