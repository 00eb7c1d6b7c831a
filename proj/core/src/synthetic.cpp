#include "gesturekit/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "gesturekit/error.hpp"
#include "gesturekit/rng.hpp"
#include "rotation.hpp"

namespace gesturekit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kNoGesture = "no-gesture";

// Minimum-jerk profile s(τ) = 10τ³ - 15τ⁴ + 6τ⁵ and its derivatives.
double mj1(double u) { return 30 * u * u - 60 * u * u * u + 30 * u * u * u * u; }
double mj2(double u) { return 60 * u - 180 * u * u + 120 * u * u * u; }

struct Shape {
  std::string name;
  bool circle = false;
  int u = 0, v = 1;              // plane axes for circles
  std::vector<Vec3> waypoints;   // unit-scale polyline otherwise
  double duration = 1.0;
  double scale = 0.3;
};

const std::vector<Shape>& shapes() {
  static const std::vector<Shape> s = {
      {"circle-xy", true, 0, 1, {}, 1.2, 0.3},
      {"circle-xz", true, 0, 2, {}, 1.2, 0.3},
      {"line-x", false, 0, 0, {{0, 0, 0}, {1, 0, 0}, {0, 0, 0}}, 0.8, 0.4},
      {"line-y", false, 0, 0, {{0, 0, 0}, {0, 1, 0}, {0, 0, 0}}, 0.8, 0.4},
      {"M-shape", false, 0, 0, {{0, 0, 0}, {0, 1, 0}, {0.5, 0.4, 0}, {1, 1, 0}, {1, 0, 0}}, 1.6, 0.3},
      {"N-shape", false, 0, 0, {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}}, 1.6, 0.3},
  };
  return s;
}

const Shape* find_shape(const std::string& name) {
  for (const auto& s : shapes()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

Vec3 circle_acceleration(const Shape& s, double radius, double duration, double t) {
  const double u = std::clamp(t / duration, 0.0, 1.0);
  const double th = 2 * kPi * (10 * u * u * u - 15 * u * u * u * u + 6 * u * u * u * u * u);
  const double w = 2 * kPi * mj1(u) / duration;
  const double alpha = 2 * kPi * mj2(u) / (duration * duration);
  Vec3 a{};
  a[s.u] = radius * (-std::sin(th) * alpha - std::cos(th) * w * w);
  a[s.v] = radius * (std::cos(th) * alpha - std::sin(th) * w * w);
  return a;
}

Vec3 polyline_acceleration(const Shape& s, double scale, double duration, double t) {
  // Segment durations proportional to length; min-jerk along each segment.
  std::vector<double> lengths;
  double total = 0.0;
  for (std::size_t i = 1; i < s.waypoints.size(); ++i) {
    lengths.push_back(distance(s.waypoints[i], s.waypoints[i - 1]));
    total += lengths.back();
  }
  double start = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const double seg = duration * lengths[i] / total;
    if (t <= start + seg || i + 1 == lengths.size()) {
      const double u = std::clamp((t - start) / seg, 0.0, 1.0);
      const Vec3 delta = (s.waypoints[i + 1] - s.waypoints[i]) * scale;
      return delta * (mj2(u) / (seg * seg));
    }
    start += seg;
  }
  return {};
}

Orientation operator+(const Orientation& a, const Orientation& b) {
  return {a.yaw + b.yaw, a.pitch + b.pitch, a.roll + b.roll};
}

}  // namespace

std::vector<std::string> template_shapes() {
  std::vector<std::string> out;
  for (const auto& s : shapes()) out.push_back(s.name);
  return out;
}

GestureTemplate make_template(const std::string& shape, Orientation orientation) {
  GestureTemplate t;
  t.id = t.shape = shape;
  t.orientation = orientation;
  if (shape == kNoGesture) {
    t.duration = 1.2;
    t.scale = 0.0;
    return t;
  }
  const Shape* s = find_shape(shape);
  if (!s) throw ValidationError("unknown gesture template '" + shape + "'");
  t.duration = s->duration;
  t.scale = s->scale;
  return t;
}

void validate(const NoiseSpec& noise) {
  for (double s : noise.sigma) {
    if (!(s >= 0.0)) throw ValidationError("noise stddev must be non-negative");
  }
  if (!(noise.orientation_jitter >= 0.0) || !(noise.speed_jitter >= 0.0)) {
    throw ValidationError("jitter stddev must be non-negative");
  }
}

Vec3 path_acceleration(const GestureTemplate& tmpl, double duration, double t) {
  if (tmpl.shape == kNoGesture) return {};
  const Shape* s = find_shape(tmpl.shape);
  if (!s) throw ValidationError("unknown gesture template '" + tmpl.shape + "'");
  // p_r(t) = p(T - t) has p_r''(t) = p''(T - t).
  const double u = tmpl.reversed ? duration - t : t;
  const Vec3 a = s->circle ? circle_acceleration(*s, tmpl.scale / 2.0, duration, u)
                           : polyline_acceleration(*s, tmpl.scale, duration, u);
  return detail::from_eigen(detail::rotation(tmpl.path_rotation) * detail::to_eigen(a));
}

std::size_t default_sample_count(const GestureTemplate& tmpl, double rate_hz) {
  if (!(rate_hz > 0.0)) throw ValidationError("sample rate must be positive");
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(tmpl.duration * rate_hz)) + 1);
}

Trace generate_gesture(const GestureTemplate& tmpl, const NoiseSpec& noise, std::size_t n_samples,
                       Orientation extra) {
  validate(noise);
  if (n_samples < 2) throw ValidationError("a trace needs at least 2 samples");
  if (!(tmpl.duration > 0.0)) throw ValidationError("template duration must be positive");
  if (tmpl.shape != kNoGesture && !find_shape(tmpl.shape)) {
    throw ValidationError("unknown gesture template '" + tmpl.shape + "'");
  }
  Rng rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Orientation o = tmpl.orientation + extra;
  o.yaw += noise.orientation_jitter * unit(rng);
  o.pitch += noise.orientation_jitter * unit(rng);
  o.roll += noise.orientation_jitter * unit(rng);
  // Speed jitter stretches the performance; sample count stays fixed.
  const double duration = tmpl.duration * std::max(0.5, 1.0 + noise.speed_jitter * unit(rng));
  const double dt = duration / static_cast<double>(n_samples - 1);

  // Idle motion: a few slow, small random sinusoids per axis.
  std::array<std::array<double, 3>, 3> wobble{};
  if (tmpl.shape == kNoGesture) {
    std::uniform_real_distribution<double> amp(0.05, 0.3), freq(0.3, 2.0), phase(0.0, 2 * kPi);
    for (auto& axis : wobble) axis = {amp(rng), freq(rng), phase(rng)};
  }

  const Eigen::Matrix3d r = detail::rotation(o);
  const Eigen::Vector3d gz(0.0, 0.0, kStandardGravity);
  std::vector<AccelSample> samples;
  samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = dt * static_cast<double>(k);
    Vec3 a = path_acceleration(tmpl, duration, t);
    if (tmpl.shape == kNoGesture) {
      for (int i = 0; i < 3; ++i) a[i] = wobble[i][0] * std::sin(2 * kPi * wobble[i][1] * t + wobble[i][2]);
    }
    const Eigen::Vector3d m = r * (detail::to_eigen(a) - gz) / kStandardGravity;
    Vec3 out = detail::from_eigen(m);
    for (int i = 0; i < 3; ++i) out[i] += noise.sigma[i] * unit(rng);
    samples.push_back({t, out});
  }
  return Trace(std::move(samples), tmpl.id);
}

std::vector<GestureTemplate> gesture_catalog(std::size_t n) {
  const double q = kPi / 2.0;
  struct Variant {
    const char* id;
    const char* shape;
    Orientation path;
    bool reversed;
  };
  // Hand-picked so that no two entries trace the same acceleration pattern.
  static const Variant variants[] = {
      {"circle-xy", "circle-xy", {}, false},
      {"circle-xz", "circle-xz", {}, false},
      {"line-x", "line-x", {}, false},
      {"line-y", "line-y", {}, false},
      {"M-shape", "M-shape", {}, false},
      {"N-shape", "N-shape", {}, false},
      {"circle-yz", "circle-xy", {0, q, 0}, false},
      {"line-z", "line-x", {0, -q, 0}, false},
      {"M-yz", "M-shape", {0, q, 0}, false},
      {"N-yz", "N-shape", {0, q, 0}, false},
      {"circle-xy-cw", "circle-xy", {}, true},
      {"M-xz", "M-shape", {0, 0, q}, false},
      {"N-xz", "N-shape", {0, 0, q}, false},
      {"line-neg-x", "line-x", {2 * q, 0, 0}, false},
      {"line-neg-y", "line-y", {2 * q, 0, 0}, false},
      {"M-sideways", "M-shape", {q, 0, 0}, false},
      {"N-sideways", "N-shape", {q, 0, 0}, false},
      {"M-reversed", "M-shape", {}, true},
      {"N-reversed", "N-shape", {}, true},
      {"circle-xz-cw", "circle-xz", {}, true},
      {"line-neg-z", "line-x", {0, q, 0}, false},
      {"circle-yz-cw", "circle-xy", {0, q, 0}, true},
      {"M-yz-reversed", "M-shape", {0, q, 0}, true},
      {"N-yz-reversed", "N-shape", {0, q, 0}, true},
  };
  constexpr std::size_t capacity = std::size(variants);
  if (n > capacity) throw ValidationError("gesture catalogue holds only " + std::to_string(capacity) + " gestures");
  std::vector<GestureTemplate> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto t = make_template(variants[i].shape);
    t.id = variants[i].id;
    t.path_rotation = variants[i].path;
    t.reversed = variants[i].reversed;
    out.push_back(std::move(t));
  }
  return out;
}

NoiseSpec anisotropic_noise(std::size_t index, double base_sigma, double orientation_jitter, double speed_jitter) {
  static constexpr std::array<std::array<double, 3>, 6> perms = {{
      {1.0, 0.5, 0.25}, {0.25, 1.0, 0.5}, {0.5, 0.25, 1.0}, {1.0, 0.25, 0.5}, {0.5, 1.0, 0.25}, {0.25, 0.5, 1.0}}};
  const auto& p = perms[index % perms.size()];
  return {{p[0] * base_sigma, p[1] * base_sigma, p[2] * base_sigma}, orientation_jitter, speed_jitter, 0};
}

Dataset generate_dataset(std::span<const GestureTemplate> templates, std::span<const NoiseSpec> noise,
                         const SyntheticSetConfig& cfg) {
  if (templates.size() != noise.size()) throw ValidationError("need one noise spec per template");
  if (cfg.subjects == 0) throw ValidationError("need at least one subject");
  Rng subject_rng(derive_seed(cfg.seed, 0xb1a5));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Orientation> bias(cfg.subjects);
  if (cfg.subjects > 1) {
    for (auto& b : bias) b = {cfg.subject_bias * unit(subject_rng), cfg.subject_bias * unit(subject_rng),
                              cfg.subject_bias * unit(subject_rng)};
  }
  std::vector<Trace> traces;
  for (std::size_t g = 0; g < templates.size(); ++g) {
    const std::size_t n = default_sample_count(templates[g], cfg.rate_hz);
    for (std::size_t r = 0; r < cfg.traces_per_gesture; ++r) {
      NoiseSpec spec = noise[g];
      spec.seed = derive_seed(derive_seed(cfg.seed, g), r);
      const std::size_t subject = r % cfg.subjects;
      const Trace raw = generate_gesture(templates[g], spec, n, bias[subject]);
      traces.emplace_back(raw.samples(), templates[g].id, "s" + std::to_string(subject),
                          templates[g].id + "-" + std::to_string(r));
    }
  }
  return Dataset(std::move(traces), "synthetic seed=" + std::to_string(cfg.seed));
}

std::vector<GestureTemplate> benchmark_templates(const BenchmarkSetSpec& spec) {
  if (!(spec.scale_factor > 0.0)) throw ValidationError("scale factor must be positive");
  auto templates = gesture_catalog(spec.gestures);
  for (auto& t : templates) t.scale *= spec.scale_factor;
  return templates;
}

std::vector<NoiseSpec> benchmark_noise(const BenchmarkSetSpec& spec) {
  std::vector<NoiseSpec> noise;
  for (std::size_t i = 0; i < spec.gestures; ++i) {
    noise.push_back(anisotropic_noise(i, spec.base_sigma, spec.orientation_jitter, spec.speed_jitter));
  }
  return noise;
}

Dataset benchmark_dataset(const BenchmarkSetSpec& spec, std::uint64_t seed) {
  SyntheticSetConfig cfg;
  cfg.traces_per_gesture = spec.traces_per_gesture;
  cfg.subjects = spec.subjects;
  cfg.seed = seed;
  return generate_dataset(benchmark_templates(spec), benchmark_noise(spec), cfg);
}

}  // namespace gesturekit
