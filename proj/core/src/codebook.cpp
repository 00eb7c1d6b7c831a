#include "gesturekit/codebook.hpp"

#include <cmath>
#include <numbers>

#include "gesturekit/error.hpp"

namespace gesturekit {

namespace {

constexpr double kContourTolerance = 1e-9;

Codebook scaled_template(std::size_t n, CodebookShape shape, const Vec3& center, const Vec3& radii) {
  auto codewords = unit_sphere_template(n);
  for (auto& c : codewords) c = hadamard(c, radii) + center;
  return Codebook(std::move(codewords), shape, center, radii);
}

}  // namespace

std::string to_string(CodebookShape shape) { return shape == CodebookShape::kSpherical ? "spherical" : "elliptical"; }

CodebookShape codebook_shape_from_string(const std::string& s) {
  if (s == "spherical") return CodebookShape::kSpherical;
  if (s == "elliptical") return CodebookShape::kElliptical;
  throw ValidationError("unknown codebook shape '" + s + "'");
}

Codebook::Codebook(std::vector<Vec3> codewords, CodebookShape shape, Vec3 center, Vec3 radii)
    : codewords_(std::move(codewords)), shape_(shape), center_(center), radii_(radii) {
  if (codewords_.empty()) throw ValidationError("codebook has no codewords");
  for (double r : radii_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("codebook radii must be positive and finite");
  }
  for (std::size_t i = 0; i < codewords_.size(); ++i) {
    if (std::abs(contour_value(codewords_[i]) - 1.0) > kContourTolerance) {
      throw ValidationError("codeword " + std::to_string(i) + " is off the codebook contour");
    }
  }
}

double Codebook::contour_value(const Vec3& p) const {
  double v = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double u = (p[k] - center_[k]) / radii_[k];
    v += u * u;
  }
  return v;
}

std::size_t Codebook::nearest(const Vec3& p) const {
  std::size_t best = 0;
  double best_d = squared_distance(p, codewords_[0]);
  for (std::size_t i = 1; i < codewords_.size(); ++i) {
    const double d = squared_distance(p, codewords_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<Vec3> unit_sphere_template(std::size_t n) {
  if (n == 0) throw ValidationError("codebook size must be positive");
  if (n == 18) {
    const double h = 1.0 / std::sqrt(2.0);
    return {
        {1, 0, 0},   {-1, 0, 0},  {0, 1, 0},   {0, -1, 0},  {0, 0, 1},   {0, 0, -1},
        {h, h, 0},   {h, -h, 0},  {-h, h, 0},  {-h, -h, 0}, {h, 0, h},   {h, 0, -h},
        {-h, 0, h},  {-h, 0, -h}, {0, h, h},   {0, h, -h},  {0, -h, h},  {0, -h, -h},
    };
  }
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = n == 1 ? 0.0 : 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(i);
    Vec3 v{r * std::cos(phi), r * std::sin(phi), z};
    out.push_back(v * (1.0 / norm(v)));
  }
  return out;
}

Codebook build_spherical_codebook(std::span<const Trace> traces, std::size_t n) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& tr : traces) {
    for (const auto& s : tr.samples()) {
      sum += norm(s.accel);
      ++count;
    }
  }
  if (count == 0) throw ValidationError("cannot build a spherical codebook from an empty dataset");
  const double radius = std::max(sum / static_cast<double>(count), kSigmaFloor);
  return scaled_template(n, CodebookShape::kSpherical, {0.0, 0.0, 0.0}, {radius, radius, radius});
}

Codebook build_spherical_codebook(const Dataset& dataset, std::size_t n) {
  return build_spherical_codebook(std::span<const Trace>(dataset.traces()), n);
}

Codebook build_elliptical_codebook(std::span<const Trace> traces, std::size_t n) {
  Vec3 mean{};
  std::size_t count = 0;
  for (const auto& tr : traces) {
    for (const auto& s : tr.samples()) {
      mean = mean + s.accel;
      ++count;
    }
  }
  if (count < 2) throw ValidationError("elliptical codebook needs at least 2 samples");
  mean = mean * (1.0 / static_cast<double>(count));
  Vec3 var{};
  for (const auto& tr : traces) {
    for (const auto& s : tr.samples()) {
      const Vec3 d = s.accel - mean;
      var = var + hadamard(d, d);
    }
  }
  Vec3 radii{};
  for (int k = 0; k < 3; ++k) radii[k] = std::max(std::sqrt(var[k] / static_cast<double>(count)), kSigmaFloor);
  return scaled_template(n, CodebookShape::kElliptical, mean, radii);
}

}  // namespace gesturekit
