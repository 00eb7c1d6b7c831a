#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/trace.hpp"
#include "gesturekit/vec3.hpp"

namespace gesturekit {

inline constexpr std::size_t kDefaultCodebookSize = 18;
/// Lower bound on per-axis spread (g). Applies to codebook radii and error-model sigmas.
inline constexpr double kSigmaFloor = 1e-3;
/// Distances below this (g) count as coincident with a codeword.
inline constexpr double kDistanceFloor = 1e-9;

enum class CodebookShape { kSpherical, kElliptical };

std::string to_string(CodebookShape shape);
CodebookShape codebook_shape_from_string(const std::string& s);

/// Codewords on the contour sum(((c - center) / radii)^2) = 1.
class Codebook {
 public:
  Codebook() = default;
  /// Validates radii > 0 and contour membership of every codeword.
  Codebook(std::vector<Vec3> codewords, CodebookShape shape, Vec3 center, Vec3 radii);

  const std::vector<Vec3>& codewords() const { return codewords_; }
  std::size_t size() const { return codewords_.size(); }
  const Vec3& operator[](std::size_t i) const { return codewords_[i]; }
  CodebookShape shape() const { return shape_; }
  const Vec3& center() const { return center_; }
  const Vec3& radii() const { return radii_; }

  /// Normalized contour value sum(((p - center) / radii)^2); 1 on the contour.
  double contour_value(const Vec3& p) const;

  /// Index of the nearest codeword by Euclidean distance, lowest index on ties.
  std::size_t nearest(const Vec3& p) const;

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  std::vector<Vec3> codewords_;
  CodebookShape shape_ = CodebookShape::kElliptical;
  Vec3 center_{};
  Vec3 radii_{1.0, 1.0, 1.0};
};

/// Unit-sphere directions used to place codewords. For n = 18: the six axis
/// directions followed by the twelve normalized edge midpoints of the cube.
/// Other sizes fall back to a Fibonacci lattice.
std::vector<Vec3> unit_sphere_template(std::size_t n = kDefaultCodebookSize);

/// One sphere shared by every gesture: centered at the origin with radius equal
/// to the mean sample norm.
Codebook build_spherical_codebook(const Dataset& dataset, std::size_t n = kDefaultCodebookSize);
Codebook build_spherical_codebook(std::span<const Trace> traces, std::size_t n = kDefaultCodebookSize);

/// Per-gesture ellipsoid: center = per-axis mean, radii = per-axis (population)
/// standard deviation floored at kSigmaFloor.
Codebook build_elliptical_codebook(std::span<const Trace> traces, std::size_t n = kDefaultCodebookSize);

}  // namespace gesturekit
