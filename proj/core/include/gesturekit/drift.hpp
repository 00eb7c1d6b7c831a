#pragma once

#include <span>
#include <vector>

#include "gesturekit/synthetic.hpp"
#include "gesturekit/trace.hpp"

namespace gesturekit {

struct PathPoint {
  double t = 0.0;
  Vec3 position{};  // metres
  Vec3 velocity{};  // m/s
};

/// Dead reckoning: a_inertial = R⁻¹ a_m g + g z, then trapezoidal double
/// integration from rest at the origin. Throws ValidationError when sample
/// spacing deviates from the mean by more than 1%.
std::vector<PathPoint> integrate_path(const Trace& trace, const Orientation& assumed);

/// Trace of a phone lying still at `true_orientation` for `duration` seconds.
Trace still_trace(const Orientation& true_orientation, double duration, double dt);

struct DriftRow {
  double angle = 0.0;  // radians
  double t = 0.0;
  double error = 0.0;  // metres
};

/// Position error over time of a still phone integrated with the orientation
/// off by each angle (a pitch error).
std::vector<DriftRow> drift_curve(std::span<const double> angle_errors, double duration, double dt);

/// ½ g sin(Δθ) t².
double drift_closed_form(double angle, double t);

/// Least-squares slope of log(error) against log(t) over rows with t, error > 0.
double loglog_slope(std::span<const DriftRow> rows);

}  // namespace gesturekit
