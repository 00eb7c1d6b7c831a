#include "gesturekit/drift.hpp"

#include <cmath>

#include "gesturekit/error.hpp"
#include "rotation.hpp"

namespace gesturekit {

std::vector<PathPoint> integrate_path(const Trace& trace, const Orientation& assumed) {
  const auto& s = trace.samples();
  const double mean_dt = trace.duration() / static_cast<double>(s.size() - 1);
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (std::abs((s[k].t - s[k - 1].t) - mean_dt) > 0.01 * mean_dt) {
      throw ValidationError("trace timestamps are not uniform within 1%");
    }
  }
  const Eigen::Matrix3d r_inv = detail::rotation(assumed).transpose();
  const Eigen::Vector3d gz(0.0, 0.0, kStandardGravity);
  auto inertial = [&](const AccelSample& a) -> Eigen::Vector3d {
    return r_inv * detail::to_eigen(a.accel) * kStandardGravity + gz;
  };

  std::vector<PathPoint> out;
  out.reserve(s.size());
  Eigen::Vector3d v = Eigen::Vector3d::Zero(), p = Eigen::Vector3d::Zero();
  Eigen::Vector3d a_prev = inertial(s[0]);
  out.push_back({s[0].t, {}, {}});
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double dt = s[k].t - s[k - 1].t;
    const Eigen::Vector3d a = inertial(s[k]);
    const Eigen::Vector3d v_next = v + 0.5 * (a_prev + a) * dt;
    p += 0.5 * (v + v_next) * dt;
    v = v_next;
    a_prev = a;
    out.push_back({s[k].t, detail::from_eigen(p), detail::from_eigen(v)});
  }
  return out;
}

Trace still_trace(const Orientation& true_orientation, double duration, double dt) {
  if (!(duration > 0.0) || !(dt > 0.0)) throw ValidationError("duration and dt must be positive");
  const auto n = static_cast<std::size_t>(std::lround(duration / dt)) + 1;
  const Eigen::Vector3d m = detail::rotation(true_orientation) * Eigen::Vector3d(0.0, 0.0, -1.0);
  std::vector<AccelSample> samples;
  samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) samples.push_back({dt * static_cast<double>(k), detail::from_eigen(m)});
  return Trace(std::move(samples));
}

std::vector<DriftRow> drift_curve(std::span<const double> angle_errors, double duration, double dt) {
  const Trace still = still_trace({}, duration, dt);
  std::vector<DriftRow> rows;
  for (double angle : angle_errors) {
    for (const auto& pt : integrate_path(still, {0.0, angle, 0.0})) rows.push_back({angle, pt.t, norm(pt.position)});
  }
  return rows;
}

double drift_closed_form(double angle, double t) { return 0.5 * kStandardGravity * std::sin(angle) * t * t; }

double loglog_slope(std::span<const DriftRow> rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.t <= 0.0 || r.error <= 0.0) continue;
    const double x = std::log(r.t), y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw ValidationError("need at least two positive points for a slope");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace gesturekit
