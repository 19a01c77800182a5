#pragma once

#include <array>
#include <cmath>

#include "horizon/catalog.hpp"
#include "horizon/frame_bundle.hpp"

namespace horizon {

struct HolonomyResult {
  double angle = 0.0;          // net frame rotation after the loop
  double expected = M_PI / 2;  // enclosed octant area (Gauss-Bonnet)
  double closure_error = 0.0;  // geodesic distance between loop start and end
  double max_drift = 0.0;
};

/// Rotate a tangent vector by `angle` in the oriented g-orthonormal
/// coordinate frame at x.
inline Vec rotate_tangent(const ManifoldChart& m, const Vec& x, const Vec& v, double angle) {
  Mat frame(m.dim, m.dim);
  coordinate_orthonormal_frame(m, x, frame);
  Vec c = frame.partialPivLu().solve(v);
  const double ca = std::cos(angle), sa = std::sin(angle);
  Vec r(2);
  r << ca * c[0] - sa * c[1], sa * c[0] + ca * c[1];
  return frame * r;
}

/// Transport the coordinate frame around a geodesic triangle covering one
/// octant of the sphere (three right angles, sides pi/2). The loop is an
/// octant rotated so every arc stays clear of the coordinate poles: all
/// three vertices sit at z = 1/sqrt(3). Gauss-Bonnet: the frame returns
/// rotated by the enclosed area pi/2.
inline HolonomyResult spherical_octant_holonomy(const ManifoldChart& sphere, const GeodesicConfig& cfg) {
  const double a = 1.0 / std::sqrt(2.0);
  const double b = 1.0 / std::sqrt(6.0);
  const double c = 1.0 / std::sqrt(3.0);
  const std::array<Eigen::Vector3d, 3> verts = {Eigen::Vector3d{a, b, c}, Eigen::Vector3d{-a, b, c},
                                                Eigen::Vector3d{0.0, -2.0 * b, c}};

  double theta0 = 0.0, phi0 = 0.0;
  sphere_r3_to_chart(verts[0], theta0, phi0);
  Vec x(2);
  x << theta0, phi0;

  FramePoint u = make_frame_point(sphere, Point{x});
  const Mat start_frame = u.frame;
  const Vec start_base = x;

  // initial velocity: toward the next vertex (unit speed, side length pi/2)
  double vt = 0.0, vp = 0.0;
  sphere_r3_tangent_to_chart(theta0, phi0, verts[1], vt, vp);
  Vec v(2);
  v << vt, vp;

  FrameTransportIntegrator integ(sphere, cfg);
  Vec vel(2);
  for (int seg = 0; seg < 3; ++seg) {
    integ.advance(u.base.coords, u.frame, v, M_PI / 2.0, vel);
    // corner: turn the velocity (not the frame) by the exterior angle
    v = rotate_tangent(sphere, u.base.coords, vel, M_PI / 2.0);
  }

  HolonomyResult res;
  res.max_drift = integ.max_drift();
  const Mat rot = start_frame.partialPivLu().solve(u.frame);
  res.angle = std::atan2(rot(1, 0), rot(0, 0));
  const Eigen::Vector3d end3 = sphere_chart_to_r3(u.base.coords[0], u.base.coords[1]);
  const Eigen::Vector3d beg3 = sphere_chart_to_r3(start_base[0], start_base[1]);
  res.closure_error = std::acos(std::clamp(end3.dot(beg3), -1.0, 1.0));
  return res;
}

}  // namespace horizon
