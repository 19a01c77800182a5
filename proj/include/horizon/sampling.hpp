#pragma once

#include <cmath>

#include "horizon/catalog.hpp"
#include "horizon/frame_bundle.hpp"
#include "horizon/manifold.hpp"
#include "horizon/rng.hpp"

namespace horizon {

/// Uniform point in the chart's experiment box (the comfortable interior the
/// experiments are configured to stay in).
inline Point random_experiment_point(const ManifoldChart& m, RngStream& rng) {
  Vec x(m.dim);
  for (int i = 0; i < m.dim; ++i) {
    const double lo = m.domain.sample_lo[i];
    const double hi = m.domain.sample_hi[i];
    x[i] = lo + (hi - lo) * rng.uniform();
  }
  return Point{x};
}

/// Random orthonormal frame at p: the coordinate frame composed with a
/// random rotation (and a reflection half the time, covering both
/// orientations of the fiber).
inline FramePoint random_frame_at(const ManifoldChart& m, const Point& p, RngStream& rng) {
  FramePoint u = make_frame_point(m, p);
  const double psi = kTwoPi * rng.uniform();
  Mat rot(2, 2);
  rot << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
  if (rng.uniform() < 0.5) rot.col(1) *= -1.0;
  u.frame = u.frame * rot;
  return u;
}

}  // namespace horizon
