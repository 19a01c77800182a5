#pragma once

#include <cmath>
#include <utility>

#include "horizon/manifold.hpp"

namespace horizon {

// Per-step arclength above this is rejected as StepTooLarge: the fixed-step
// scheme's error model assumes short steps relative to curvature scale.
inline constexpr double kMaxStepArclength = 0.1;

struct GeodesicWorkspace {
  Vec k1x, k1w, k2x, k2w, k3x, k3w, k4x, k4w, xa, wa;
  Mat contraction;
  Christoffel gamma;

  void ensure(int d) {
    if (k1x.size() == d) return;
    for (Vec* v : {&k1x, &k1w, &k2x, &k2w, &k3x, &k3w, &k4x, &k4w, &xa, &wa}) v->resize(d);
    contraction.resize(d, d);
    gamma.resize(d);
  }
};

namespace detail {

inline void geodesic_rhs(const ManifoldChart& m, const Vec& x, const Vec& w, Vec& dx, Vec& dw,
                         GeodesicWorkspace& ws) {
  dx = w;
  christoffel_at(m, x, ws.gamma);
  christoffel_contract(ws.gamma, w, ws.contraction);
  dw.noalias() = -(ws.contraction * w);
}

}  // namespace detail

/// Classical fixed-step 4th-order integration of the geodesic equation
/// x'' + Gamma(x')x' = 0 from (x0, v0) to time t. Exposed separately so the
/// catalog closed forms can be cross-checked against it.
inline GeodesicState integrate_geodesic_rk4(const ManifoldChart& m, const Vec& x0, const Vec& v0, double t,
                                            double step, GeodesicWorkspace* shared_ws = nullptr) {
  GeodesicWorkspace local;
  GeodesicWorkspace& ws = shared_ws ? *shared_ws : local;
  ws.ensure(m.dim);

  if (!(step > 0.0)) throw StepTooLargeError("integrator step must be positive");
  GeodesicState st{x0, v0};
  if (t == 0.0) return st;

  const double speed = metric_norm(m, x0, v0);
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / step)));
  const double hs = t / n;
  if (speed * std::abs(hs) > kMaxStepArclength)
    throw StepTooLargeError("per-step arclength exceeds policy; reduce step or velocity");

  Vec& x = st.position;
  Vec& w = st.velocity;
  for (int k = 0; k < n; ++k) {
    detail::geodesic_rhs(m, x, w, ws.k1x, ws.k1w, ws);
    ws.xa = x + (0.5 * hs) * ws.k1x;
    ws.wa = w + (0.5 * hs) * ws.k1w;
    detail::geodesic_rhs(m, ws.xa, ws.wa, ws.k2x, ws.k2w, ws);
    ws.xa = x + (0.5 * hs) * ws.k2x;
    ws.wa = w + (0.5 * hs) * ws.k2w;
    detail::geodesic_rhs(m, ws.xa, ws.wa, ws.k3x, ws.k3w, ws);
    ws.xa = x + hs * ws.k3x;
    ws.wa = w + hs * ws.k3w;
    detail::geodesic_rhs(m, ws.xa, ws.wa, ws.k4x, ws.k4w, ws);
    x += (hs / 6.0) * (ws.k1x + 2.0 * ws.k2x + 2.0 * ws.k3x + ws.k4x);
    w += (hs / 6.0) * (ws.k1w + 2.0 * ws.k2w + 2.0 * ws.k3w + ws.k4w);
    m.domain.wrap(x);
    if (!m.domain.contains(x)) throw DomainExitError("geodesic left the chart on '" + m.name + "'");
  }
  return st;
}

/// gamma(t) and gamma'(t) for the geodesic with gamma(0) = p, gamma'(0) = v.
/// Uses the chart's closed form when present, the integrator otherwise.
inline std::pair<Point, TangentVector> geodesic_with_tangent(const ManifoldChart& m, const Point& p,
                                                             const TangentVector& v, double t,
                                                             const GeodesicConfig& cfg) {
  m.require_in_domain(p.coords);
  const double speed = metric_norm(m, p.coords, v.components);
  if (speed * std::abs(t) > cfg.max_arclength)
    throw StepTooLargeError("requested arclength exceeds max_arclength");

  Vec xe(m.dim), ve(m.dim);
  if (m.has_closed_form()) {
    m.closed_form_geodesic(p.coords, v.components, t, xe, ve);
  } else {
    GeodesicState st = integrate_geodesic_rk4(m, p.coords, v.components, t, cfg.step);
    xe = st.position;
    ve = st.velocity;
  }
  if (!m.domain.contains(xe)) throw DomainExitError("geodesic endpoint outside chart on '" + m.name + "'");
  Point pe{xe};
  return {pe, TangentVector{pe, ve}};
}

/// exp_p(v): geodesic from p with initial velocity v, evaluated at time 1.
inline Point exp_map(const ManifoldChart& m, const Point& p, const TangentVector& v,
                     const GeodesicConfig& cfg) {
  return geodesic_with_tangent(m, p, v, 1.0, cfg).first;
}

}  // namespace horizon
