#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "horizon/manifold.hpp"

namespace horizon {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Sphere chart helpers (theta, phi) <-> R^3, shared by the closed-form
// geodesic, the holonomy loop and the test oracles.
// ---------------------------------------------------------------------------

inline Eigen::Vector3d sphere_chart_to_r3(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

/// Coordinate tangent (v_theta, v_phi) at (theta, phi) as an R^3 vector.
inline Eigen::Vector3d sphere_tangent_to_r3(double theta, double phi, double v_theta, double v_phi) {
  const Eigen::Vector3d e_theta{std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
                                -std::sin(theta)};
  const Eigen::Vector3d e_phi{-std::sin(theta) * std::sin(phi), std::sin(theta) * std::cos(phi), 0.0};
  return v_theta * e_theta + v_phi * e_phi;
}

inline void sphere_r3_to_chart(const Eigen::Vector3d& p, double& theta, double& phi) {
  theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
  phi = std::atan2(p.y(), p.x());
  if (phi < 0.0) phi += kTwoPi;
}

/// R^3 tangent at the chart point back to coordinate components.
inline void sphere_r3_tangent_to_chart(double theta, double phi, const Eigen::Vector3d& v, double& v_theta,
                                       double& v_phi) {
  const Eigen::Vector3d e_theta{std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
                                -std::sin(theta)};
  const Eigen::Vector3d e_phi{-std::sin(theta) * std::sin(phi), std::sin(theta) * std::cos(phi), 0.0};
  v_theta = v.dot(e_theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  v_phi = v.dot(e_phi) / s2;
}

// ---------------------------------------------------------------------------
// Catalog charts
// ---------------------------------------------------------------------------

inline ManifoldChart make_euclidean() {
  ManifoldChart m;
  m.name = "euclidean";
  m.dim = 2;
  m.metric = [](const Vec&, Mat& g) { g.setIdentity(2, 2); };
  m.inverse_metric = [](const Vec&, Mat& gi) { gi.setIdentity(2, 2); };
  m.christoffel_analytic = [](const Vec&, Christoffel& c) {
    c.resize(2);
    c.set_zero();
  };
  m.orthonormal_frame_analytic = [](const Vec&, Mat& f) { f.setIdentity(2, 2); };
  m.closed_form_geodesic = [](const Vec& x, const Vec& v, double t, Vec& xe, Vec& ve) {
    xe = x + t * v;
    ve = v;
  };
  m.domain.bounds = {{-1e9, 1e9, false}, {-1e9, 1e9, false}};
  m.domain.sample_lo = Vec(2);
  m.domain.sample_hi = Vec(2);
  m.domain.sample_lo << -3.0, -3.0;
  m.domain.sample_hi << 3.0, 3.0;
  return m;
}

inline ManifoldChart make_flat_torus() {
  ManifoldChart m = make_euclidean();
  m.name = "torus";
  m.domain.bounds = {{0.0, kTwoPi, true}, {0.0, kTwoPi, true}};
  m.domain.sample_lo << 0.1, 0.1;
  m.domain.sample_hi << kTwoPi - 0.1, kTwoPi - 0.1;
  ChartDomain dom = m.domain;
  m.closed_form_geodesic = [dom](const Vec& x, const Vec& v, double t, Vec& xe, Vec& ve) {
    xe = x + t * v;
    dom.wrap(xe);
    ve = v;
  };
  return m;
}

/// Unit sphere in coordinates (theta, phi), g = diag(1, sin^2 theta), with a
/// pole-exclusion band theta in [band, pi - band]. phi wraps mod 2*pi.
inline ManifoldChart make_sphere(double pole_band = 1e-3) {
  ManifoldChart m;
  m.name = "sphere";
  m.dim = 2;
  m.metric = [](const Vec& x, Mat& g) {
    const double s = std::sin(x[0]);
    g.resize(2, 2);
    g << 1.0, 0.0, 0.0, s * s;
  };
  m.inverse_metric = [](const Vec& x, Mat& gi) {
    const double s = std::sin(x[0]);
    gi.resize(2, 2);
    gi << 1.0, 0.0, 0.0, 1.0 / (s * s);
  };
  m.christoffel_analytic = [](const Vec& x, Christoffel& c) {
    const double s = std::sin(x[0]);
    const double co = std::cos(x[0]);
    c.resize(2);
    c.set_zero();
    c(0, 1, 1) = -s * co;          // Gamma^theta_{phi phi}
    c(1, 0, 1) = co / s;           // Gamma^phi_{theta phi}
    c(1, 1, 0) = co / s;
  };
  m.orthonormal_frame_analytic = [](const Vec& x, Mat& f) {
    f.resize(2, 2);
    f << 1.0, 0.0, 0.0, 1.0 / std::sin(x[0]);
  };
  const double band = pole_band;
  m.closed_form_geodesic = [band](const Vec& x, const Vec& v, double t, Vec& xe, Vec& ve) {
    const Eigen::Vector3d p3 = sphere_chart_to_r3(x[0], x[1]);
    const Eigen::Vector3d v3 = sphere_tangent_to_r3(x[0], x[1], v[0], v[1]);
    const double speed = v3.norm();
    if (speed * std::abs(t) < 1e-300) {
      xe = x;
      ve = v;
      return;
    }
    const double phase = speed * t;
    // z along the great circle is R*cos(angle - angle0); reject arcs that
    // enter the pole band, not just endpoints.
    const double z_amp = std::hypot(p3.z(), v3.z() / speed);
    const double z_max_allowed = std::cos(band);
    if (z_amp > z_max_allowed) {
      const double angle0 = std::atan2(v3.z() / speed, p3.z());
      const double lo = std::min(0.0, phase);
      const double hi = std::max(0.0, phase);
      for (double a = angle0 - kTwoPi; a <= hi + M_PI; a += M_PI) {
        if (a >= lo && a <= hi) throw DomainExitError("sphere geodesic crosses the pole band");
      }
    }
    const Eigen::Vector3d pe = std::cos(phase) * p3 + std::sin(phase) * (v3 / speed);
    const Eigen::Vector3d vel = -speed * std::sin(phase) * p3 + std::cos(phase) * v3;
    double theta = 0.0, phi = 0.0;
    sphere_r3_to_chart(pe, theta, phi);
    if (!(theta >= band && theta <= M_PI - band))
      throw DomainExitError("sphere geodesic endpoint inside the pole band");
    xe.resize(2);
    ve.resize(2);
    xe << theta, phi;
    sphere_r3_tangent_to_chart(theta, phi, vel, ve[0], ve[1]);
  };
  m.domain.bounds = {{pole_band, M_PI - pole_band, false}, {0.0, kTwoPi, true}};
  m.domain.sample_lo = Vec(2);
  m.domain.sample_hi = Vec(2);
  m.domain.sample_lo << 0.2, 0.0;
  m.domain.sample_hi << M_PI - 0.2, kTwoPi;
  return m;
}

/// Hyperbolic half-plane, coordinates (x, y), y > 0, g = diag(1/y^2, 1/y^2).
inline ManifoldChart make_hyperbolic_half_plane() {
  ManifoldChart m;
  m.name = "hyperbolic";
  m.dim = 2;
  m.metric = [](const Vec& x, Mat& g) {
    const double iy2 = 1.0 / (x[1] * x[1]);
    g.resize(2, 2);
    g << iy2, 0.0, 0.0, iy2;
  };
  m.inverse_metric = [](const Vec& x, Mat& gi) {
    const double y2 = x[1] * x[1];
    gi.resize(2, 2);
    gi << y2, 0.0, 0.0, y2;
  };
  m.christoffel_analytic = [](const Vec& x, Christoffel& c) {
    const double iy = 1.0 / x[1];
    c.resize(2);
    c.set_zero();
    c(0, 0, 1) = -iy;  // Gamma^x_{xy}
    c(0, 1, 0) = -iy;
    c(1, 0, 0) = iy;   // Gamma^y_{xx}
    c(1, 1, 1) = -iy;  // Gamma^y_{yy}
  };
  m.orthonormal_frame_analytic = [](const Vec& x, Mat& f) {
    f.resize(2, 2);
    f << x[1], 0.0, 0.0, x[1];
  };
  m.closed_form_geodesic = [](const Vec& p, const Vec& v, double t, Vec& xe, Vec& ve) {
    const double x0 = p[0], y0 = p[1];
    const double vx = v[0], vy = v[1];
    const double enorm = std::hypot(vx, vy);
    const double speed = enorm / y0;
    xe.resize(2);
    ve.resize(2);
    if (speed * std::abs(t) < 1e-300) {
      xe = p;
      ve = v;
      return;
    }
    if (std::abs(vx) <= 1e-12 * enorm) {
      // vertical geodesic: y(t) = y0 * exp(sigma * s * t)
      const double sigma = vy >= 0.0 ? 1.0 : -1.0;
      const double y = y0 * std::exp(sigma * speed * t);
      xe << x0, y;
      ve << 0.0, sigma * speed * y;
      return;
    }
    // semicircle centered at (c, 0); unit-speed parameter satisfies
    // tan(psi/2) = tan(psi0/2) * exp(s*t) along increasing psi
    const double c = x0 + y0 * vy / vx;
    const double r = std::hypot(x0 - c, y0);
    const double psi0 = std::atan2(y0, x0 - c);
    const double along = -y0 * vx + (x0 - c) * vy;  // tangent-of-increasing-psi dot v
    const double sigma = along >= 0.0 ? 1.0 : -1.0;
    const double growth = std::exp(sigma * speed * t);
    const double psi = 2.0 * std::atan2(std::sin(0.5 * psi0) * growth, std::cos(0.5 * psi0));
    const double sp = std::sin(psi), cp = std::cos(psi);
    xe << c + r * cp, r * sp;
    ve << sigma * speed * sp * (-r * sp), sigma * speed * sp * (r * cp);
  };
  m.domain.bounds = {{-1e9, 1e9, false}, {1e-12, 1e12, false}};
  m.domain.sample_lo = Vec(2);
  m.domain.sample_hi = Vec(2);
  m.domain.sample_lo << -3.0, 0.5;
  m.domain.sample_hi << 3.0, 4.0;
  return m;
}

inline std::vector<std::string> catalog_names() { return {"euclidean", "torus", "sphere", "hyperbolic"}; }

inline ManifoldChart chart_by_name(const std::string& name, double sphere_pole_band = 1e-3) {
  if (name == "euclidean") return make_euclidean();
  if (name == "torus") return make_flat_torus();
  if (name == "sphere") return make_sphere(sphere_pole_band);
  if (name == "hyperbolic") return make_hyperbolic_half_plane();
  throw ValidationError("manifold", "unknown manifold '" + name + "' (expected euclidean|torus|sphere|hyperbolic)");
}

inline Point default_initial_point(const ManifoldChart& m) {
  if (m.name == "euclidean") return Point{0.0, 0.0};
  if (m.name == "torus") return Point{M_PI, M_PI};
  if (m.name == "sphere") return Point{M_PI / 2.0, 0.0};
  if (m.name == "hyperbolic") return Point{0.0, 1.0};
  Vec x = 0.5 * (m.domain.sample_lo + m.domain.sample_hi);
  return Point{x};
}

/// Fixed interior points used by moment validation and CLI defaults.
inline std::vector<Point> catalog_sample_points(const ManifoldChart& m) {
  if (m.name == "euclidean") return {Point{0.0, 0.0}, Point{1.0, -0.5}};
  if (m.name == "torus") return {Point{M_PI, M_PI}, Point{0.5, 2.0}};
  if (m.name == "sphere") return {Point{M_PI / 2.0, 0.0}, Point{M_PI / 3.0, 1.0}};
  if (m.name == "hyperbolic") return {Point{0.0, 1.0}, Point{0.5, 2.0}};
  return {default_initial_point(m)};
}

}  // namespace horizon
