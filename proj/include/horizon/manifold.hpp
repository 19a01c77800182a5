#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/linalg.hpp"

namespace horizon {

struct Point {
  Vec coords;

  Point() = default;
  explicit Point(Vec c) : coords(std::move(c)) {}
  Point(double a, double b) : coords(2) { coords << a, b; }

  int dim() const { return static_cast<int>(coords.size()); }
};

struct TangentVector {
  Point base;
  Vec components;

  TangentVector() = default;
  TangentVector(Point p, Vec v) : base(std::move(p)), components(std::move(v)) {}
};

/// Per-coordinate bounds. A wrapping coordinate is periodic with period
/// (hi - lo) and never triggers a domain exit; a non-wrapping coordinate
/// must stay inside [lo, hi].
struct CoordinateBound {
  double lo = -1e9;
  double hi = 1e9;
  bool wraps = false;
};

struct ChartDomain {
  std::vector<CoordinateBound> bounds;
  // Comfortable interior used when sampling random experiment points.
  Vec sample_lo;
  Vec sample_hi;

  bool contains(const Vec& x) const {
    for (int i = 0; i < static_cast<int>(bounds.size()); ++i) {
      const auto& b = bounds[static_cast<std::size_t>(i)];
      if (b.wraps) continue;
      if (!(x[i] >= b.lo && x[i] <= b.hi)) return false;
    }
    return true;
  }

  void wrap(Vec& x) const {
    for (int i = 0; i < static_cast<int>(bounds.size()); ++i) {
      const auto& b = bounds[static_cast<std::size_t>(i)];
      if (!b.wraps) continue;
      const double period = b.hi - b.lo;
      double v = std::fmod(x[i] - b.lo, period);
      if (v < 0.0) v += period;
      x[i] = b.lo + v;
    }
  }
};

struct GeodesicState {
  Vec position;
  Vec velocity;
};

/// Fixed-step 4th-order integration settings. step == 0 selects the default
/// policy min(1e-3, alpha/50) at the call site that knows alpha.
struct GeodesicConfig {
  double step = 1e-3;
  double max_arclength = 10.0;
  std::string method = "rk4";
};

inline double auto_integrator_step(double alpha) { return std::min(1e-3, alpha / 50.0); }

/// Coordinate chart with metric, Christoffel provider and optional closed-form
/// geodesics. Fill-style callbacks write into caller-owned storage so walk
/// loops run allocation-free. Immutable after construction; safe to share.
struct ManifoldChart {
  std::string name;
  int dim = 0;

  std::function<void(const Vec&, Mat&)> metric;
  std::function<void(const Vec&, Mat&)> inverse_metric;                // optional, analytic
  std::function<void(const Vec&, Christoffel&)> christoffel_analytic;  // optional
  // optional: exact geodesic (p, v, t) -> (position, velocity)
  std::function<void(const Vec&, const Vec&, double, Vec&, Vec&)> closed_form_geodesic;
  // optional: analytic orthonormal frame (columns orthonormal w.r.t. g)
  std::function<void(const Vec&, Mat&)> orthonormal_frame_analytic;

  ChartDomain domain;
  double christoffel_fd_step = 1e-5;

  bool has_closed_form() const { return static_cast<bool>(closed_form_geodesic); }

  Mat metric_at(const Vec& x) const {
    Mat g(dim, dim);
    metric(x, g);
    return g;
  }

  Mat inverse_metric_at(const Vec& x) const {
    Mat gi(dim, dim);
    if (inverse_metric) {
      inverse_metric(x, gi);
      return gi;
    }
    Mat g = metric_at(x);
    const double det = g.determinant();
    if (!(std::abs(det) > 1e-14)) throw NumericalDegeneracyError("metric not invertible at evaluation point");
    gi = g.inverse();
    return gi;
  }

  void require_in_domain(const Vec& x) const {
    if (!domain.contains(x)) throw OutOfDomainError("point outside chart domain on manifold '" + name + "'");
  }
};

inline double metric_inner(const ManifoldChart& m, const Vec& x, const Vec& a, const Vec& b) {
  Mat g(m.dim, m.dim);
  m.metric(x, g);
  return a.dot(g * b);
}

inline double metric_norm(const ManifoldChart& m, const Vec& x, const Vec& v) {
  return std::sqrt(std::max(0.0, metric_inner(m, x, v, v)));
}

inline double metric_norm(const ManifoldChart& m, const TangentVector& v) {
  return metric_norm(m, v.base.coords, v.components);
}

/// Gamma^k_{ij} = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij) with central
/// differences on the metric entries. Serves as the independent oracle for
/// the analytic formulas.
inline void christoffel_finite_difference(const ManifoldChart& m, const Vec& x, Christoffel& out,
                                          double fd_step = 0.0) {
  const int d = m.dim;
  const double h = fd_step > 0.0 ? fd_step : m.christoffel_fd_step;
  out.resize(d);

  std::vector<Mat> dg(static_cast<std::size_t>(d));
  Vec xp = x, xm = x;
  Mat gp(d, d), gm(d, d);
  for (int l = 0; l < d; ++l) {
    xp = x;
    xm = x;
    xp[l] += h;
    xm[l] -= h;
    m.metric(xp, gp);
    m.metric(xm, gm);
    dg[static_cast<std::size_t>(l)] = (gp - gm) / (2.0 * h);
  }

  const Mat gi = m.inverse_metric_at(x);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l)
          s += gi(k, l) * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                           dg[static_cast<std::size_t>(l)](i, j));
        out(k, i, j) = 0.5 * s;
      }
}

/// Christoffel symbols at x: analytic when the catalog provides them,
/// finite-difference otherwise. Fill-style, allocation-free.
inline void christoffel_at(const ManifoldChart& m, const Vec& x, Christoffel& out) {
  if (m.christoffel_analytic) {
    m.christoffel_analytic(x, out);
  } else {
    christoffel_finite_difference(m, x, out);
  }
}

inline Christoffel christoffel(const ManifoldChart& m, const Point& p) {
  m.require_in_domain(p.coords);
  Mat g = m.metric_at(p.coords);
  const double det = g.determinant();
  if (!(std::abs(det) > 1e-14)) throw NumericalDegeneracyError("metric not invertible at requested point");
  Christoffel out(m.dim);
  christoffel_at(m, p.coords, out);
  return out;
}

/// Gram-Schmidt of the columns of `frame` in the inner product g. The
/// workspace variant is allocation-free for hot loops.
inline void gram_schmidt_in_metric(const Mat& g, Mat& frame, Vec& workspace) {
  const int d = static_cast<int>(frame.cols());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      workspace.noalias() = g * frame.col(j);
      const double proj = frame.col(i).dot(workspace);
      frame.col(i) -= proj * frame.col(j);
    }
    workspace.noalias() = g * frame.col(i);
    const double n2 = frame.col(i).dot(workspace);
    if (!(n2 > 1e-28)) throw NumericalDegeneracyError("frame column collapsed during Gram-Schmidt");
    frame.col(i) /= std::sqrt(n2);
  }
}

inline void gram_schmidt_in_metric(const Mat& g, Mat& frame) {
  Vec workspace(frame.rows());
  gram_schmidt_in_metric(g, frame, workspace);
}

/// Measurable frame field: Gram-Schmidt of the coordinate basis w.r.t. g(p).
/// Columns u_i satisfy u_i^T g(p) u_j = delta_ij.
inline void coordinate_orthonormal_frame(const ManifoldChart& m, const Vec& x, Mat& frame) {
  if (m.orthonormal_frame_analytic) {
    m.orthonormal_frame_analytic(x, frame);
    return;
  }
  Mat g(m.dim, m.dim);
  m.metric(x, g);
  frame.setIdentity(m.dim, m.dim);
  gram_schmidt_in_metric(g, frame);
}

inline Mat coordinate_orthonormal_frame(const ManifoldChart& m, const Point& p) {
  m.require_in_domain(p.coords);
  Mat frame(m.dim, m.dim);
  coordinate_orthonormal_frame(m, p.coords, frame);
  return frame;
}

}  // namespace horizon
