#pragma once

#include <cmath>
#include <utility>

#include "horizon/geodesic.hpp"
#include "horizon/manifold.hpp"

namespace horizon {

/// A point of the orthonormal frame bundle: base coordinates plus the frame
/// coefficient matrix. Column i holds the chart components of the i-th frame
/// vector, so frame^T g(base) frame = I.
struct FramePoint {
  Point base;
  Mat frame;

  int dim() const { return base.dim(); }
};

struct FrameTangent {
  FramePoint at;
  Vec base_components;   // dx part
  Mat frame_components;  // d(frame) part
};

/// O(d)-invariant inner product on antisymmetric matrices:
/// <A, B> = fiber_scale * 1/2 * trace(A^T B).
struct SasakiMokConfig {
  double fiber_scale = 1.0;
};

inline double fiber_inner(const SasakiMokConfig& cfg, const Mat& a, const Mat& b) {
  return cfg.fiber_scale * 0.5 * (a.transpose() * b).trace();
}

inline double orthonormality_residual(const ManifoldChart& m, const Vec& x, const Mat& frame) {
  Mat g(m.dim, m.dim);
  m.metric(x, g);
  Mat gram = frame.transpose() * g * frame;
  gram -= Mat::Identity(m.dim, m.dim);
  return max_abs(gram);
}

inline double orthonormality_residual(const ManifoldChart& m, const FramePoint& u) {
  return orthonormality_residual(m, u.base.coords, u.frame);
}

/// Build a frame point at p. With no frame given, uses the coordinate
/// Gram-Schmidt frame; an explicit frame is re-projected onto the
/// g-orthonormal set.
inline FramePoint make_frame_point(const ManifoldChart& m, const Point& p, const Mat* frame = nullptr) {
  m.require_in_domain(p.coords);
  FramePoint u;
  u.base = p;
  if (frame) {
    u.frame = *frame;
    Mat g(m.dim, m.dim);
    m.metric(p.coords, g);
    gram_schmidt_in_metric(g, u.frame);
  } else {
    u.frame = coordinate_orthonormal_frame(m, p);
  }
  if (!(std::abs(u.frame.determinant()) > 1e-14)) throw SingularFrameError("frame matrix is singular");
  return u;
}

namespace detail {

inline void require_invertible_frame(const FramePoint& u) {
  if (!(std::abs(u.frame.determinant()) > 1e-14)) throw SingularFrameError("frame matrix is singular");
}

}  // namespace detail

/// Canonical horizontal vector field number i at u: the horizontal lift of
/// the i-th frame vector. Base part is frame column i; the frame part is the
/// transport derivative -Gamma-contraction against that column.
inline FrameTangent horizontal_vector_field(const ManifoldChart& m, const FramePoint& u, int i) {
  Christoffel gamma(m.dim);
  christoffel_at(m, u.base.coords, gamma);
  FrameTangent xi;
  xi.at = u;
  xi.base_components = u.frame.col(i);
  Mat b = christoffel_contract(gamma, xi.base_components);
  xi.frame_components = -(b * u.frame);
  return xi;
}

/// Pure vertical tangent at u generated by the rotation e_j ^ e_k; its
/// connection-form value is the elementary antisymmetric matrix
/// E_{jk} - E_{kj}.
inline FrameTangent vertical_vector_field(const FramePoint& u, int j, int k) {
  const int d = u.dim();
  Mat gen = Mat::Zero(d, d);
  gen(j, k) = 1.0;
  gen(k, j) = -1.0;
  FrameTangent xi;
  xi.at = u;
  xi.base_components = Vec::Zero(d);
  xi.frame_components = u.frame * gen;
  return xi;
}

/// Horizontal lift of a tangent vector v at pi(u): the unique horizontal
/// tangent at u projecting to v. Linear in v.
inline FrameTangent lift_tangent(const ManifoldChart& m, const FramePoint& u, const TangentVector& v) {
  detail::require_invertible_frame(u);
  Christoffel gamma(m.dim);
  christoffel_at(m, u.base.coords, gamma);
  FrameTangent xi;
  xi.at = u;
  xi.base_components = v.components;
  Mat b = christoffel_contract(gamma, v.components);
  xi.frame_components = -(b * u.frame);
  return xi;
}

/// Connection form omega_u(xi): antisymmetric for tangents of the bundle.
/// Vanishes exactly on horizontal tangents.
inline Mat connection_form(const ManifoldChart& m, const FramePoint& u, const FrameTangent& xi) {
  detail::require_invertible_frame(u);
  Christoffel gamma(m.dim);
  christoffel_at(m, u.base.coords, gamma);
  Mat b = christoffel_contract(gamma, xi.base_components);
  Mat raw = b * u.frame + xi.frame_components;
  return u.frame.partialPivLu().solve(raw);
}

/// Canonical one-form theta_u(xi): the frame coordinates of dpi(xi).
inline Vec canonical_form(const ManifoldChart& /*m*/, const FramePoint& u, const FrameTangent& xi) {
  detail::require_invertible_frame(u);
  return u.frame.partialPivLu().solve(xi.base_components);
}

/// Norm under the Sasaki-Mok metric: |dpi(xi)|_g combined with the fiber
/// inner product of the connection-form value.
inline double sasaki_mok_norm(const ManifoldChart& m, const FramePoint& u, const FrameTangent& xi,
                              const SasakiMokConfig& cfg = {}) {
  const double base2 = metric_inner(m, u.base.coords, xi.base_components, xi.base_components);
  const Mat omega = connection_form(m, u, xi);
  return std::sqrt(std::max(0.0, base2 + fiber_inner(cfg, omega, omega)));
}

// ---------------------------------------------------------------------------
// Horizontal lift of geodesics (frame transport)
// ---------------------------------------------------------------------------

struct FrameOdeOptions {
  // Re-project the frame onto the g-orthonormal set after every integrator
  // step (pre-projection deviation is kept as a health metric). Disable to
  // measure raw drift.
  bool reproject = true;
  double drift_threshold = 1e-6;
};

struct LiftResult {
  FramePoint end;
  Vec end_velocity;
  // Largest pre-projection orthonormality residual seen at any step.
  double max_drift = 0.0;
};

/// Reusable transport integrator; all buffers preallocated so walk loops can
/// advance frames allocation-free.
class FrameTransportIntegrator {
 public:
  FrameTransportIntegrator(const ManifoldChart& m, GeodesicConfig geo, FrameOdeOptions opts = {})
      : m_(m), geo_(std::move(geo)), opts_(opts) {
    const int d = m.dim;
    g_.resize(d, d);
    b_start_.resize(d, d);
    b_mid_.resize(d, d);
    b_end_.resize(d, d);
    k1_.resize(d, d);
    k2_.resize(d, d);
    k3_.resize(d, d);
    k4_.resize(d, d);
    etmp_.resize(d, d);
    gf_.resize(d, d);
    gram_.resize(d, d);
    gamma_.resize(d);
    xs_.resize(d);
    ws_.resize(d);
    xm_.resize(d);
    wm_.resize(d);
    xe_.resize(d);
    we_.resize(d);
    gcol_.resize(d);
    rk_.ensure(d);
  }

  const ManifoldChart& chart() const { return m_; }
  double max_drift() const { return max_drift_; }
  void reset_drift() { max_drift_ = 0.0; }

  /// Advance (x, frame) along the geodesic with initial velocity v for time
  /// t; on return x and frame are updated and vel_out holds the transported
  /// velocity (the end tangent of the geodesic).
  void advance(Vec& x, Mat& frame, const Vec& v, double t, Vec& vel_out) {
    const double speed = metric_norm(m_, x, v);
    if (speed * std::abs(t) > geo_.max_arclength)
      throw StepTooLargeError("requested arclength exceeds max_arclength");
    if (speed * std::abs(t) < 1e-300) {
      vel_out = v;
      return;
    }
    if (!(geo_.step > 0.0)) throw StepTooLargeError("integrator step must be positive");
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / geo_.step)));
    const double hs = t / n;
    if (speed * std::abs(hs) > kMaxStepArclength)
      throw StepTooLargeError("per-step arclength exceeds policy; reduce step or velocity");

    if (m_.has_closed_form())
      advance_closed_form_base(x, frame, v, t, n, vel_out);
    else
      advance_coupled(x, frame, v, n, hs, vel_out);
  }

 private:
  // B(y, w) = Gamma(y) contracted against w; frame ODE is E' = -B E.
  void fill_contraction(const Vec& y, const Vec& w, Mat& out) {
    christoffel_at(m_, y, gamma_);
    christoffel_contract(gamma_, w, out);
  }

  void post_step(const Vec& x_now, Mat& frame) {
    m_.metric(x_now, g_);
    gf_.noalias() = g_ * frame;
    gram_.noalias() = frame.transpose() * gf_;
    gram_.diagonal().array() -= 1.0;
    const double drift = max_abs(gram_);
    max_drift_ = std::max(max_drift_, drift);
    if (opts_.reproject) {
      if (drift > opts_.drift_threshold)
        throw OrthonormalityDriftError("frame drift exceeded threshold; integrator step too large");
      gram_schmidt(frame);
    }
  }

  void gram_schmidt(Mat& frame) {
    const int d = m_.dim;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < i; ++j) {
        gcol_.noalias() = g_ * frame.col(j);
        const double proj = frame.col(i).dot(gcol_);
        frame.col(i) -= proj * frame.col(j);
      }
      gcol_.noalias() = g_ * frame.col(i);
      const double n2 = frame.col(i).dot(gcol_);
      if (!(n2 > 1e-28)) throw NumericalDegeneracyError("frame column collapsed during re-projection");
      frame.col(i) /= std::sqrt(n2);
    }
  }

  // Base point from the chart's exact geodesic; only the linear frame ODE is
  // integrated, sampling the curve at the RK stage times. Keeps the base
  // trajectory bit-identical to the base walk's exp-map steps.
  void advance_closed_form_base(Vec& x, Mat& frame, const Vec& v, double t, int n, Vec& vel_out) {
    const Vec x0 = x;
    const Vec v0 = v;
    m_.closed_form_geodesic(x0, v0, 0.0, xs_, ws_);
    fill_contraction(xs_, ws_, b_start_);
    const double inv_n = 1.0 / n;
    const double hs = t * inv_n;
    for (int k = 0; k < n; ++k) {
      const double s_mid = t * ((k + 0.5) * inv_n);
      const double s_end = (k + 1 == n) ? t : t * ((k + 1.0) * inv_n);
      m_.closed_form_geodesic(x0, v0, s_mid, xm_, wm_);
      m_.closed_form_geodesic(x0, v0, s_end, xe_, we_);
      fill_contraction(xm_, wm_, b_mid_);
      fill_contraction(xe_, we_, b_end_);

      k1_.noalias() = -(b_start_ * frame);
      etmp_ = frame + (0.5 * hs) * k1_;
      k2_.noalias() = -(b_mid_ * etmp_);
      etmp_ = frame + (0.5 * hs) * k2_;
      k3_.noalias() = -(b_mid_ * etmp_);
      etmp_ = frame + hs * k3_;
      k4_.noalias() = -(b_end_ * etmp_);
      frame += (hs / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);

      post_step(xe_, frame);
      b_start_ = b_end_;
    }
    x = xe_;
    vel_out = we_;
  }

  // Fully coupled system (x, w, E); used when the chart has no closed form
  // and as a cross-check mode in tests.
  void advance_coupled(Vec& x, Mat& frame, const Vec& v, int n, double hs, Vec& vel_out) {
    Vec w = v;
    GeodesicWorkspace& rk = rk_;
    for (int k = 0; k < n; ++k) {
      fill_contraction(x, w, b_start_);
      rk.k1x = w;
      rk.k1w.noalias() = -(b_start_ * w);
      k1_.noalias() = -(b_start_ * frame);

      rk.xa = x + (0.5 * hs) * rk.k1x;
      rk.wa = w + (0.5 * hs) * rk.k1w;
      etmp_ = frame + (0.5 * hs) * k1_;
      fill_contraction(rk.xa, rk.wa, b_mid_);
      rk.k2x = rk.wa;
      rk.k2w.noalias() = -(b_mid_ * rk.wa);
      k2_.noalias() = -(b_mid_ * etmp_);

      rk.xa = x + (0.5 * hs) * rk.k2x;
      rk.wa = w + (0.5 * hs) * rk.k2w;
      etmp_ = frame + (0.5 * hs) * k2_;
      fill_contraction(rk.xa, rk.wa, b_mid_);
      rk.k3x = rk.wa;
      rk.k3w.noalias() = -(b_mid_ * rk.wa);
      k3_.noalias() = -(b_mid_ * etmp_);

      rk.xa = x + hs * rk.k3x;
      rk.wa = w + hs * rk.k3w;
      etmp_ = frame + hs * k3_;
      fill_contraction(rk.xa, rk.wa, b_end_);
      rk.k4x = rk.wa;
      rk.k4w.noalias() = -(b_end_ * rk.wa);
      k4_.noalias() = -(b_end_ * etmp_);

      x += (hs / 6.0) * (rk.k1x + 2.0 * rk.k2x + 2.0 * rk.k3x + rk.k4x);
      w += (hs / 6.0) * (rk.k1w + 2.0 * rk.k2w + 2.0 * rk.k3w + rk.k4w);
      frame += (hs / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
      m_.domain.wrap(x);
      if (!m_.domain.contains(x)) throw DomainExitError("lifted geodesic left the chart on '" + m_.name + "'");
      post_step(x, frame);
    }
    vel_out = w;
  }

  const ManifoldChart& m_;
  GeodesicConfig geo_;
  FrameOdeOptions opts_;
  double max_drift_ = 0.0;

  Mat g_, b_start_, b_mid_, b_end_, k1_, k2_, k3_, k4_, etmp_, gf_, gram_;
  Christoffel gamma_;
  Vec xs_, ws_, xm_, wm_, xe_, we_, gcol_;
  GeodesicWorkspace rk_;
};

/// Horizontal lift of the geodesic from (pi(u0), v) for time t, starting at
/// u0. The base point follows the geodesic; the frame solves the transport
/// ODE and stays g-orthonormal (re-projected per step unless disabled).
inline LiftResult horizontal_lift_path(const ManifoldChart& m, const FramePoint& u0, const TangentVector& v,
                                       double t, const GeodesicConfig& cfg, const FrameOdeOptions& opts = {}) {
  m.require_in_domain(u0.base.coords);
  FrameTransportIntegrator integ(m, cfg, opts);
  LiftResult res;
  Vec x = u0.base.coords;
  Mat frame = u0.frame;
  res.end_velocity.resize(m.dim);
  integ.advance(x, frame, v.components, t, res.end_velocity);
  res.end = FramePoint{Point{x}, frame};
  res.max_drift = integ.max_drift();
  return res;
}

/// Parallel transport of w along the geodesic (p, v, t), recovered from the
/// frame-bundle lift: express w in the start frame, read it off in the end
/// frame. Preserves g-inner products.
inline TangentVector parallel_transport(const ManifoldChart& m, const Point& p, const TangentVector& v,
                                        double t, const TangentVector& w, const GeodesicConfig& cfg) {
  FramePoint u0 = make_frame_point(m, p);
  const Vec coeffs = u0.frame.partialPivLu().solve(w.components);
  LiftResult lift = horizontal_lift_path(m, u0, v, t, cfg);
  TangentVector out;
  out.base = lift.end.base;
  out.components = lift.end.frame * coeffs;
  return out;
}

}  // namespace horizon
