#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "horizon/frame_bundle.hpp"
#include "horizon/manifold.hpp"
#include "horizon/rng.hpp"

namespace horizon {

/// Increment distributions: centered, identity covariance, finite third
/// moment. Sampled in an orthonormal frame, so the pushed-forward tangent
/// law automatically has covariance g^{-1}. `two_point` is a diagnostic law
/// with nonzero third moment (per component: +2 w.p. 1/5, -1/2 w.p. 4/5).
enum class LawKind { gaussian, sphere_uniform, rademacher, two_point };

struct IncrementLaw {
  LawKind kind = LawKind::sphere_uniform;

  static IncrementLaw from_name(const std::string& name) {
    if (name == "gaussian") return {LawKind::gaussian};
    if (name == "sphere_uniform") return {LawKind::sphere_uniform};
    if (name == "rademacher") return {LawKind::rademacher};
    if (name == "two_point") return {LawKind::two_point};
    throw ValidationError("law", "unknown law '" + name + "' (expected gaussian|sphere_uniform|rademacher|two_point)");
  }

  std::string name() const {
    switch (kind) {
      case LawKind::gaussian: return "gaussian";
      case LawKind::sphere_uniform: return "sphere_uniform";
      case LawKind::rademacher: return "rademacher";
      case LawKind::two_point: return "two_point";
    }
    return "?";
  }

  bool rotation_invariant() const { return kind == LawKind::gaussian || kind == LawKind::sphere_uniform; }

  bool bounded_support() const { return kind != LawKind::gaussian; }

  /// Draw xi into a preallocated vector.
  void sample(RngStream& rng, Vec& xi) const {
    const int d = static_cast<int>(xi.size());
    switch (kind) {
      case LawKind::gaussian:
        for (int i = 0; i < d; ++i) xi[i] = rng.gaussian();
        return;
      case LawKind::sphere_uniform: {
        double n2 = 0.0;
        do {
          n2 = 0.0;
          for (int i = 0; i < d; ++i) {
            xi[i] = rng.gaussian();
            n2 += xi[i] * xi[i];
          }
        } while (!(n2 > 1e-280));
        xi *= std::sqrt(static_cast<double>(d) / n2);
        return;
      }
      case LawKind::rademacher: {
        const int idx = rng.uniform_index(d);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        xi.setZero();
        xi[idx] = sign * std::sqrt(static_cast<double>(d));
        return;
      }
      case LawKind::two_point:
        for (int i = 0; i < d; ++i) xi[i] = rng.uniform() < 0.8 ? -0.5 : 2.0;
        return;
    }
  }

  Vec sample(RngStream& rng, int d) const {
    Vec xi(d);
    sample(rng, xi);
    return xi;
  }

  /// Finite-support laws enumerated as (weight, xi) atoms; enables exact
  /// expectations in the generator lab.
  std::optional<std::vector<std::pair<double, Vec>>> atoms(int d) const {
    if (kind == LawKind::rademacher) {
      std::vector<std::pair<double, Vec>> out;
      const double w = 1.0 / (2.0 * d);
      const double r = std::sqrt(static_cast<double>(d));
      for (int i = 0; i < d; ++i)
        for (double sign : {1.0, -1.0}) {
          Vec xi = Vec::Zero(d);
          xi[i] = sign * r;
          out.emplace_back(w, std::move(xi));
        }
      return out;
    }
    if (kind == LawKind::two_point) {
      std::vector<std::pair<double, Vec>> out;
      const int count = 1 << d;
      for (int mask = 0; mask < count; ++mask) {
        double w = 1.0;
        Vec xi(d);
        for (int i = 0; i < d; ++i) {
          if (mask & (1 << i)) {
            xi[i] = 2.0;
            w *= 0.2;
          } else {
            xi[i] = -0.5;
            w *= 0.8;
          }
        }
        out.emplace_back(w, std::move(xi));
      }
      return out;
    }
    return std::nullopt;
  }

  /// E|xi|^3 where it is exact: the two laws with |xi| constant equal to
  /// sqrt(d) give d^{3/2}.
  std::optional<double> exact_third_moment(int d) const {
    if (kind == LawKind::sphere_uniform || kind == LawKind::rademacher)
      return std::pow(static_cast<double>(d), 1.5);
    return std::nullopt;
  }
};

/// One increment v = (frame) xi at the frame point u. By construction
/// E[v] = 0 and Cov(v) = frame frame^T = g^{-1}(pi(u)).
inline TangentVector sample_increment(const IncrementLaw& law, const FramePoint& u, RngStream& rng) {
  Vec xi(u.dim());
  law.sample(rng, xi);
  TangentVector v;
  v.base = u.base;
  v.components = u.frame * xi;
  return v;
}

/// Empirical E[|v|_g^3] over n draws at u. Since the frame is g-orthonormal
/// this equals E[|xi|^3].
inline double third_moment_bound(const IncrementLaw& law, const FramePoint& u, std::size_t n, RngStream& rng) {
  if (n < 1) throw PreconditionError("third_moment_bound requires n >= 1");
  const int d = u.dim();
  Vec xi(d);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    law.sample(rng, xi);
    acc += std::pow(xi.norm(), 3.0);
  }
  return acc / static_cast<double>(n);
}

struct MomentReport {
  std::string manifold;
  std::string law;
  Vec point;
  Vec empirical_mean;
  Mat empirical_covariance;
  Mat covariance_target;  // g^{-1}(p)
  double empirical_third_abs_moment = 0.0;
  std::size_t sample_count = 0;
  Vec mean_tolerance;
  Mat covariance_tolerance;
  bool mean_ok = false;
  bool covariance_ok = false;
  bool third_ok = false;

  bool pass() const { return mean_ok && covariance_ok && third_ok; }
};

/// Empirical moment validation at one point with CLT-scaled tolerances
/// (4 sigma-hat / sqrt(n) per entry). Covariance is compared against the
/// inverse metric.
inline MomentReport validate_law_at(const IncrementLaw& law, const ManifoldChart& m, const Point& p,
                                    std::size_t n, RngStream& rng) {
  if (n < 10000) throw InsufficientSamplesError("validate_law requires n >= 10^4");
  m.require_in_domain(p.coords);
  const int d = m.dim;
  FramePoint u = make_frame_point(m, p);

  Vec xi(d), v(d);
  Vec sum = Vec::Zero(d);
  Vec sum2 = Vec::Zero(d);
  Mat psum = Mat::Zero(d, d);
  Mat psum2 = Mat::Zero(d, d);
  double third = 0.0;
  double third2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    law.sample(rng, xi);
    v.noalias() = u.frame * xi;
    sum += v;
    sum2 += v.cwiseProduct(v);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double prod = v[i] * v[j];
        psum(i, j) += prod;
        psum2(i, j) += prod * prod;
      }
    const double t = std::pow(xi.norm(), 3.0);
    third += t;
    third2 += t * t;
  }

  const double dn = static_cast<double>(n);
  MomentReport rep;
  rep.manifold = m.name;
  rep.law = law.name();
  rep.point = p.coords;
  rep.sample_count = n;
  rep.empirical_mean = sum / dn;
  rep.empirical_covariance = psum / dn;  // known-zero mean: no centering correction
  rep.covariance_target = m.inverse_metric_at(p.coords);
  rep.empirical_third_abs_moment = third / dn;

  rep.mean_tolerance.resize(d);
  for (int i = 0; i < d; ++i) {
    const double var = std::max(0.0, sum2[i] / dn - rep.empirical_mean[i] * rep.empirical_mean[i]);
    rep.mean_tolerance[i] = 4.0 * std::sqrt(var / dn);
  }
  rep.mean_ok = true;
  for (int i = 0; i < d; ++i)
    if (std::abs(rep.empirical_mean[i]) > rep.mean_tolerance[i]) rep.mean_ok = false;

  rep.covariance_tolerance.resize(d, d);
  rep.covariance_ok = true;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double mean_ij = psum(i, j) / dn;
      const double var_ij = std::max(0.0, psum2(i, j) / dn - mean_ij * mean_ij);
      rep.covariance_tolerance(i, j) = 4.0 * std::sqrt(var_ij / dn);
      if (std::abs(mean_ij - rep.covariance_target(i, j)) > rep.covariance_tolerance(i, j))
        rep.covariance_ok = false;
    }

  if (auto exact = law.exact_third_moment(d)) {
    rep.third_ok = std::abs(rep.empirical_third_abs_moment - *exact) < 1e-9;
  } else {
    const double mean3 = third / dn;
    const double var3 = std::max(0.0, third2 / dn - mean3 * mean3);
    rep.third_ok = std::isfinite(mean3) && std::isfinite(var3);
  }
  return rep;
}

inline std::vector<MomentReport> validate_law(const IncrementLaw& law, const ManifoldChart& m,
                                              const std::vector<Point>& points, std::size_t n,
                                              std::uint64_t seed) {
  std::vector<MomentReport> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    RngStream rng = RngStream::for_replica(seed, i);
    out.push_back(validate_law_at(law, m, points[i], n, rng));
  }
  return out;
}

}  // namespace horizon
