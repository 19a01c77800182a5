#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "horizon/catalog.hpp"
#include "horizon/frame_bundle.hpp"
#include "horizon/increments.hpp"
#include "horizon/quadrature.hpp"
#include "horizon/rng.hpp"
#include "horizon/test_functions.hpp"

namespace horizon {

struct GeneratorValue {
  double value = 0.0;
  double stderr_ = 0.0;          // zero for exact sums / quadrature
  double excluded_fraction = 0;  // domain-exit weight among the evaluations
  bool exclusion_warning = false;
};

/// How expectations over the increment law are evaluated. `deterministic`
/// uses exact atom sums for finite-support laws, the periodic trapezoid rule
/// for sphere_uniform (d = 2) and tensor Gauss-Hermite for gaussian.
enum class GeneratorEvalMode { deterministic, monte_carlo };

struct GeneratorEvalOptions {
  GeneratorEvalMode mode = GeneratorEvalMode::deterministic;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0;
  int circle_nodes = 256;
  int hermite_nodes = 32;
  GeodesicConfig geo{0.0, 10.0, "rk4"};  // step 0 -> min(1e-3, alpha/50)
};

namespace detail {

template <typename EvalFn>
inline GeneratorValue weighted_generator_mean(const std::vector<std::pair<double, Vec>>& nodes, double f_at_u,
                                              double alpha, EvalFn&& eval) {
  double acc = 0.0;
  double included = 0.0;
  double excluded = 0.0;
  for (const auto& [w, xi] : nodes) {
    try {
      acc += w * eval(xi);
      included += w;
    } catch (const DomainExitError&) {
      excluded += w;
    }
  }
  if (!(included > 0.0)) throw DomainExitError("all generator evaluations left the chart");
  GeneratorValue out;
  out.value = (acc / included - f_at_u) / (alpha * alpha);
  out.excluded_fraction = excluded / (included + excluded);
  out.exclusion_warning = out.excluded_fraction > 1e-3;
  return out;
}

inline std::vector<std::pair<double, Vec>> law_quadrature_nodes(const IncrementLaw& law, int d,
                                                                const GeneratorEvalOptions& opts) {
  if (auto a = law.atoms(d)) return *a;
  std::vector<std::pair<double, Vec>> nodes;
  if (law.kind == LawKind::sphere_uniform && d == 2) {
    const int n = opts.circle_nodes;
    const double r = std::sqrt(2.0);
    nodes.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double psi = kTwoPi * k / n;
      Vec xi(2);
      xi << r * std::cos(psi), r * std::sin(psi);
      nodes.emplace_back(1.0 / n, std::move(xi));
    }
    return nodes;
  }
  if (law.kind == LawKind::gaussian && d <= 3) {
    const Quadrature q = gauss_hermite(opts.hermite_nodes);
    const double inv = 1.0 / std::sqrt(M_PI);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      double w = 1.0;
      Vec xi(d);
      for (int i = 0; i < d; ++i) {
        w *= inv * q.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        xi[i] = std::sqrt(2.0) * q.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      }
      nodes.emplace_back(w, std::move(xi));
      int pos = 0;
      while (pos < d) {
        if (++idx[static_cast<std::size_t>(pos)] < static_cast<int>(q.nodes.size())) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == d) break;
    }
    return nodes;
  }
  throw UnsupportedFunctionError("no deterministic quadrature for law '" + law.name() + "' at this dimension");
}

}  // namespace detail

/// Rescaled generator on the frame bundle:
/// alpha^{-2} (E[f(flow_alpha(u, lift(v)))] - f(u)), v drawn from the law in
/// the frame u. Exact (stderr 0) for finite-support laws and quadrature
/// laws; Monte Carlo with CLT error bars otherwise.
inline GeneratorValue apply_rescaled_generator(const ManifoldChart& m, const BundleField& f,
                                               const FramePoint& u, double alpha, const IncrementLaw& law,
                                               const GeneratorEvalOptions& opts = {}) {
  GeodesicConfig geo = opts.geo;
  if (!(geo.step > 0.0)) geo.step = auto_integrator_step(alpha);
  FrameTransportIntegrator integ(m, geo);
  const double f_u = f(u);
  Vec v(m.dim), vel(m.dim);
  Vec x(m.dim);
  Mat frame(m.dim, m.dim);
  FramePoint scratch;
  auto eval = [&](const Vec& xi) {
    x = u.base.coords;
    frame = u.frame;
    v.noalias() = u.frame * xi;
    integ.advance(x, frame, v, alpha, vel);
    scratch.base.coords = x;
    scratch.frame = frame;
    return f(scratch);
  };

  if (opts.mode == GeneratorEvalMode::deterministic) {
    const auto nodes = detail::law_quadrature_nodes(law, m.dim, opts);
    return detail::weighted_generator_mean(nodes, f_u, alpha, eval);
  }

  if (opts.mc_samples < 1000) throw InsufficientSamplesError("monte carlo generator evaluation needs n >= 10^3");
  RngStream rng(splitmix64(opts.seed ^ 0x6A09E667F3BCC908ULL));
  double acc = 0.0, acc2 = 0.0;
  std::size_t included = 0, excluded = 0;
  Vec xi(m.dim);
  for (std::size_t k = 0; k < opts.mc_samples; ++k) {
    law.sample(rng, xi);
    try {
      const double val = eval(xi);
      acc += val;
      acc2 += val * val;
      ++included;
    } catch (const DomainExitError&) {
      ++excluded;
    }
  }
  if (included == 0) throw DomainExitError("all generator samples left the chart");
  const double n = static_cast<double>(included);
  const double mean = acc / n;
  const double var = std::max(0.0, acc2 / n - mean * mean);
  GeneratorValue out;
  out.value = (mean - f_u) / (alpha * alpha);
  out.stderr_ = std::sqrt(var / n) / (alpha * alpha);
  out.excluded_fraction = static_cast<double>(excluded) / static_cast<double>(included + excluded);
  out.exclusion_warning = out.excluded_fraction > 1e-3;
  return out;
}

/// Same operator on the base manifold (identity submersion): increments are
/// pushed through the coordinate orthonormal frame at p.
inline GeneratorValue apply_rescaled_generator_base(const ManifoldChart& m, const ScalarField& f,
                                                    const Point& p, double alpha, const IncrementLaw& law,
                                                    const GeneratorEvalOptions& opts = {}) {
  FramePoint u = make_frame_point(m, p);
  BundleField lifted = lift_through_projection(f);
  return apply_rescaled_generator(m, lifted, u, alpha, law, opts);
}

// ---------------------------------------------------------------------------
// Laplacians by finite differences
// ---------------------------------------------------------------------------

namespace detail {

inline double laplace_beltrami_once(const ManifoldChart& m, const ScalarField& f, const Vec& x, double h) {
  const int d = m.dim;
  // F_i(y) = sqrt|g| g^{ij} d_j f at y
  auto flux = [&](int i, const Vec& y) {
    const Mat gi = m.inverse_metric_at(y);
    const Mat g = m.metric_at(y);
    const double sg = std::sqrt(g.determinant());
    double acc = 0.0;
    Vec yp = y, ym = y;
    for (int j = 0; j < d; ++j) {
      yp = y;
      ym = y;
      yp[j] += h;
      ym[j] -= h;
      acc += gi(i, j) * (f(yp) - f(ym)) / (2.0 * h);
    }
    return sg * acc;
  };
  const double sg0 = std::sqrt(m.metric_at(x).determinant());
  double acc = 0.0;
  Vec xp = x, xm = x;
  for (int i = 0; i < d; ++i) {
    xp = x;
    xm = x;
    xp[i] += h;
    xm[i] -= h;
    acc += (flux(i, xp) - flux(i, xm)) / (2.0 * h);
  }
  return acc / sg0;
}

}  // namespace detail

/// Laplace-Beltrami by central differences on the divergence form
/// |g|^{-1/2} d_i (|g|^{1/2} g^{ij} d_j f). Richardson extrapolation
/// (step halving) is available for tighter truncation error.
inline double laplace_beltrami(const ManifoldChart& m, const ScalarField& f, const Point& p,
                               double fd_step = 1e-3, bool richardson = false) {
  const int d = m.dim;
  for (int i = 0; i < d; ++i) {
    const auto& b = m.domain.bounds[static_cast<std::size_t>(i)];
    if (b.wraps) continue;
    if (p.coords[i] - 2.0 * fd_step < b.lo || p.coords[i] + 2.0 * fd_step > b.hi)
      throw OutOfDomainError("point too close to the chart boundary for the requested stencil");
  }
  const double coarse = detail::laplace_beltrami_once(m, f, p.coords, fd_step);
  if (!richardson) return coarse;
  const double fine = detail::laplace_beltrami_once(m, f, p.coords, fd_step / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

namespace detail {

inline double horizontal_laplacian_once(const ManifoldChart& m, const BundleField& f, const FramePoint& u,
                                        double delta, const GeodesicConfig& geo) {
  GeodesicConfig local = geo;
  local.step = std::min(local.step > 0.0 ? local.step : 1e-3, delta / 8.0);
  const double f_u = f(u);
  double acc = 0.0;
  TangentVector dir;
  dir.base = u.base;
  for (int i = 0; i < m.dim; ++i) {
    dir.components = u.frame.col(i);
    const LiftResult fwd = horizontal_lift_path(m, u, dir, delta, local);
    const LiftResult bwd = horizontal_lift_path(m, u, dir, -delta, local);
    acc += (f(fwd.end) - 2.0 * f_u + f(bwd.end)) / (delta * delta);
  }
  return acc;
}

}  // namespace detail

/// Horizontal Laplacian as the sum of second differences of f along the
/// horizontal geodesics through u (one per frame direction). Valid because
/// horizontal lifts of geodesics are geodesics of the lifted flow.
inline double horizontal_laplacian(const ManifoldChart& m, const BundleField& f, const FramePoint& u,
                                   double fd_step = 1e-3, const GeodesicConfig& geo = {1e-3, 10.0, "rk4"},
                                   bool richardson = false) {
  const double coarse = detail::horizontal_laplacian_once(m, f, u, fd_step, geo);
  if (!richardson) return coarse;
  const double fine = detail::horizontal_laplacian_once(m, f, u, fd_step / 2.0, geo);
  return (4.0 * fine - coarse) / 3.0;
}

// ---------------------------------------------------------------------------
// Operator identity and convergence-rate reports
// ---------------------------------------------------------------------------

struct IdentityRow {
  std::string function;
  std::size_t frame_index = 0;
  double lifted_laplacian = 0.0;  // horizontal Laplacian of f@pi at the frame
  double base_laplacian = 0.0;    // Laplace-Beltrami of f at the base point
  double abs_diff = 0.0;
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  double worst_abs_diff = 0.0;
  double worst_frame_spread = 0.0;  // max spread of the lifted value across frames over one base point
  double tolerance = 0.0;
  bool pass = false;
};

/// Checks the projection identity: the horizontal Laplacian of f-bar
/// composed with the projection equals the Laplace-Beltrami of f-bar at the
/// base point, frame-independently.
inline IdentityReport check_identity(const ManifoldChart& m, const ScalarField& f,
                                     const std::vector<FramePoint>& frames, double tol,
                                     double fd_step = 1e-3, const GeodesicConfig& geo = {1e-3, 10.0, "rk4"}) {
  IdentityReport rep;
  rep.tolerance = tol;
  const BundleField lifted = lift_through_projection(f);

  // group frames over bit-identical base points to measure frame spread
  std::map<std::pair<double, double>, std::pair<double, double>> spread;  // base -> (min, max)
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const FramePoint& u = frames[k];
    IdentityRow row;
    row.function = f.name;
    row.frame_index = k;
    row.lifted_laplacian = horizontal_laplacian(m, lifted, u, fd_step, geo);
    row.base_laplacian = f.laplacian ? f.laplacian(u.base.coords)
                                     : laplace_beltrami(m, f, u.base, fd_step);
    row.abs_diff = std::abs(row.lifted_laplacian - row.base_laplacian);
    rep.worst_abs_diff = std::max(rep.worst_abs_diff, row.abs_diff);

    const std::pair<double, double> key{u.base.coords[0], u.base.coords[1]};
    auto it = spread.find(key);
    if (it == spread.end()) {
      spread[key] = {row.lifted_laplacian, row.lifted_laplacian};
    } else {
      it->second.first = std::min(it->second.first, row.lifted_laplacian);
      it->second.second = std::max(it->second.second, row.lifted_laplacian);
    }
    rep.rows.push_back(std::move(row));
  }
  for (const auto& [key, mm] : spread) rep.worst_frame_spread = std::max(rep.worst_frame_spread, mm.second - mm.first);
  rep.pass = rep.worst_abs_diff <= tol && rep.worst_frame_spread <= tol;
  return rep;
}

struct GeneratorRow {
  double alpha = 0.0;
  double generator_value = 0.0;
  double error = 0.0;  // |L_alpha f - 1/2 Delta_H f|
  double stderr_ = 0.0;
};

struct GeneratorReport {
  std::vector<GeneratorRow> rows;
  double half_horizontal_laplacian = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = std::numeric_limits<double>::quiet_NaN();
  double slope_ci95 = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  bool already_converged = false;
  std::string message;
};

namespace detail {

inline double student_t_975(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  if (dof < 1) return 12.706;
  if (dof <= 10) return table[dof - 1];
  return 1.96;
}

}  // namespace detail

// Errors below this are treated as numerical floor ("already converged").
inline constexpr double kGeneratorErrorFloor = 1e-8;

/// e(alpha) = |L_alpha f(u) - 1/2 Delta_H f(u)| over an alpha sweep with a
/// fitted log-log slope. The remainder bound predicts slope >= 1 in general
/// and ~2 for symmetric laws; quadratic-flat cases report "already
/// converged" instead of a meaningless fit.
inline GeneratorReport convergence_slope(const ManifoldChart& m, const BundleField& f, const FramePoint& u,
                                         const std::vector<double>& alphas, const IncrementLaw& law,
                                         const GeneratorEvalOptions& opts = {}, double fd_step = 1e-3,
                                         bool richardson = true) {
  if (alphas.size() < 4) throw PreconditionError("convergence_slope needs at least 4 alpha values");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw PreconditionError("alpha values must be positive");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) throw PreconditionError("alpha values must be strictly decreasing");
  }

  GeneratorReport rep;
  GeodesicConfig geo = opts.geo;
  if (!(geo.step > 0.0)) geo.step = 1e-3;
  rep.half_horizontal_laplacian = 0.5 * horizontal_laplacian(m, f, u, fd_step, geo, richardson);

  for (double alpha : alphas) {
    GeneratorEvalOptions local = opts;
    local.geo.step = 0.0;  // resolve per alpha
    const GeneratorValue g = apply_rescaled_generator(m, f, u, alpha, law, local);
    GeneratorRow row;
    row.alpha = alpha;
    row.generator_value = g.value;
    row.error = std::abs(g.value - rep.half_horizontal_laplacian);
    row.stderr_ = g.stderr_;
    rep.rows.push_back(row);
  }

  bool all_floor = true;
  for (const auto& r : rep.rows)
    if (r.error > kGeneratorErrorFloor) all_floor = false;
  if (all_floor) {
    rep.already_converged = true;
    rep.message = "already converged: errors at numerical floor for all alpha";
    return rep;
  }

  // least squares on log(e) vs log(alpha)
  std::vector<double> lx, ly;
  for (const auto& r : rep.rows)
    if (r.error > 0.0) {
      lx.push_back(std::log(r.alpha));
      ly.push_back(std::log(r.error));
    }
  const int n = static_cast<int>(lx.size());
  if (n < 3) {
    rep.message = "too few usable error values for a fit";
    return rep;
  }
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += lx[static_cast<std::size_t>(i)];
    sy += ly[static_cast<std::size_t>(i)];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[static_cast<std::size_t>(i)] - mx) * (lx[static_cast<std::size_t>(i)] - mx);
    sxy += (lx[static_cast<std::size_t>(i)] - mx) * (ly[static_cast<std::size_t>(i)] - my);
  }
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[static_cast<std::size_t>(i)] - (rep.intercept + rep.slope * lx[static_cast<std::size_t>(i)]);
    ss_res += r * r;
  }
  if (n > 2) {
    rep.slope_stderr = std::sqrt(ss_res / (n - 2) / sxx);
    rep.slope_ci95 = detail::student_t_975(n - 2) * rep.slope_stderr;
  }
  return rep;
}

}  // namespace horizon
