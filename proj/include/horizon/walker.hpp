#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "horizon/catalog.hpp"
#include "horizon/frame_bundle.hpp"
#include "horizon/geodesic.hpp"
#include "horizon/increments.hpp"
#include "horizon/parallel.hpp"
#include "horizon/rng.hpp"

namespace horizon {

enum class TimeMode { discrete_rescaled, exponential_clock };

inline TimeMode time_mode_from_name(const std::string& s) {
  if (s == "discrete_rescaled") return TimeMode::discrete_rescaled;
  if (s == "exponential_clock") return TimeMode::exponential_clock;
  throw ValidationError("mode", "unknown mode '" + s + "' (expected discrete_rescaled|exponential_clock)");
}

inline std::string time_mode_name(TimeMode m) {
  return m == TimeMode::discrete_rescaled ? "discrete_rescaled" : "exponential_clock";
}

struct WalkConfig {
  ManifoldChart chart;
  IncrementLaw law{LawKind::sphere_uniform};
  double alpha = 0.1;
  double horizon_t = 1.0;
  TimeMode mode = TimeMode::discrete_rescaled;
  Vec initial;                       // empty -> catalog default
  std::optional<Mat> initial_frame;  // default: coordinate frame at initial
  GeodesicConfig geo{0.0, 10.0, "rk4"};  // step 0 -> min(1e-3, alpha/50)
  std::uint64_t master_seed = 0;
  std::uint64_t replica_count = 1;
  int record_points = 1000;
  int threads = 1;
};

inline void validate_walk_config(const WalkConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ValidationError("alpha", "must be in (0, 1]");
  if (!(cfg.horizon_t >= 0.0)) throw ValidationError("t", "must be >= 0");
  if (cfg.replica_count < 1) throw ValidationError("replicas", "must be >= 1");
  if (cfg.record_points < 1) throw ValidationError("record_points", "must be >= 1");
}

inline GeodesicConfig resolved_geodesic_config(const WalkConfig& cfg) {
  GeodesicConfig g = cfg.geo;
  if (!(g.step > 0.0)) g.step = auto_integrator_step(cfg.alpha);
  return g;
}

inline Vec resolved_initial(const WalkConfig& cfg) {
  if (cfg.initial.size() > 0) return cfg.initial;
  return default_initial_point(cfg.chart).coords;
}

/// floor(alpha^{-2} t) with a relative guard against representation noise
/// (alpha = 0.05, t = 1 must give 400 steps).
inline std::uint64_t discrete_step_count(double alpha, double horizon_t) {
  const double raw = horizon_t / (alpha * alpha);
  return static_cast<std::uint64_t>(std::floor(raw + 1e-9));
}

inline double record_grid_dt(const WalkConfig& cfg) {
  return std::max(cfg.alpha * cfg.alpha, cfg.horizon_t / cfg.record_points);
}

struct Path {
  std::vector<double> times;
  std::vector<Vec> points;
  std::uint64_t replica = 0;
  std::string config_hash;
  bool domain_exit = false;
  std::uint64_t steps_completed = 0;
};

struct FramePath {
  std::vector<double> times;
  std::vector<FramePoint> points;
  std::uint64_t replica = 0;
  std::string config_hash;
  bool domain_exit = false;
  std::uint64_t steps_completed = 0;
};

// ---------------------------------------------------------------------------
// Steppers (allocation-free per step)
// ---------------------------------------------------------------------------

/// One step of the speed-alpha walk on M: draw xi, push through the
/// coordinate orthonormal frame at the current point, follow the geodesic
/// for time alpha.
class BaseStepper {
 public:
  BaseStepper(const ManifoldChart& m, IncrementLaw law, double alpha, GeodesicConfig geo)
      : m_(m), law_(law), alpha_(alpha), geo_(std::move(geo)) {
    const int d = m.dim;
    xi_.resize(d);
    v_.resize(d);
    xe_.resize(d);
    ve_.resize(d);
    frame_.resize(d, d);
    g_.resize(d, d);
    gs_ws_.resize(d);
    rk_.ensure(d);
  }

  void step(Vec& x, RngStream& rng) {
    frame_at(x);
    law_.sample(rng, xi_);
    v_.noalias() = frame_ * xi_;
    advance(x, v_);
  }

  /// Replay mode: step with a given tangent increment (chart components).
  void step_given(Vec& x, const Vec& v) { advance(x, v); }

 private:
  void frame_at(const Vec& x) {
    if (m_.orthonormal_frame_analytic) {
      m_.orthonormal_frame_analytic(x, frame_);
    } else {
      m_.metric(x, g_);
      frame_.setIdentity(m_.dim, m_.dim);
      gram_schmidt_in_metric(g_, frame_, gs_ws_);
    }
  }

  void advance(Vec& x, const Vec& v) {
    if (m_.has_closed_form()) {
      m_.closed_form_geodesic(x, v, alpha_, xe_, ve_);
      if (!m_.domain.contains(xe_)) throw DomainExitError("walk step left the chart on '" + m_.name + "'");
      x = xe_;
    } else {
      GeodesicState st = integrate_geodesic_rk4(m_, x, v, alpha_, geo_.step, &rk_);
      x = st.position;
    }
  }

  const ManifoldChart& m_;
  IncrementLaw law_;
  double alpha_;
  GeodesicConfig geo_;
  Vec xi_, v_, xe_, ve_, gs_ws_;
  Mat frame_, g_;
  GeodesicWorkspace rk_;
};

/// One step of the horizontally lifted walk on O(M): draw xi once, form
/// v = (frame) xi, advance base and frame along the horizontal lift.
class LiftedStepper {
 public:
  LiftedStepper(const ManifoldChart& m, IncrementLaw law, double alpha, GeodesicConfig geo,
                FrameOdeOptions opts = {})
      : law_(law), alpha_(alpha), integ_(m, std::move(geo), opts) {
    xi_.resize(m.dim);
    v_.resize(m.dim);
    vel_.resize(m.dim);
  }

  void step(Vec& x, Mat& frame, RngStream& rng, Vec* increment_out = nullptr) {
    law_.sample(rng, xi_);
    v_.noalias() = frame * xi_;
    if (increment_out) *increment_out = v_;
    integ_.advance(x, frame, v_, alpha_, vel_);
  }

  double max_drift() const { return integ_.max_drift(); }

 private:
  IncrementLaw law_;
  double alpha_;
  FrameTransportIntegrator integ_;
  Vec xi_, v_, vel_;
};

// ---------------------------------------------------------------------------
// Walk runners
// ---------------------------------------------------------------------------

namespace detail {

/// Drives the jump chain and invokes record(t, state-ref) at the cadlag
/// evaluation times j*dt, j = 0..J. StepFn advances the state by one jump
/// and returns false when the replica must be aborted (domain exit).
template <typename StepFn, typename RecordFn>
inline void drive_walk(const WalkConfig& cfg, StepFn&& do_step, RecordFn&& record, bool& domain_exit,
                       std::uint64_t& steps_done, RngStream& rng) {
  const double dt = record_grid_dt(cfg);
  const std::uint64_t grid_count = static_cast<std::uint64_t>(std::floor(cfg.horizon_t / dt + 1e-9));
  std::uint64_t next_grid = 0;
  record(0.0);
  next_grid = 1;
  domain_exit = false;
  steps_done = 0;

  const double alpha2 = cfg.alpha * cfg.alpha;
  if (cfg.mode == TimeMode::discrete_rescaled) {
    const std::uint64_t steps = discrete_step_count(cfg.alpha, cfg.horizon_t);
    for (std::uint64_t k = 1; k <= steps; ++k) {
      const double t_next = static_cast<double>(k) * alpha2;
      while (next_grid <= grid_count && static_cast<double>(next_grid) * dt < t_next) {
        record(static_cast<double>(next_grid) * dt);
        ++next_grid;
      }
      if (!do_step(rng)) {
        domain_exit = true;
        return;
      }
      ++steps_done;
    }
  } else {
    double t = 0.0;
    while (true) {
      const double hold = rng.exponential(alpha2);
      const double t_next = t + hold;
      if (t_next > cfg.horizon_t) break;
      while (next_grid <= grid_count && static_cast<double>(next_grid) * dt < t_next) {
        record(static_cast<double>(next_grid) * dt);
        ++next_grid;
      }
      if (!do_step(rng)) {
        domain_exit = true;
        return;
      }
      ++steps_done;
      t = t_next;
    }
  }
  while (next_grid <= grid_count) {
    record(static_cast<double>(next_grid) * dt);
    ++next_grid;
  }
}

}  // namespace detail

inline Path run_base_walk(const WalkConfig& cfg, std::uint64_t replica = 0) {
  validate_walk_config(cfg);
  const GeodesicConfig geo = resolved_geodesic_config(cfg);
  RngStream rng = RngStream::for_replica(cfg.master_seed, replica);
  Vec x = resolved_initial(cfg);
  cfg.chart.require_in_domain(x);
  BaseStepper stepper(cfg.chart, cfg.law, cfg.alpha, geo);

  Path path;
  path.replica = replica;
  auto record = [&](double t) {
    path.times.push_back(t);
    path.points.push_back(x);
  };
  auto do_step = [&](RngStream& r) {
    try {
      stepper.step(x, r);
      return true;
    } catch (const DomainExitError&) {
      return false;
    }
  };
  detail::drive_walk(cfg, do_step, record, path.domain_exit, path.steps_completed, rng);
  return path;
}

/// Replay the base walk with a fixed increment sequence (shared-randomness
/// coupling with a lifted walk). Runs in discrete mode for increments.size()
/// steps.
inline Path replay_base_walk(const WalkConfig& cfg, const std::vector<Vec>& increments,
                             std::uint64_t replica = 0) {
  validate_walk_config(cfg);
  const GeodesicConfig geo = resolved_geodesic_config(cfg);
  Vec x = resolved_initial(cfg);
  cfg.chart.require_in_domain(x);
  BaseStepper stepper(cfg.chart, cfg.law, cfg.alpha, geo);

  Path path;
  path.replica = replica;
  const double alpha2 = cfg.alpha * cfg.alpha;
  path.times.push_back(0.0);
  path.points.push_back(x);
  for (std::size_t k = 0; k < increments.size(); ++k) {
    try {
      stepper.step_given(x, increments[k]);
    } catch (const DomainExitError&) {
      path.domain_exit = true;
      return path;
    }
    ++path.steps_completed;
    path.times.push_back(static_cast<double>(k + 1) * alpha2);
    path.points.push_back(x);
  }
  return path;
}

struct LiftedWalkResult {
  FramePath frame_path;
  Path base_path;  // projection of frame_path, same grid
  std::vector<Vec> increments;
  double max_drift = 0.0;
};

inline LiftedWalkResult run_lifted_walk(const WalkConfig& cfg, std::uint64_t replica = 0,
                                        bool record_increments = false) {
  validate_walk_config(cfg);
  const GeodesicConfig geo = resolved_geodesic_config(cfg);
  RngStream rng = RngStream::for_replica(cfg.master_seed, replica);
  Vec x = resolved_initial(cfg);
  cfg.chart.require_in_domain(x);
  Mat frame;
  if (cfg.initial_frame) {
    FramePoint u = make_frame_point(cfg.chart, Point{x}, &*cfg.initial_frame);
    frame = u.frame;
  } else {
    frame = coordinate_orthonormal_frame(cfg.chart, Point{x});
  }
  LiftedStepper stepper(cfg.chart, cfg.law, cfg.alpha, geo);

  LiftedWalkResult res;
  res.frame_path.replica = replica;
  res.base_path.replica = replica;
  Vec increment(cfg.chart.dim);
  auto record = [&](double t) {
    res.frame_path.times.push_back(t);
    res.frame_path.points.push_back(FramePoint{Point{x}, frame});
    res.base_path.times.push_back(t);
    res.base_path.points.push_back(x);
  };
  auto do_step = [&](RngStream& r) {
    try {
      stepper.step(x, frame, r, record_increments ? &increment : nullptr);
      if (record_increments) res.increments.push_back(increment);
      return true;
    } catch (const DomainExitError&) {
      return false;
    }
  };
  bool exit_flag = false;
  std::uint64_t steps_done = 0;
  detail::drive_walk(cfg, do_step, record, exit_flag, steps_done, rng);
  res.frame_path.domain_exit = res.base_path.domain_exit = exit_flag;
  res.frame_path.steps_completed = res.base_path.steps_completed = steps_done;
  res.max_drift = stepper.max_drift();
  return res;
}

// ---------------------------------------------------------------------------
// Functional evaluation over replica batches (no path storage)
// ---------------------------------------------------------------------------

/// f(x, frame) evaluated on walk states; frame is nullptr for base walks.
using StateFunctional = std::function<double(const Vec&, const Mat*)>;

struct FunctionalBatchResult {
  // values(t_index, replica); NaN for excluded replicas
  Mat values;
  std::vector<std::uint8_t> excluded;
  std::uint64_t excluded_count = 0;
};

/// Evaluates f at the cadlag states at each time in t_grid (sorted,
/// within [0, horizon_t]) across all replicas. Deterministic for fixed
/// (master_seed, config) regardless of thread count.
inline FunctionalBatchResult run_functional_batch(const WalkConfig& cfg, bool lifted,
                                                  const StateFunctional& f,
                                                  const std::vector<double>& t_grid) {
  validate_walk_config(cfg);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || t_grid[i] > cfg.horizon_t + 1e-12)
      throw PreconditionError("t grid entry outside [0, horizon_t]");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw PreconditionError("t grid must be strictly increasing");
  }
  const GeodesicConfig geo = resolved_geodesic_config(cfg);
  const std::size_t n_rep = static_cast<std::size_t>(cfg.replica_count);
  FunctionalBatchResult out;
  out.values.resize(static_cast<int>(t_grid.size()), static_cast<int>(n_rep));
  out.values.setConstant(std::numeric_limits<double>::quiet_NaN());
  out.excluded.assign(n_rep, 0);

  const Vec x0 = resolved_initial(cfg);
  cfg.chart.require_in_domain(x0);
  const double alpha2 = cfg.alpha * cfg.alpha;
  const std::uint64_t steps = discrete_step_count(cfg.alpha, cfg.horizon_t);

  parallel_for_indexed(n_rep, resolve_threads(cfg.threads), [&](std::size_t replica) {
    RngStream rng = RngStream::for_replica(cfg.master_seed, replica);
    Vec x = x0;
    Mat frame;
    std::optional<BaseStepper> base;
    std::optional<LiftedStepper> lift;
    if (lifted) {
      frame = coordinate_orthonormal_frame(cfg.chart, Point{x0});
      lift.emplace(cfg.chart, cfg.law, cfg.alpha, geo);
    } else {
      base.emplace(cfg.chart, cfg.law, cfg.alpha, geo);
    }

    std::size_t next_t = 0;
    auto flush_until = [&](double t_next) {
      while (next_t < t_grid.size() && t_grid[next_t] < t_next) {
        out.values(static_cast<int>(next_t), static_cast<int>(replica)) = f(x, lifted ? &frame : nullptr);
        ++next_t;
      }
    };
    try {
      if (cfg.mode == TimeMode::discrete_rescaled) {
        for (std::uint64_t k = 1; k <= steps; ++k) {
          flush_until(static_cast<double>(k) * alpha2);
          if (lifted)
            lift->step(x, frame, rng);
          else
            base->step(x, rng);
        }
      } else {
        double t = 0.0;
        while (true) {
          const double hold = rng.exponential(alpha2);
          const double t_next = t + hold;
          if (t_next > cfg.horizon_t) break;
          flush_until(t_next);
          if (lifted)
            lift->step(x, frame, rng);
          else
            base->step(x, rng);
          t = t_next;
        }
      }
      while (next_t < t_grid.size()) {
        out.values(static_cast<int>(next_t), static_cast<int>(replica)) = f(x, lifted ? &frame : nullptr);
        ++next_t;
      }
    } catch (const DomainExitError&) {
      out.excluded[replica] = 1;
      for (std::size_t j = 0; j < t_grid.size(); ++j)
        out.values(static_cast<int>(j), static_cast<int>(replica)) = std::numeric_limits<double>::quiet_NaN();
    }
  });

  for (std::size_t r = 0; r < n_rep; ++r) out.excluded_count += out.excluded[r];
  return out;
}

}  // namespace horizon
