#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "horizon/heat.hpp"
#include "horizon/test_functions.hpp"
#include "horizon/walker.hpp"

namespace horizon {

struct ValueWithError {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_used = 0;
  std::uint64_t n_excluded = 0;
};

namespace detail {

/// Mean and standard error over one row of a functional batch, reduced in
/// replica order (parallelism-invariant).
inline ValueWithError reduce_row(const Mat& values, int row) {
  ValueWithError out;
  double acc = 0.0;
  std::uint64_t n = 0;
  for (int r = 0; r < values.cols(); ++r) {
    const double v = values(row, r);
    if (std::isnan(v)) {
      ++out.n_excluded;
      continue;
    }
    acc += v;
    ++n;
  }
  if (n == 0) throw TooFewReplicasError("all replicas excluded");
  const double mean = acc / static_cast<double>(n);
  double ss = 0.0;
  for (int r = 0; r < values.cols(); ++r) {
    const double v = values(row, r);
    if (std::isnan(v)) continue;
    ss += (v - mean) * (v - mean);
  }
  out.value = mean;
  out.n_used = n;
  out.stderr_ = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return out;
}

}  // namespace detail

/// E[f(Z_t)] estimated over replica endpoints at time t, with Monte Carlo
/// standard error. Domain-exit replicas are excluded and counted.
inline ValueWithError empirical_semigroup(const WalkConfig& cfg, const ScalarField& f, double t) {
  if (cfg.replica_count < 100) throw TooFewReplicasError("empirical_semigroup needs at least 100 replicas");
  if (t > cfg.horizon_t + 1e-12) throw PreconditionError("t exceeds the configured horizon");
  StateFunctional sf = [&f](const Vec& x, const Mat*) { return f(x); };
  const FunctionalBatchResult batch = run_functional_batch(cfg, /*lifted=*/false, sf, {t});
  return detail::reduce_row(batch.values, 0);
}

struct LiftedTestReport {
  double lifted_value = 0.0;
  double lifted_stderr = 0.0;
  double base_value = 0.0;
  double base_stderr = 0.0;
  double max_pathwise_gap = 0.0;  // shared-randomness mode only
  double z_score = 0.0;           // independent mode only
  bool shared_randomness = true;
  std::uint64_t n_excluded = 0;
};

/// Compares E[f(pi(lifted walk at t))] against E[f(base walk at t)].
/// Shared randomness: the base walk replays the lifted walk's increments,
/// so paths (hence values) must agree pathwise. Independent randomness:
/// both walks estimate the same limit; report a z-score. The independent
/// comparison is only meaningful for rotation-invariant laws, where the
/// carried-frame and coordinate-frame increment families coincide in law.
inline LiftedTestReport lifted_functional_test(const WalkConfig& cfg, const ScalarField& f, double t,
                                               bool shared_randomness) {
  if (cfg.replica_count < 100) throw TooFewReplicasError("lifted_functional_test needs at least 100 replicas");
  if (t > cfg.horizon_t + 1e-12) throw PreconditionError("t exceeds the configured horizon");
  LiftedTestReport rep;
  rep.shared_randomness = shared_randomness;

  if (shared_randomness) {
    // pathwise coupling, replica by replica
    double lift_acc = 0.0, base_acc = 0.0;
    double lift_acc2 = 0.0, base_acc2 = 0.0;
    std::uint64_t used = 0;
    WalkConfig local = cfg;
    local.horizon_t = t;
    for (std::uint64_t r = 0; r < cfg.replica_count; ++r) {
      LiftedWalkResult lifted = run_lifted_walk(local, r, /*record_increments=*/true);
      if (lifted.frame_path.domain_exit) {
        ++rep.n_excluded;
        continue;
      }
      Path replay = replay_base_walk(local, lifted.increments, r);
      if (replay.domain_exit) {
        ++rep.n_excluded;
        continue;
      }
      const Vec& lift_end = lifted.base_path.points.back();
      const Vec& base_end = replay.points.back();
      const double gap = (lift_end - base_end).cwiseAbs().maxCoeff();
      rep.max_pathwise_gap = std::max(rep.max_pathwise_gap, gap);
      const double lv = f(lift_end);
      const double bv = f(base_end);
      lift_acc += lv;
      lift_acc2 += lv * lv;
      base_acc += bv;
      base_acc2 += bv * bv;
      ++used;
    }
    if (used == 0) throw TooFewReplicasError("all replicas excluded");
    const double n = static_cast<double>(used);
    rep.lifted_value = lift_acc / n;
    rep.base_value = base_acc / n;
    rep.lifted_stderr = std::sqrt(std::max(0.0, lift_acc2 / n - rep.lifted_value * rep.lifted_value) / n);
    rep.base_stderr = std::sqrt(std::max(0.0, base_acc2 / n - rep.base_value * rep.base_value) / n);
    return rep;
  }

  WalkConfig local = cfg;
  local.horizon_t = t;
  StateFunctional sf = [&f](const Vec& x, const Mat*) { return f(x); };
  const FunctionalBatchResult lifted = run_functional_batch(local, /*lifted=*/true, sf, {t});
  WalkConfig other = local;
  other.master_seed = splitmix64(cfg.master_seed ^ 0x5851F42D4C957F2DULL);  // independent stream
  const FunctionalBatchResult base = run_functional_batch(other, /*lifted=*/false, sf, {t});
  const ValueWithError lv = detail::reduce_row(lifted.values, 0);
  const ValueWithError bv = detail::reduce_row(base.values, 0);
  rep.lifted_value = lv.value;
  rep.lifted_stderr = lv.stderr_;
  rep.base_value = bv.value;
  rep.base_stderr = bv.stderr_;
  rep.n_excluded = lifted.excluded_count + base.excluded_count;
  const double combined = std::sqrt(lv.stderr_ * lv.stderr_ + bv.stderr_ * bv.stderr_);
  rep.z_score = combined > 0.0 ? (lv.value - bv.value) / combined : 0.0;
  return rep;
}

struct ConvergenceRow {
  std::string function;
  double t = 0.0;
  double alpha = 0.0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double reference = 0.0;
  double z_score = 0.0;
  std::uint64_t excluded = 0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool final_alpha_ok = false;  // |z| < 3 at the smallest alpha
  bool trend_ok = false;        // |bias| does not grow as alpha shrinks (within error bars)
  double z_threshold = 3.0;
};

/// |E[f(Z_t^alpha)] - reference| across an alpha sweep against the heat
/// semigroup reference.
inline ConvergenceReport alpha_trend(const WalkConfig& cfg_base, const ScalarField& f, double t,
                                     const std::vector<double>& alphas, const HeatReference& ref) {
  if (alphas.size() < 3) throw PreconditionError("alpha_trend needs at least 3 alpha values");
  for (std::size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] < alphas[i - 1])) throw PreconditionError("alpha values must be strictly decreasing");

  ConvergenceReport rep;
  const Vec x0 = resolved_initial(cfg_base);
  const double reference = heat_semigroup_reference(ref, f, Point{x0}, t);
  for (double alpha : alphas) {
    WalkConfig cfg = cfg_base;
    cfg.alpha = alpha;
    cfg.horizon_t = t;
    cfg.geo.step = 0.0;
    StateFunctional sf = [&f](const Vec& x, const Mat*) { return f(x); };
    const FunctionalBatchResult batch = run_functional_batch(cfg, false, sf, {t});
    const ValueWithError est = detail::reduce_row(batch.values, 0);
    ConvergenceRow row;
    row.function = f.name;
    row.t = t;
    row.alpha = alpha;
    row.empirical = est.value;
    row.stderr_ = est.stderr_;
    row.reference = reference;
    row.z_score = est.stderr_ > 0.0 ? (est.value - reference) / est.stderr_ : 0.0;
    row.excluded = batch.excluded_count;
    rep.rows.push_back(row);
  }
  rep.final_alpha_ok = std::abs(rep.rows.back().z_score) < rep.z_threshold;
  // trend: bias at the smallest alpha must not exceed the largest-alpha bias
  // by more than the combined noise
  const auto& first = rep.rows.front();
  const auto& last = rep.rows.back();
  const double noise = 3.0 * std::sqrt(first.stderr_ * first.stderr_ + last.stderr_ * last.stderr_);
  rep.trend_ok = std::abs(last.empirical - last.reference) <=
                 std::abs(first.empirical - first.reference) + noise;
  return rep;
}

}  // namespace horizon
