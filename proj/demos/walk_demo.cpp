// Runs a short lifted walk on the sphere and prints the recorded frame path
// together with the orthonormality residual at each grid time.

#include <cstdio>

#include "horizon/walker.hpp"

int main() {
  horizon::WalkConfig cfg;
  cfg.chart = horizon::make_sphere();
  cfg.law = horizon::IncrementLaw{horizon::LawKind::sphere_uniform};
  cfg.alpha = 0.1;
  cfg.horizon_t = 0.5;
  cfg.record_points = 10;
  cfg.master_seed = 7;

  const auto res = horizon::run_lifted_walk(cfg);
  std::printf("%8s %10s %10s %12s\n", "time", "theta", "phi", "gram_resid");
  for (std::size_t k = 0; k < res.frame_path.times.size(); ++k) {
    const auto& u = res.frame_path.points[k];
    std::printf("%8.3f %10.5f %10.5f %12.3e\n", res.frame_path.times[k], u.base.coords[0], u.base.coords[1],
                horizon::orthonormality_residual(cfg.chart, u));
  }
  std::printf("max pre-projection drift: %.3e\n", res.max_drift);
  return 0;
}
