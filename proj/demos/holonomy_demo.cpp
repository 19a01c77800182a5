// Transports a frame around a spherical octant triangle and prints the
// holonomy angle next to the Gauss-Bonnet prediction (the enclosed area).

#include <cstdio>

#include "horizon/holonomy.hpp"

int main() {
  const auto sphere = horizon::make_sphere();
  horizon::GeodesicConfig geo;
  geo.step = 1e-3;
  const auto res = horizon::spherical_octant_holonomy(sphere, geo);
  std::printf("holonomy angle      : % .10f\n", res.angle);
  std::printf("enclosed octant area: % .10f\n", res.expected);
  std::printf("loop closure error  : % .3e\n", res.closure_error);
  std::printf("max frame drift     : % .3e\n", res.max_drift);
  return 0;
}
