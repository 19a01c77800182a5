#pragma once

#include <cmath>
#include <string>

#include "horizon/manifold.hpp"
#include "horizon/quadrature.hpp"
#include "horizon/test_functions.hpp"

namespace horizon {

/// Closed-form heat-semigroup references, e^{t Delta / 2} f (p):
///   gaussian_exact   - flat plane, Gauss-Hermite quadrature of the kernel
///   wrapped_gaussian - flat torus, same quadrature (catalog f are periodic)
///   harmonic_series  - sphere, exact decay e^{-lambda t / 2} on eigenfunctions
enum class HeatMethod { gaussian_exact, wrapped_gaussian, harmonic_series };

struct HeatReference {
  std::string manifold;
  HeatMethod method = HeatMethod::gaussian_exact;
  int quad_nodes = 40;
};

/// Default reference per catalog manifold; hyperbolic has none (it joins the
/// generator tests only).
inline std::optional<HeatReference> default_heat_reference(const std::string& manifold) {
  if (manifold == "euclidean") return HeatReference{manifold, HeatMethod::gaussian_exact, 40};
  if (manifold == "torus") return HeatReference{manifold, HeatMethod::wrapped_gaussian, 40};
  if (manifold == "sphere") return HeatReference{manifold, HeatMethod::harmonic_series, 0};
  return std::nullopt;
}

inline double heat_semigroup_reference(const HeatReference& ref, const ScalarField& f, const Point& p,
                                       double t) {
  if (!(t >= 0.0)) throw PreconditionError("heat reference needs t >= 0");
  if (t == 0.0) return f(p.coords);
  switch (ref.method) {
    case HeatMethod::harmonic_series: {
      if (!f.eigenvalue)
        throw UnsupportedFunctionError("function '" + f.name + "' is not an eigenfunction; no series reference");
      return std::exp(-(*f.eigenvalue) * t / 2.0) * f(p.coords);
    }
    case HeatMethod::gaussian_exact:
    case HeatMethod::wrapped_gaussian: {
      const Quadrature q = gauss_hermite(ref.quad_nodes);
      const double scale = std::sqrt(2.0 * t);  // nodes enter as sqrt(2) x_i per unit variance
      const double inv = 1.0 / std::sqrt(M_PI);
      double acc = 0.0;
      Vec y(2);
      for (std::size_t i = 0; i < q.nodes.size(); ++i)
        for (std::size_t j = 0; j < q.nodes.size(); ++j) {
          y[0] = p.coords[0] + scale * q.nodes[i];
          y[1] = p.coords[1] + scale * q.nodes[j];
          acc += q.weights[i] * q.weights[j] * f(y);
        }
      return inv * inv * acc;
    }
  }
  throw UnsupportedFunctionError("unknown heat reference method");
}

}  // namespace horizon
