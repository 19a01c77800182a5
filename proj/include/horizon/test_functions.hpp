#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/frame_bundle.hpp"
#include "horizon/manifold.hpp"

namespace horizon {

/// Smooth scalar field on a chart, bounded with bounded derivatives on the
/// experiment region. When the Laplace-Beltrami value is known in closed
/// form it is attached as an oracle; eigenfunctions also carry lambda with
/// Delta f = -lambda f.
struct ScalarField {
  std::string name;
  std::function<double(const Vec&)> eval;
  std::function<double(const Vec&)> laplacian;  // optional analytic oracle
  std::optional<double> eigenvalue;             // Delta f = -lambda f

  double operator()(const Vec& x) const { return eval(x); }
};

/// Scalar field on the frame bundle.
struct BundleField {
  std::string name;
  std::function<double(const FramePoint&)> eval;

  double operator()(const FramePoint& u) const { return eval(u); }
};

/// f-bar composed with the bundle projection.
inline BundleField lift_through_projection(const ScalarField& f) {
  return BundleField{f.name + "@pi", [f](const FramePoint& u) { return f.eval(u.base.coords); }};
}

/// Frame-entry functional (row, col); constant along flat transport.
inline BundleField frame_entry_field(int row, int col) {
  return BundleField{"frame" + std::to_string(row + 1) + std::to_string(col + 1),
                     [row, col](const FramePoint& u) { return u.frame(row, col); }};
}

inline std::vector<ScalarField> catalog_fields(const std::string& manifold) {
  std::vector<ScalarField> out;
  if (manifold == "euclidean") {
    out.push_back({"x1_squared", [](const Vec& x) { return x[0] * x[0]; }, [](const Vec&) { return 2.0; }, {}});
    out.push_back({"x1_x2", [](const Vec& x) { return x[0] * x[1]; }, [](const Vec&) { return 0.0; }, {}});
    out.push_back({"sin_x1", [](const Vec& x) { return std::sin(x[0]); },
                   [](const Vec& x) { return -std::sin(x[0]); }, {}});
    return out;
  }
  if (manifold == "sphere") {
    out.push_back({"cos_theta", [](const Vec& x) { return std::cos(x[0]); },
                   [](const Vec& x) { return -2.0 * std::cos(x[0]); }, 2.0});
    // degree-2 sectoral harmonic
    out.push_back({"sin2theta_cos2phi",
                   [](const Vec& x) {
                     const double s = std::sin(x[0]);
                     return s * s * std::cos(2.0 * x[1]);
                   },
                   [](const Vec& x) {
                     const double s = std::sin(x[0]);
                     return -6.0 * s * s * std::cos(2.0 * x[1]);
                   },
                   6.0});
    return out;
  }
  if (manifold == "hyperbolic") {
    out.push_back({"log_y", [](const Vec& x) { return std::log(x[1]); }, [](const Vec&) { return -1.0; }, {}});
    out.push_back({"y", [](const Vec& x) { return x[1]; }, [](const Vec&) { return 0.0; }, {}});
    return out;
  }
  if (manifold == "torus") {
    out.push_back({"cos_x1", [](const Vec& x) { return std::cos(x[0]); },
                   [](const Vec& x) { return -std::cos(x[0]); }, 1.0});
    out.push_back({"cos_x1_cos_x2", [](const Vec& x) { return std::cos(x[0]) * std::cos(x[1]); },
                   [](const Vec& x) { return -2.0 * std::cos(x[0]) * std::cos(x[1]); }, 2.0});
    return out;
  }
  throw UnsupportedFunctionError("no test-function catalog for manifold '" + manifold + "'");
}

inline ScalarField catalog_field(const std::string& manifold, const std::string& fname) {
  for (auto& f : catalog_fields(manifold))
    if (f.name == fname) return f;
  throw UnsupportedFunctionError("function '" + fname + "' not in the catalog for '" + manifold + "'");
}

}  // namespace horizon
