#pragma once

#include <Eigen/Dense>

#include <vector>

namespace horizon {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Christoffel symbols at a point: comp[k](i, j) = Gamma^k_{ij}.
/// Symmetric in (i, j) for a torsion-free connection.
struct Christoffel {
  std::vector<Mat> comp;

  Christoffel() = default;
  explicit Christoffel(int dim) { resize(dim); }

  void resize(int dim) {
    comp.resize(static_cast<std::size_t>(dim));
    for (auto& m : comp) {
      m.resize(dim, dim);
      m.setZero();
    }
  }

  int dim() const { return static_cast<int>(comp.size()); }

  double operator()(int k, int i, int j) const { return comp[static_cast<std::size_t>(k)](i, j); }
  double& operator()(int k, int i, int j) { return comp[static_cast<std::size_t>(k)](i, j); }

  void set_zero() {
    for (auto& m : comp) m.setZero();
  }

  double max_asymmetry() const {
    double worst = 0.0;
    for (const auto& m : comp) worst = std::max(worst, (m - m.transpose()).cwiseAbs().maxCoeff());
    return worst;
  }
};

/// B(m, k) = sum_j w^j Gamma^m_{jk}. The geodesic equation reads w' = -B(w) w
/// and the frame transport ODE reads E' = -B(w) E.
inline void christoffel_contract(const Christoffel& gamma, const Vec& w, Mat& out) {
  const int d = gamma.dim();
  out.resize(d, d);
  for (int m = 0; m < d; ++m)
    for (int k = 0; k < d; ++k) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += w[j] * gamma(m, j, k);
      out(m, k) = s;
    }
}

inline Mat christoffel_contract(const Christoffel& gamma, const Vec& w) {
  Mat out;
  christoffel_contract(gamma, w, out);
  return out;
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace horizon
