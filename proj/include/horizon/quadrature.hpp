#pragma once

#include <cmath>
#include <vector>

#include "horizon/linalg.hpp"

namespace horizon {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight e^{-x^2} via Golub-Welsch on the
/// Hermite Jacobi matrix. Weights sum to sqrt(pi).
inline Quadrature gauss_hermite(int n) {
  Mat jacobi = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const double mu0 = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    q.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    q.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return q;
}

/// E[g(Z)] for Z ~ N(0, 1) using a Gauss-Hermite rule.
template <typename F>
inline double gauss_hermite_expectation(const Quadrature& q, F&& g) {
  const double inv = 1.0 / std::sqrt(M_PI);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i)
    acc += q.weights[i] * g(std::sqrt(2.0) * q.nodes[i]);
  return inv * acc;
}

}  // namespace horizon
