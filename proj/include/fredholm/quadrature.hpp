#pragma once

#include <functional>
#include <vector>

namespace fredholm {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order on [-1, 1].
GaussRule gauss_legendre(int order);

struct QuadResult {
  double value;
  double error_estimate;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b].
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double rel_tol = 1e-12);

/// Double-exponential (tanh-sinh) integration; tolerates integrable endpoint
/// singularities such as sqrt(t - a).
QuadResult integrate_endpoint_singular(const std::function<double(double)>& f,
                                       double a, double b,
                                       double rel_tol = 1e-13);

}  // namespace fredholm
