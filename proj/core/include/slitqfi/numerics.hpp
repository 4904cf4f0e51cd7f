#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace slitqfi::numerics {

// Central-difference derivative with one Richardson step (h, h/2).
struct Derivative {
  double value = 0.0;        // extrapolated
  double single_step = 0.0;  // plain central difference at h/2
};

template <typename F>
Derivative richardson_derivative(F&& f, double x, double h) {
  const double d_h = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d_h2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  return {(4.0 * d_h2 - d_h) / 3.0, d_h2};
}

// Same scheme applied to any vector-space valued function (Eigen objects).
// With levels = 3 a further step h/4 removes the h^4 term as well.
template <typename F>
auto richardson_derivative_of(F&& f, double x, double h, int levels = 2) {
  auto d_h = ((f(x + h) - f(x - h)) / (2.0 * h)).eval();
  auto d_h2 = ((f(x + 0.5 * h) - f(x - 0.5 * h)) / h).eval();
  auto first = ((4.0 * d_h2 - d_h) / 3.0).eval();
  if (levels < 3) return first;
  auto d_h4 = ((f(x + 0.25 * h) - f(x - 0.25 * h)) / (0.5 * h)).eval();
  auto second = ((4.0 * d_h4 - d_h2) / 3.0).eval();
  return ((16.0 * second - first) / 15.0).eval();
}

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section maximisation of a unimodal function on [lo, hi].
Extremum golden_section_max(const std::function<double(double)>& f, double lo,
                            double hi, double tol, int max_iter = 500);

// Bisection for f(x) = 0 given a sign change on [lo, hi].
double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi, double tol, int max_iter = 500);

// Vertex of the parabola through (x0 - h, y_m), (x0, y_0), (x0 + h, y_p).
// Returns nullopt-like {false, ...} when the curvature is not strictly
// negative (no interior maximum).
struct ParabolaVertex {
  bool valid = false;
  double x = 0.0;
  double value = 0.0;
};

ParabolaVertex parabola_vertex(double x0, double h_left, double h_right,
                               double y_m, double y_0, double y_p);

}  // namespace slitqfi::numerics
