#pragma once

#include <vector>

namespace polyfsi {

/// Trigonometric interpolant of uniformly spaced periodic samples.
struct TrigInterp {
  double a0 = 0.0;
  std::vector<double> ac, as;  // cos/sin coefficients, k = 1..m
  double period = 0.0;
  int n = 0;

  static TrigInterp build(const std::vector<double>& samples, double period);
  double eval(double y) const;
  double eval_derivative(double y) const;
};

}  // namespace polyfsi
