#pragma once

#include <vector>

#include "polyfsi/types.hpp"

namespace polyfsi {

/// Uniform periodic grid on the boundary manifold (the flat torus coordinate
/// of the interface), with spectral and finite-difference derivatives.
class CircleBoundary {
 public:
  CircleBoundary(int n, double period);

  int size() const { return n_; }
  double dy() const { return dy_; }
  double period() const { return period_; }
  double y(int j) const { return j * dy_; }
  int jp(int j) const { return j + 1 < n_ ? j + 1 : 0; }
  int jm(int j) const { return j > 0 ? j - 1 : n_ - 1; }

  /// Spectral first derivative (exact for band-limited samples).
  std::vector<double> derivative(const std::vector<double>& f) const;
  /// 3-point periodic second difference.
  std::vector<double> second_difference(const std::vector<double>& f) const;
  /// 5-point periodic fourth difference.
  std::vector<double> fourth_difference(const std::vector<double>& f) const;

  static double max_abs(const std::vector<double>& f);
  double l2_norm(const std::vector<double>& f) const;
  double integral(const std::vector<double>& f) const;

 private:
  int n_;
  double period_, dy_;
  std::vector<double> dmat_;
};

/// Interface displacement and velocity sampled on the boundary grid.
struct StructureState {
  std::vector<double> eta;
  std::vector<double> eta_dot;
  double time = 0.0;

  StructureState() = default;
  explicit StructureState(int n, double t = 0.0)
      : eta(n, 0.0), eta_dot(n, 0.0), time(t) {}
  int size() const { return static_cast<int>(eta.size()); }
};

}  // namespace polyfsi
