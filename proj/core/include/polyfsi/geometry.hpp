#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "polyfsi/circle_boundary.hpp"
#include "polyfsi/disk_grid.hpp"
#include "polyfsi/types.hpp"

namespace polyfsi {

struct ProjectionResult {
  double y = 0.0;  // boundary coordinate of the foot point
  double s = 0.0;  // signed distance, negative inside the domain
  Vec2 foot;       // p(x) on the boundary
};

/// Reference domain: disk of radius `disk_radius` with the boundary manifold
/// parametrized by angle. Holds the tubular-neighborhood data (projection,
/// signed distance, cutoff profile) the interface transform is built from.
class ReferenceDomain {
 public:
  ReferenceDomain(double disk_radius, int boundary_nodes, double tube_radius,
                  double sup_margin, double grad_bound);

  int dimension() const { return 2; }
  double disk_radius() const { return radius_; }
  double tube_radius() const { return tube_; }
  double sup_margin() const { return alpha_; }
  double grad_bound() const { return grad_bound_; }
  const CircleBoundary& boundary() const { return omega_; }

  Vec2 boundary_point(double y) const { return {radius_ * std::cos(y), radius_ * std::sin(y)}; }
  Vec2 outward_normal(double y) const { return {std::cos(y), std::sin(y)}; }
  Vec2 tangent(double y) const { return {-std::sin(y), std::cos(y)}; }

  /// Quintic smoothstep cutoff: 0 on (-L, -0.8 L], 1 on [-0.2 L, 0].
  double cutoff(double s) const;
  double cutoff_derivative(double s) const;
  /// Largest displacement for which the normal-coordinate transform stays
  /// invertible, 1 / sup |cutoff'|.
  double displacement_cap() const { return 0.6 * tube_ / 1.875; }

  ProjectionResult project(const Vec2& x) const;

  /// sup |eta| < sup_margin and sup |eta'| < grad_bound.
  bool admissible(const std::vector<double>& eta) const;
  void require_admissible(const std::vector<double>& eta) const;

 private:
  double radius_, tube_, alpha_, grad_bound_;
  CircleBoundary omega_;
};

/// Interface transform at a frozen displacement: forward map, inverse by
/// root-finding along the normal ray, Jacobian and the pulled-back
/// coefficient tensors, all sampled on a disk grid. Immutable once built.
struct HanzawaMap {
  const DiskGrid* grid = nullptr;
  const ReferenceDomain* dom = nullptr;
  std::vector<double> eta, eta_dot;

  VecField forward;              // Psi on cell centers
  std::vector<Vec2> forward_rim; // deformed boundary points per node
  ScalarField jac;               // det of the map gradient
  MatField grad_inv;             // (DPsi)^{-1} on cells
  MatField tensor_a;             // J * Ginv * Ginv^T
  MatField tensor_b;             // J * Ginv
  VecField psi_dot;              // time derivative of the forward map
  VecField inv_dot_of_fwd;       // (d/dt Psi^{-1}) composed with Psi
  std::vector<double> jac_rim;
  std::vector<Mat2> tensor_a_rim, tensor_b_rim;
  std::vector<Vec2> deformed_n;      // unit normal of the deformed boundary
  std::vector<double> area_factor;   // |d/dy of the deformed parametrization|
  double min_jac = 1.0;

  /// Inverse map by safeguarded Newton along the normal coordinate.
  Vec2 inverse(const Vec2& x, double tol = 1e-12) const;
  /// Forward map at an arbitrary reference point (trig-interpolated eta).
  Vec2 forward_at(const Vec2& xbar) const;
  double eta_at(double y) const;
  double eta_dot_at(double y) const;
};

HanzawaMap build_hanzawa(const ReferenceDomain& dom, const DiskGrid& grid,
                         const StructureState& state);

struct DeformedNormal {
  std::vector<Vec2> n;            // unit normals per boundary node
  std::vector<double> area_factor;
  std::vector<double> n_dot_n;    // reference . deformed normal per node
};

DeformedNormal deformed_normal(const ReferenceDomain& dom, const std::vector<double>& eta,
                               double tol = 1e-10);

struct LipschitzReport {
  // ratio[s] = |Psi_eta - Psi_zeta|_{W^{s,2}} / |eta - zeta|_{W^{s,2}}, s = 0..order
  std::vector<double> ratio;
  // same for the time derivative when both states carry velocities
  std::optional<double> ratio_dt;
};

LipschitzReport verify_lipschitz(const ReferenceDomain& dom, const DiskGrid& grid,
                                 const StructureState& eta, const StructureState& zeta,
                                 int order, bool with_time_derivative = false);

}  // namespace polyfsi
