#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "polyfsi/distribution.hpp"
#include "polyfsi/fokker_planck.hpp"

namespace polyfsi {

struct PhysParams {
  double rho_s = 1.0;      // structure density
  double gamma = 1.0;      // structure damping
  double alpha_beam = 1.0; // bending stiffness
  double rho_f = 1.0;      // fluid density
  double mu = 1.0;         // viscosity
  double eps = 1.0;        // centre-of-mass diffusion
  double kappa = 1.0;      // configuration diffusion
};

/// Reference-domain velocity and pressure, plus the interface trace the
/// solver imposed and the constraint residuals it achieved.
struct FlowState {
  VecField u;
  std::vector<Vec2> u_rim;
  ScalarField p;
  double time = 0.0;
  double div_residual = 0.0;
  double trace_residual = 0.0;

  FlowState() = default;
  FlowState(const DiskGrid& g, int ny)
      : u(g), u_rim(ny, Vec2{0.0, 0.0}), p(g) {}
};

struct PerturbationTerms {
  ScalarField h;    // divergence defect
  VecField h_vec;   // momentum defect
  MatField big_h;   // stress defect (flux tensor)
};

struct PressureDecomposition {
  ScalarField pi_star;  // zero-mean part
  double c_pi = 0.0;    // time-dependent constant
};

using BodyForce = std::function<Vec2(double, const Vec2&)>;
using BoundaryForce = std::function<std::vector<double>(double)>;

struct Dataset {
  BodyForce body_force;          // f(t, physical point)
  BoundaryForce boundary_force;  // g(t) sampled on the boundary grid
  std::vector<double> eta0, eta_star;
  VecField u0;
  std::vector<Vec2> u0_rim;
  std::vector<double> f_hat0;  // initial distribution, x-major over (x, q)
  PhysParams params;

  static Dataset zero(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m);
};

/// Perturbation terms of the frozen-coefficient step: differences of the
/// pulled-back tensors between the base map and the current iterate applied
/// to the iterate's own fields, plus the convective and forcing terms.
PerturbationTerms assemble_perturbation_terms(
    const DiskGrid& g, const HanzawaMap& base, const HanzawaMap& zeta_map,
    const VecField& w_bar, const std::vector<Vec2>& w_rim, const VecField* w_bar_prev,
    const ScalarField& q_bar, const MatField& stress, const BodyForce& f, double time,
    double dt, const PhysParams& params);

/// Monolithic implicit step of the linearized interface-flow system with
/// coefficients frozen at the base displacement. The operator factorization
/// is reused across steps; the trace coupling is imposed strongly through
/// the boundary closure.
class LinearSolventSolver {
 public:
  LinearSolventSolver(const DiskGrid& g, const ReferenceDomain& dom, const HanzawaMap& base,
                      double dt, const PhysParams& params);
  ~LinearSolventSolver();

  struct StepResult {
    StructureState structure;
    FlowState flow;
  };

  StepResult step(const StructureState& s_prev, const FlowState& f_prev,
                  const PerturbationTerms& terms, const MatField& stress,
                  const std::vector<double>& g_force) const;

  const HanzawaMap& base() const { return *base_; }
  double dt() const { return dt_; }

 private:
  struct Impl;
  const DiskGrid* g_;
  const ReferenceDomain* dom_;
  const HanzawaMap* base_;
  double dt_;
  PhysParams params_;
  std::unique_ptr<Impl> impl_;
};

/// Pressure recovery through the elliptic problem with the
/// boundary-determined constant.
PressureDecomposition recover_pressure(const DiskGrid& g, const ReferenceDomain& dom,
                                       const HanzawaMap& map, const FlowState& flow,
                                       const StructureState& s_now,
                                       const StructureState& s_prev, const MatField& stress,
                                       const std::vector<double>& g_force, const BodyForce& f,
                                       double dt, const PhysParams& params);

/// Initial pressure from the variable-coefficient elliptic problem with the
/// interface-determined Robin closure.
ScalarField initial_pressure(const DiskGrid& g, const ReferenceDomain& dom,
                             const HanzawaMap& map0, const Dataset& ds, const FeneModel& model,
                             double* residual_out = nullptr);

struct CompatibilityReport {
  double sup_residual = 0.0;
  double l2_residual = 0.0;
  std::vector<double> residual_normal;  // normal component per boundary node
};

CompatibilityReport check_compatibility(const DiskGrid& g, const ReferenceDomain& dom,
                                        const HanzawaMap& map0, const Dataset& ds,
                                        const FeneModel& model);

struct SolventTrajectory {
  std::vector<StructureState> structure;
  std::vector<FlowState> flow;
  std::vector<double> contraction;  // per-iteration distances ratio
  std::vector<double> distances;
  double dt = 0.0;
  int halvings = 0;
  int steps = 0;
};

struct InnerFpOptions {
  int window_steps = 16;
  double dt = 1e-3;
  double tol = 1e-8;
  int max_iterations = 40;
  int min_window = 2;
};

/// Picard iteration on the frozen-coefficient solve; halves the window on
/// stall and reports per-iteration contraction factors.
SolventTrajectory inner_fixed_point(const DiskGrid& g, const ReferenceDomain& dom,
                                    const Dataset& ds, const std::vector<MatField>& stress_series,
                                    const InnerFpOptions& opt);

struct EnergyRow {
  double time = 0.0;
  double beam_kinetic = 0.0;      // |eta_dot|^2 mass
  double beam_grad_rate = 0.0;    // |d/dt grad eta|^2
  double beam_bending = 0.0;      // |grad lap eta|^2
  double flow_grad = 0.0;         // |grad u|^2
  double total_energy = 0.0;      // kinetic + bending + weighted flow energy
};

std::vector<EnergyRow> energy_monitor(const DiskGrid& g, const ReferenceDomain& dom,
                                      const SolventTrajectory& traj, const PhysParams& params);

/// Working norm of the inner iteration: sup-in-time structure and velocity
/// components plus time-integrated pressure and acceleration parts.
double xhat_distance(const DiskGrid& g, const ReferenceDomain& dom, const SolventTrajectory& a,
                     const SolventTrajectory& b);

}  // namespace polyfsi
