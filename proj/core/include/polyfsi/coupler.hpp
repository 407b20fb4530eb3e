#pragma once

#include <functional>
#include <string>
#include <vector>

#include "polyfsi/solvent.hpp"

namespace polyfsi {

/// Snapshot of the fully coupled system; the unit of checkpointing.
struct CoupledState {
  StructureState structure;
  FlowState flow;
  DistributionState dist;
  double t0 = 0.0;
  double window = 0.0;
  int step_index = 0;
  std::vector<double> y_distances;  // iteration ledger of the last window
};

struct NormReport {
  double y_norm = 0.0;
  std::vector<double> x_components;
  double contraction_rho = 0.0;  // defined from the second iteration on
};

struct CouplerOptions {
  int window_steps = 16;
  double dt = 1e-3;
  double tol = 1e-8;
  int max_outer = 30;
  int min_window = 2;
  DragMode mode = DragMode::FullGradient;
  int cutoff_level = 4;
  InnerFpOptions inner;
};

using FpTrajectory = std::vector<DistributionState>;

/// Weaker-topology distance between two solute trajectories over a window:
/// sup-in-time weighted L2 plus time-integrated first-order space and
/// configuration seminorms of the difference.
double y_distance(const DiskGrid& g, const FeneModel& m, const FpTrajectory& a,
                  const FpTrajectory& b, double dt);

struct OuterMapResult {
  FpTrajectory fp;
  SolventTrajectory solvent;
};

/// One application of the solute-solvent composition: solve the
/// interface-flow system under the stress of the given solute iterate, then
/// transport the solute through the resulting flow and geometry.
OuterMapResult outer_map(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m,
                         const Dataset& ds, const FpTrajectory& hbar,
                         const CoupledState& start, const CouplerOptions& opt);

struct CoupledResult {
  FpTrajectory fp;
  SolventTrajectory solvent;
  std::vector<double> y_dists;
  std::vector<double> rho;
  int window_steps_used = 0;
  int halvings = 0;
};

/// Picard iteration of the outer map until the trajectory distance falls
/// under tol; halves the window and restarts when the iteration stalls.
CoupledResult fixed_point_drive(const DiskGrid& g, const ReferenceDomain& dom,
                                const FeneModel& m, const Dataset& ds,
                                const CoupledState& start, const CouplerOptions& opt);

struct StepDiag {
  double time = 0.0;
  double mass = 0.0;
  double min_f = 0.0;
  double max_f = 0.0;
  double supx_l2m = 0.0;
  double div_residual = 0.0;
  double trace_residual = 0.0;
  double beam_energy = 0.0;
  double flow_energy = 0.0;
  double drag_production = 0.0;
  double sup_eta = 0.0;
  double contraction_rho = 0.0;  // of the window this step belongs to
};

struct TerminationReport {
  bool terminated = false;
  std::string criterion;  // one of "sup_eta", "area_factor", "normal_alignment"
  double value = 0.0;
  int step = 0;
};

struct GlobalRunResult {
  TerminationReport termination;
  int steps_completed = 0;
  CoupledState final_state;
  std::vector<StepDiag> diagnostics;
  std::vector<double> window_rhos;
};

using StepObserver = std::function<void(const StepDiag&)>;
using WindowObserver = std::function<void(const CoupledState&)>;

/// Chains local windows end to end, re-basing the frozen displacement after
/// each window; stops at the horizon or when a boundary-degeneracy
/// criterion fires (reported, not thrown).
GlobalRunResult global_extend(const DiskGrid& g, const ReferenceDomain& dom,
                              const FeneModel& m, const Dataset& ds, int horizon_steps,
                              const CouplerOptions& opt, double degeneracy_tol = 1e-3,
                              const StepObserver& observer = nullptr,
                              const CoupledState* resume_from = nullptr,
                              const WindowObserver& window_observer = nullptr);

}  // namespace polyfsi
