#pragma once

#include <memory>

#include "polyfsi/config.hpp"
#include "polyfsi/coupler.hpp"

namespace polyfsi {

/// A runnable scenario: grids, model, dataset and (for the solute-only
/// scenarios) the prescribed flow and boundary motion.
struct Scenario {
  enum class Kind { Coupled, FpOnly, SolventOnly };

  Kind kind = Kind::Coupled;
  std::shared_ptr<DiskGrid> grid;
  std::shared_ptr<ReferenceDomain> dom;
  std::shared_ptr<FeneModel> model;
  Dataset ds;

  // solute-only prescriptions
  std::function<void(double, VecField&, std::vector<Vec2>&)> prescribe_w;
  std::function<StructureState(double)> prescribe_structure;
};

Scenario build_scenario(const RunConfig& cfg);

/// Smooth ramp with vanishing value and slope at zero.
double forcing_ramp(double s);

}  // namespace polyfsi
