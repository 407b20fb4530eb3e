#pragma once

#include <vector>

#include "polyfsi/disk_grid.hpp"
#include "polyfsi/fene.hpp"
#include "polyfsi/geometry.hpp"

namespace polyfsi {

/// Maxwellian-normalized number density on (disk grid) x (ball grid),
/// x-major layout: value(xid, qid) = f[xid * nq + qid].
struct DistributionState {
  int nx = 0, nq = 0;
  std::vector<double> f;
  std::vector<double> f_dot;
  /// Per x-cell moving-domain measure (cell volume times evolved Jacobian).
  /// Evolved discretely by the transport fluxes so the weighted mass
  /// telescopes exactly; seeded from the map determinant.
  std::vector<double> geom_w;
  double time = 0.0;

  DistributionState() = default;
  DistributionState(const DiskGrid& g, const FeneModel& m, double fill = 0.0)
      : nx(g.size()), nq(m.size()), f(static_cast<size_t>(g.size()) * m.size(), fill),
        f_dot(static_cast<size_t>(g.size()) * m.size(), 0.0) {}

  double& at(int xid, int qid) { return f[static_cast<size_t>(xid) * nq + qid]; }
  double at(int xid, int qid) const { return f[static_cast<size_t>(xid) * nq + qid]; }
  double* slab(int xid) { return f.data() + static_cast<size_t>(xid) * nq; }
  const double* slab(int xid) const { return f.data() + static_cast<size_t>(xid) * nq; }

  void seed_geometry(const DiskGrid& g, const HanzawaMap& map);
};

struct WeightedNorms {
  double l2 = 0.0;      // L2(Omega; L2_M)
  double grad_x = 0.0;  // L2(Omega; L2_M) of the reference-space gradient
  double grad_q = 0.0;  // L2(Omega) of the weighted configuration gradient seminorm
};

WeightedNorms weighted_norms(const DiskGrid& g, const FeneModel& m, const DistributionState& s);

/// L2(Omega; L2_M) norm of an (x,q) array with the reference measure.
double l2_omega_m(const DiskGrid& g, const FeneModel& m, const std::vector<double>& v);

/// Symmetric Kramers stress field: per x-cell the weighted second moment of
/// f against the spring force, assembled from the per-cell moment table.
MatField kramers_stress(const DiskGrid& g, const FeneModel& m, const DistributionState& s);

/// One x-slab version (used by oracles and the coupling right-hand sides).
Mat2 kramers_stress_at(const FeneModel& m, const double* fq);

}  // namespace polyfsi
