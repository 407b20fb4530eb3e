#include "polyfsi/coupler.hpp"

#include <algorithm>
#include <cmath>

namespace polyfsi {

namespace {

// Seminorm pieces of one snapshot difference.
struct DiffNorms {
  double l2 = 0.0, gx = 0.0, gq = 0.0;
};

DiffNorms diff_norms(const DiskGrid& g, const FeneModel& m, const DistributionState& a,
                     const DistributionState& b) {
  if (a.nx != b.nx || a.nq != b.nq) throw ShapeMismatch("solute trajectory shapes");
  DistributionState d(a);
  for (size_t k = 0; k < d.f.size(); ++k) d.f[k] = a.f[k] - b.f[k];
  const WeightedNorms n = weighted_norms(g, m, d);
  return {n.l2, n.grad_x, n.grad_q};
}

CoupledState initial_state(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m,
                           const Dataset& ds) {
  CoupledState cs;
  cs.structure = StructureState(dom.boundary().size());
  cs.structure.eta = ds.eta0;
  cs.structure.eta_dot = ds.eta_star;
  cs.flow = FlowState(g, dom.boundary().size());
  cs.flow.u = ds.u0;
  cs.flow.u_rim = ds.u0_rim;
  cs.dist = DistributionState(g, m);
  cs.dist.f = ds.f_hat0;
  const HanzawaMap map0 = build_hanzawa(dom, g, cs.structure);
  cs.dist.seed_geometry(g, map0);
  return cs;
}

Dataset rebase_dataset(const Dataset& ds, const CoupledState& s) {
  Dataset d = ds;
  d.eta0 = s.structure.eta;
  d.eta_star = s.structure.eta_dot;
  d.u0 = s.flow.u;
  d.u0_rim = s.flow.u_rim;
  d.f_hat0 = s.dist.f;
  return d;
}

// Time-shifted forcing wrappers so each window sees window-local time.
Dataset shift_forcing(const Dataset& ds, double t0) {
  Dataset d = ds;
  if (ds.body_force) {
    auto f = ds.body_force;
    d.body_force = [f, t0](double t, const Vec2& x) { return f(t + t0, x); };
  }
  if (ds.boundary_force) {
    auto gf = ds.boundary_force;
    d.boundary_force = [gf, t0](double t) { return gf(t + t0); };
  }
  return d;
}

}  // namespace

double y_distance(const DiskGrid& g, const FeneModel& m, const FpTrajectory& a,
                  const FpTrajectory& b, double dt) {
  if (a.size() != b.size()) throw ShapeMismatch("solute trajectory lengths");
  double sup_l2 = 0.0, int_gx = 0.0, int_gq = 0.0;
  std::vector<DiffNorms> rows(a.size());
  for (size_t n = 0; n < a.size(); ++n) rows[n] = diff_norms(g, m, a[n], b[n]);
  for (size_t n = 0; n < rows.size(); ++n) {
    sup_l2 = std::max(sup_l2, rows[n].l2);
    // trapezoid in time for the integrated seminorms
    const double wt = (n == 0 || n + 1 == rows.size()) ? 0.5 * dt : dt;
    int_gx += wt * (rows[n].l2 * rows[n].l2 + rows[n].gx * rows[n].gx);
    int_gq += wt * rows[n].gq * rows[n].gq;
  }
  return sup_l2 + std::sqrt(int_gx) + std::sqrt(int_gq);
}

OuterMapResult outer_map(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m,
                         const Dataset& ds, const FpTrajectory& hbar,
                         const CoupledState& start, const CouplerOptions& opt) {
  const int steps = static_cast<int>(hbar.size()) - 1;
  if (steps < 1) throw ConfigError("outer map needs at least one step");

  // T2: interface-flow solve under the iterate's stress
  std::vector<MatField> stress_series(steps + 1);
  for (int n = 0; n <= steps; ++n) stress_series[n] = kramers_stress(g, m, hbar[n]);
  InnerFpOptions iopt = opt.inner;
  iopt.window_steps = steps;
  iopt.dt = opt.dt;
  const SolventTrajectory solvent = inner_fixed_point(g, dom, ds, stress_series, iopt);
  if (solvent.steps != steps)
    throw NoContraction("inner window shrank under the outer window");

  // T1: solute transport along the solved trajectory
  FpTrajectory fp(steps + 1, start.dist);
  fp[0].time = start.t0;
  FpSolver fps(g, m);
  std::vector<HanzawaMap> maps(steps + 1);
  for (int n = 0; n <= steps; ++n) maps[n] = build_hanzawa(dom, g, solvent.structure[n]);
  for (int n = 0; n < steps; ++n) {
    FpStepInput in;
    in.state = &fp[n];
    in.w_bar = &solvent.flow[n + 1].u;
    in.w_rim = &solvent.flow[n + 1].u_rim;
    in.map_t = &maps[n];
    in.map_next = &maps[n + 1];
    in.mode = opt.mode;
    in.cutoff_level = opt.cutoff_level;
    in.dt = opt.dt;
    in.eps = ds.params.eps;
    in.kappa = ds.params.kappa;
    fp[n + 1] = fps.step(in);
  }
  return {std::move(fp), solvent};
}

CoupledResult fixed_point_drive(const DiskGrid& g, const ReferenceDomain& dom,
                                const FeneModel& m, const Dataset& ds,
                                const CoupledState& start, const CouplerOptions& opt) {
  int steps = opt.window_steps;
  int halvings = 0;
  while (true) {
    FpTrajectory hbar(steps + 1, start.dist);
    CoupledResult result;
    bool converged = false, stalled = false;
    std::vector<double> dists, rhos;
    OuterMapResult last;
    for (int it = 0; it < opt.max_outer; ++it) {
      OuterMapResult next;
      try {
        next = outer_map(g, dom, m, ds, hbar, start, opt);
      } catch (const SolverError&) {
        stalled = true;
      }
      if (stalled) break;
      const double d = y_distance(g, m, next.fp, hbar, opt.dt);
      dists.push_back(d);
      if (dists.size() >= 2 && dists[dists.size() - 2] > 0.0)
        rhos.push_back(d / dists[dists.size() - 2]);
      hbar = next.fp;
      last = std::move(next);
      if (d <= opt.tol) {
        converged = true;
        break;
      }
      if (!rhos.empty() && rhos.back() >= 1.0) {
        stalled = true;
        break;
      }
    }
    if (converged) {
      result.fp = std::move(last.fp);
      result.solvent = std::move(last.solvent);
      result.y_dists = dists;
      result.rho = rhos;
      result.window_steps_used = steps;
      result.halvings = halvings;
      return result;
    }
    steps /= 2;
    ++halvings;
    if (steps < opt.min_window)
      throw NoContraction("outer window underflow");
  }
}

GlobalRunResult global_extend(const DiskGrid& g, const ReferenceDomain& dom,
                              const FeneModel& m, const Dataset& ds, int horizon_steps,
                              const CouplerOptions& opt, double degeneracy_tol,
                              const StepObserver& observer,
                              const CoupledState* resume_from,
                              const WindowObserver& window_observer) {
  GlobalRunResult out;
  CoupledState cur = resume_from ? *resume_from : initial_state(g, dom, m, ds);
  out.steps_completed = cur.step_index;

  while (out.steps_completed < horizon_steps) {
    const int remaining = horizon_steps - out.steps_completed;
    CouplerOptions wopt = opt;
    wopt.window_steps = std::min(opt.window_steps, std::max(opt.min_window, remaining));

    const Dataset dsw = shift_forcing(rebase_dataset(ds, cur), cur.t0);
    CoupledResult win = fixed_point_drive(g, dom, m, dsw, cur, wopt);
    const double rho_last = win.rho.empty() ? 0.0 : win.rho.back();
    out.window_rhos.push_back(rho_last);

    // walk the window's steps, emitting diagnostics and watching degeneracy
    for (int n = 1; n <= win.window_steps_used; ++n) {
      const StructureState& st = win.solvent.structure[n];
      const HanzawaMap map = build_hanzawa(dom, g, st);
      StepDiag d;
      d.time = cur.t0 + n * opt.dt;
      d.mass = solute_mass(g, m, win.fp[n], map);
      const Extrema ex = extrema(g, m, win.fp[n]);
      d.min_f = ex.min_f;
      d.max_f = ex.max_f;
      d.supx_l2m = ex.sup_x_l2m;
      d.div_residual = win.solvent.flow[n].div_residual;
      d.trace_residual = win.solvent.flow[n].trace_residual;
      const FpEnergyReport er =
          energy_report(g, m, win.fp[n], map, win.solvent.flow[n].u,
                        &win.solvent.flow[n].u_rim, opt.mode, opt.cutoff_level,
                        ds.params.eps, ds.params.kappa);
      d.drag_production = er.production;
      d.sup_eta = CircleBoundary::max_abs(st.eta);
      d.contraction_rho = rho_last;
      const CircleBoundary& om = dom.boundary();
      const auto d2 = om.second_difference(st.eta);
      const double bk = om.l2_norm(st.eta_dot), bb = om.l2_norm(d2);
      d.beam_energy = 0.5 * ds.params.rho_s * bk * bk +
                      0.5 * ds.params.alpha_beam * bb * bb;
      double ke = 0.0;
      for (int i = 0; i < g.nr(); ++i)
        for (int j = 0; j < g.nt(); ++j) {
          const int c = g.idx(i, j);
          ke += g.cell_volume(i) * map.jac[c] * win.solvent.flow[n].u[c].dot(
              win.solvent.flow[n].u[c]);
        }
      d.flow_energy = 0.5 * ds.params.rho_f * ke;
      out.diagnostics.push_back(d);
      if (observer) observer(d);
      ++out.steps_completed;

      // termination taxonomy: exactly one criterion reported; the
      // displacement cap is the tube radius limited by map invertibility
      const double sup_eta = d.sup_eta;
      const double eta_cap = std::min(dom.tube_radius(), dom.displacement_cap());
      if (sup_eta >= eta_cap - degeneracy_tol) {
        out.termination = {true, "sup_eta", sup_eta, out.steps_completed};
      } else {
        const DeformedNormal dn = deformed_normal(dom, st.eta, 1e-14);
        double min_area = dn.area_factor[0], min_align = dn.n_dot_n[0];
        for (size_t j = 1; j < dn.n.size(); ++j) {
          min_area = std::min(min_area, dn.area_factor[j]);
          min_align = std::min(min_align, dn.n_dot_n[j]);
        }
        if (min_area <= degeneracy_tol)
          out.termination = {true, "area_factor", min_area, out.steps_completed};
        else if (min_align <= degeneracy_tol)
          out.termination = {true, "normal_alignment", min_align, out.steps_completed};
      }
      if (out.termination.terminated) {
        cur.structure = st;
        cur.flow = win.solvent.flow[n];
        cur.dist = win.fp[n];
        cur.t0 += n * opt.dt;
        cur.step_index = out.steps_completed;
        cur.y_distances = win.y_dists;
        out.final_state = cur;
        return out;
      }
    }
    // re-base on the terminal window state
    const int W = win.window_steps_used;
    cur.structure = win.solvent.structure[W];
    cur.flow = win.solvent.flow[W];
    cur.dist = win.fp[W];
    cur.t0 += W * opt.dt;
    cur.step_index = out.steps_completed;
    cur.y_distances = win.y_dists;
    if (window_observer) window_observer(cur);
  }
  out.final_state = cur;
  return out;
}

}  // namespace polyfsi
