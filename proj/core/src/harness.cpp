#include "polyfsi/harness.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace polyfsi {

namespace {

using nlohmann::json;

void dump_state(const std::string& dir, int step, double time, const DiskGrid& g,
                const CoupledState& s) {
  std::vector<double> ux, uy;
  for (const Vec2& v : s.flow.u.v) {
    ux.push_back(v.x);
    uy.push_back(v.y);
  }
  dump_field(dir, "u_x", step, time, ux, {g.nr(), g.nt()});
  dump_field(dir, "u_y", step, time, uy, {g.nr(), g.nt()});
  dump_field(dir, "pressure", step, time, s.flow.p.v, {g.nr(), g.nt()});
  dump_field(dir, "eta", step, time, s.structure.eta,
             {static_cast<int>(s.structure.eta.size())});
  dump_field(dir, "f_hat", step, time, s.dist.f, {s.dist.nx, s.dist.nq});
}

struct FpOnlyResult {
  std::vector<StepDiag> rows;
  double mass0 = 0.0;
};

FpOnlyResult run_fp_only(const RunConfig& cfg, const Scenario& sc, CsvWriter& csv) {
  const DiskGrid& g = *sc.grid;
  const FeneModel& m = *sc.model;
  FpOnlyResult out;

  DistributionState state(g, m);
  state.f = sc.ds.f_hat0;
  StructureState st0 = sc.prescribe_structure ? sc.prescribe_structure(0.0)
                                              : StructureState(g.nt());
  HanzawaMap map_t = build_hanzawa(*sc.dom, g, st0);
  state.seed_geometry(g, map_t);
  out.mass0 = solute_mass(g, m, state, map_t);

  VecField w(g);
  std::vector<Vec2> rim(g.nt(), Vec2{0.0, 0.0});
  FpSolver solver(g, m);
  for (int n = 0; n < cfg.horizon_steps; ++n) {
    const double t1 = (n + 1) * cfg.dt;
    StructureState st1 = sc.prescribe_structure ? sc.prescribe_structure(t1)
                                                : StructureState(g.nt());
    HanzawaMap map_next = build_hanzawa(*sc.dom, g, st1);
    if (sc.prescribe_w) {
      sc.prescribe_w(t1, w, rim);
    } else {
      // follow the domain velocity; the kinematic trace holds exactly
      w = map_t.psi_dot;
      for (int j = 0; j < g.nt(); ++j)
        rim[j] = sc.dom->outward_normal(sc.dom->boundary().y(j)) * map_t.eta_dot[j];
    }
    FpStepInput in;
    in.state = &state;
    in.w_bar = &w;
    in.w_rim = &rim;
    in.map_t = &map_t;
    in.map_next = &map_next;
    in.mode = cfg.mode();
    in.cutoff_level = cfg.cutoff_level;
    in.dt = cfg.dt;
    in.eps = cfg.eps;
    in.kappa = cfg.kappa;
    DistributionState next = solver.step(in);

    StepDiag d;
    d.time = t1;
    d.mass = solute_mass(g, m, next, map_next);
    const Extrema ex = extrema(g, m, next);
    d.min_f = ex.min_f;
    d.max_f = ex.max_f;
    d.supx_l2m = ex.sup_x_l2m;
    const FpEnergyReport er = energy_report(g, m, next, map_next, w, &rim, cfg.mode(),
                                            cfg.cutoff_level, cfg.eps, cfg.kappa);
    d.drag_production = er.production;
    d.sup_eta = CircleBoundary::max_abs(st1.eta);
    csv.write_row(CsvWriter::diag_row(d));
    out.rows.push_back(d);

    state = std::move(next);
    map_t = std::move(map_next);
  }
  return out;
}

std::vector<StepDiag> run_solvent_only(const RunConfig& cfg, const Scenario& sc,
                                       CsvWriter& csv) {
  const DiskGrid& g = *sc.grid;
  std::vector<StepDiag> rows;
  Dataset ds = sc.ds;
  double t0 = 0.0;
  int done = 0;
  std::vector<MatField> zero_stress(cfg.window_steps + 1, MatField(g));
  while (done < cfg.horizon_steps) {
    InnerFpOptions opt;
    opt.window_steps = std::min(cfg.window_steps, cfg.horizon_steps - done);
    opt.window_steps = std::max(opt.window_steps, 2);
    opt.dt = cfg.dt;
    opt.tol = cfg.inner_tol;
    Dataset dsw = ds;
    if (ds.boundary_force) {
      auto f = ds.boundary_force;
      const double sh = t0;
      dsw.boundary_force = [f, sh](double t) { return f(t + sh); };
    }
    if (ds.body_force) {
      auto f = ds.body_force;
      const double sh = t0;
      dsw.body_force = [f, sh](double t, const Vec2& x) { return f(t + sh, x); };
    }
    SolventTrajectory traj = inner_fixed_point(g, *sc.dom, dsw, zero_stress, opt);
    const auto energy = energy_monitor(g, *sc.dom, traj, ds.params);
    for (int n = 1; n <= traj.steps; ++n) {
      StepDiag d;
      d.time = t0 + n * cfg.dt;
      d.div_residual = traj.flow[n].div_residual;
      d.trace_residual = traj.flow[n].trace_residual;
      d.sup_eta = CircleBoundary::max_abs(traj.structure[n].eta);
      d.beam_energy = energy[n].total_energy - 0.0;
      d.flow_energy = energy[n].flow_grad;
      d.contraction_rho = traj.contraction.empty() ? 0.0 : traj.contraction.back();
      csv.write_row(CsvWriter::diag_row(d));
      rows.push_back(d);
    }
    ds.eta0 = traj.structure[traj.steps].eta;
    ds.eta_star = traj.structure[traj.steps].eta_dot;
    ds.u0 = traj.flow[traj.steps].u;
    ds.u0_rim = traj.flow[traj.steps].u_rim;
    t0 += traj.steps * cfg.dt;
    done += traj.steps;
  }
  return rows;
}

}  // namespace

RunReport run(const RunConfig& cfg, const std::optional<std::string>& resume_checkpoint) {
  RunReport rep;
  ensure_directory(cfg.out_dir);
  rep.csv_path = cfg.out_dir + "/diagnostics.csv";
  rep.summary_path = cfg.out_dir + "/summary.json";

  json summary;
  summary["scenario"] = cfg.scenario;
  summary["config_hash"] = cfg.hash();
  summary["seed"] = cfg.seed;

  try {
    const Scenario sc = build_scenario(cfg);
    CsvWriter csv(rep.csv_path, CsvWriter::diag_header());

    if (sc.kind == Scenario::Kind::FpOnly) {
      if (resume_checkpoint) throw ConfigError("resume is supported for coupled scenarios");
      const FpOnlyResult r = run_fp_only(cfg, sc, csv);
      double drift = 0.0, minf = r.rows.empty() ? 0.0 : r.rows.front().min_f;
      for (const auto& d : r.rows) {
        if (r.mass0 != 0.0)
          drift = std::max(drift, std::fabs(d.mass - r.mass0) / std::fabs(r.mass0));
        minf = std::min(minf, d.min_f);
      }
      summary["steps"] = static_cast<int>(r.rows.size());
      summary["mass_initial"] = r.mass0;
      summary["mass_drift_rel"] = drift;
      summary["min_f_overall"] = minf;
    } else if (sc.kind == Scenario::Kind::SolventOnly) {
      if (resume_checkpoint) throw ConfigError("resume is supported for coupled scenarios");
      const auto rows = run_solvent_only(cfg, sc, csv);
      double divr = 0.0, trr = 0.0;
      for (const auto& d : rows) {
        divr = std::max(divr, d.div_residual);
        trr = std::max(trr, d.trace_residual);
      }
      summary["steps"] = static_cast<int>(rows.size());
      summary["max_div_residual"] = divr;
      summary["max_trace_residual"] = trr;
    } else {
      CouplerOptions opt;
      opt.window_steps = cfg.window_steps;
      opt.dt = cfg.dt;
      opt.tol = cfg.fixed_point_tol;
      opt.mode = cfg.mode();
      opt.cutoff_level = cfg.cutoff_level;
      opt.inner.tol = cfg.inner_tol;
      opt.inner.dt = cfg.dt;

      std::optional<CoupledState> resume_state;
      if (resume_checkpoint)
        resume_state = load_checkpoint(*resume_checkpoint, cfg.hash());

      int window_count = 0;
      const DiskGrid& g = *sc.grid;
      WindowObserver wobs = [&](const CoupledState& s) {
        ++window_count;
        if (cfg.checkpoint_every > 0 && window_count % cfg.checkpoint_every == 0) {
          char name[64];
          std::snprintf(name, sizeof name, "/checkpoint_%06d.bin", s.step_index);
          save_checkpoint(cfg.out_dir + name, s, cfg.hash());
        }
        if (cfg.dump_every > 0 && window_count % cfg.dump_every == 0)
          dump_state(cfg.out_dir, s.step_index, s.t0, g, s);
      };
      StepObserver sobs = [&](const StepDiag& d) { csv.write_row(CsvWriter::diag_row(d)); };

      const GlobalRunResult r =
          global_extend(g, *sc.dom, *sc.model, sc.ds, cfg.horizon_steps, opt,
                        cfg.degeneracy_tol, sobs, resume_state ? &*resume_state : nullptr,
                        wobs);

      double mass0 = 0.0, drift = 0.0, minf = 0.0, maxrho = 0.0;
      if (!r.diagnostics.empty()) {
        mass0 = r.diagnostics.front().mass;
        minf = r.diagnostics.front().min_f;
        for (const auto& d : r.diagnostics) {
          if (mass0 != 0.0)
            drift = std::max(drift, std::fabs(d.mass - mass0) / std::fabs(mass0));
          minf = std::min(minf, d.min_f);
        }
      }
      for (double rho : r.window_rhos) maxrho = std::max(maxrho, rho);
      summary["steps"] = r.steps_completed;
      summary["mass_drift_rel"] = drift;
      summary["min_f_overall"] = minf;
      summary["max_window_rho"] = maxrho;
      summary["terminated"] = r.termination.terminated;
      if (r.termination.terminated) {
        summary["termination_criterion"] = r.termination.criterion;
        summary["termination_value"] = r.termination.value;
        summary["termination_step"] = r.termination.step;
      }
      save_checkpoint(cfg.out_dir + "/final_state.bin", r.final_state, cfg.hash());
    }
    summary["exit"] = "ok";
  } catch (const SolverError& e) {
    summary["exit"] = "error";
    summary["error"] = e.what();
    rep.exit_code = 1;
    rep.error = e.what();
  }
  write_summary_json(rep.summary_path, summary.dump(2));
  return rep;
}

DatasetValidation validate_dataset(const RunConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const DiskGrid& g = *sc.grid;
  const ReferenceDomain& dom = *sc.dom;
  const FeneModel& m = *sc.model;
  const Dataset& ds = sc.ds;
  DatasetValidation v;

  v.sup_eta0 = CircleBoundary::max_abs(ds.eta0);
  v.eta0_admissible = v.sup_eta0 < dom.tube_radius();

  for (int j = 0; j < g.nt(); ++j) {
    const Vec2 target = dom.outward_normal(dom.boundary().y(j)) * ds.eta_star[j];
    v.trace_residual = std::max(v.trace_residual, (ds.u0_rim[j] - target).norm());
  }

  StructureState s0(g.nt());
  s0.eta = ds.eta0;
  s0.eta_dot = ds.eta_star;
  const HanzawaMap map0 = build_hanzawa(dom, g, s0);

  // divergence of the initial velocity in the frozen geometry
  {
    const MatField Ju = jacobian(g, ds.u0, false, &ds.u0_rim);
    double acc = 0.0;
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const int c = g.idx(i, j);
        const double d = (map0.tensor_b[c] * Ju[c]).trace();
        acc += g.cell_volume(i) * d * d;
      }
    v.divergence_residual = std::sqrt(acc);
  }

  // finiteness of the initial time-derivative of the distribution
  {
    DistributionState f0(g, m);
    f0.f = ds.f_hat0;
    f0.seed_geometry(g, map0);
    FpSolver solver(g, m);
    FpStepInput in;
    const double dt_probe = 1e-7;
    in.state = &f0;
    in.w_bar = &ds.u0;
    in.w_rim = &ds.u0_rim;
    in.map_t = &map0;
    in.map_next = &map0;
    in.mode = cfg.mode();
    in.cutoff_level = cfg.cutoff_level;
    in.dt = dt_probe;
    in.eps = cfg.eps;
    in.kappa = cfg.kappa;
    const DistributionState probe = solver.step(in);
    v.ftilde0_norm = l2_omega_m(g, m, probe.f_dot);
    v.ftilde0_finite = std::isfinite(v.ftilde0_norm);
  }

  const CompatibilityReport rep = check_compatibility(g, dom, map0, ds, m);
  v.compatibility_sup = rep.sup_residual;
  v.compatibility_l2 = rep.l2_residual;

  v.pass = v.eta0_admissible && v.ftilde0_finite && v.trace_residual < 1e-6;
  return v;
}

std::string validation_to_json(const DatasetValidation& v) {
  json j;
  j["pass"] = v.pass;
  j["trace_residual"] = v.trace_residual;
  j["divergence_residual"] = v.divergence_residual;
  j["sup_eta0"] = v.sup_eta0;
  j["eta0_admissible"] = v.eta0_admissible;
  j["ftilde0_norm"] = v.ftilde0_norm;
  j["ftilde0_finite"] = v.ftilde0_finite;
  j["compatibility_sup"] = v.compatibility_sup;
  j["compatibility_l2"] = v.compatibility_l2;
  return j.dump(2);
}

}  // namespace polyfsi
