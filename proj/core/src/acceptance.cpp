#include "polyfsi/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "polyfsi/harness.hpp"

namespace polyfsi {

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// shared rigs and scenario pieces (desk scale: disk 24x48, ball 16x24)
// ---------------------------------------------------------------------------

struct DeskRig {
  DiskGrid g{24, 48, 1.0};
  ReferenceDomain dom{1.0, 48, 0.5, 0.15, 2.0};
  FeneModel model{4.0, 16, 24};
};

double smooth_ramp(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

Dataset relaxation_dataset(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m,
                           double g_amp, double f0_pert) {
  Dataset ds = Dataset::zero(g, dom, m);
  ds.f_hat0.assign(ds.f_hat0.size(), 1.0);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const double r = g.rc(i) / g.radius();
      const double bump = f0_pert * (1.0 - r * r) * r * std::cos(g.theta(j));
      for (int q = 0; q < m.size(); ++q)
        ds.f_hat0[static_cast<size_t>(g.idx(i, j)) * m.size() + q] = 1.0 + bump;
    }
  const int ny = g.nt();
  ds.boundary_force = [g_amp, ny, &dom](double t) {
    std::vector<double> out(ny);
    const double a = g_amp * smooth_ramp(t / 5e-3);
    for (int j = 0; j < ny; ++j) out[j] = a * std::cos(2.0 * dom.boundary().y(j));
    return out;
  };
  return ds;
}

// solenoidal swirl with zero interface trace
VecField swirl(const DiskGrid& g, double amp, std::vector<Vec2>* rim) {
  VecField w(g);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const double rho = g.rc(i) / g.radius();
      const double q = 1.0 - rho * rho;
      const double psi_rho = q * q * 2.0 * rho - 4.0 * rho * q * rho * rho;
      w[g.idx(i, j)] = g.unit_t(g.theta(j)) * (-amp * psi_rho);
    }
  if (rim) rim->assign(g.nt(), Vec2{0.0, 0.0});
  return w;
}

struct FpOnlyRun {
  double min_f = 1e300;
  double sup0 = 0.0, sup_max = 0.0;
  double mass0 = 0.0, mass_drift = 0.0;
};

FpOnlyRun run_fp_only(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m,
                      DragMode mode, double flow_amp, int steps,
                      const std::function<double(int, int, int)>& f0) {
  const StructureState s0(g.nt());
  const HanzawaMap map = build_hanzawa(dom, g, s0);
  std::vector<Vec2> rim;
  const VecField w = swirl(g, flow_amp, &rim);
  DistributionState f(g, m);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      for (int q = 0; q < m.size(); ++q) f.at(g.idx(i, j), q) = f0(i, j, q);
  f.seed_geometry(g, map);
  FpOnlyRun out;
  out.mass0 = solute_mass(g, m, f, map);
  out.sup0 = extrema(g, m, f).sup_x_l2m;
  FpSolver solver(g, m);
  FpStepInput in;
  in.w_bar = &w;
  in.w_rim = &rim;
  in.map_t = &map;
  in.map_next = &map;
  in.mode = mode;
  in.cutoff_level = 4;
  in.dt = 1e-3;
  for (int n = 0; n < steps; ++n) {
    in.state = &f;
    DistributionState next = solver.step(in);
    const Extrema ex = extrema(g, m, next);
    out.min_f = std::min(out.min_f, ex.min_f);
    out.sup_max = std::max(out.sup_max, ex.sup_x_l2m);
    const double mass = solute_mass(g, m, next, map);
    out.mass_drift = std::max(out.mass_drift, std::fabs(mass - out.mass0) /
                                                  std::fabs(out.mass0));
    f = std::move(next);
  }
  return out;
}

// independent dense-angle determinant oracle (straight-line re-derivation)
Mat2 oracle_map_gradient(const DiskGrid& g, const VecField& psi, const std::vector<Vec2>& rim,
                         int i, int j) {
  const double dr = g.dr();
  Vec2 dpdr;
  if (i == 0) {
    dpdr = (psi[g.idx(1, j)] - psi[g.idx(0, g.jop(j))]) / (2.0 * dr);
  } else if (i == g.nr() - 1) {
    const Vec2 fb = rim[j];
    dpdr = (fb - psi[g.idx(i - 1, j)] + (fb - psi[g.idx(i, j)]) * 3.0) / (3.0 * dr);
  } else {
    dpdr = (psi[g.idx(i + 1, j)] - psi[g.idx(i - 1, j)]) / (2.0 * dr);
  }
  Vec2 dpdt{0.0, 0.0};
  const int n = g.nt();
  for (int k = 0; k < n; ++k) {
    if (k == j) continue;
    const int d = j - k;
    const double sign = (d % 2 == 0) ? 1.0 : -1.0;
    const double coef = 0.5 * sign / std::tan(0.5 * d * (2.0 * kPi / n));
    dpdt += psi[g.idx(i, k)] * coef;
  }
  dpdt = dpdt / g.rc(i);
  const double th = g.theta(j);
  const double cx = std::cos(th), sx = std::sin(th);
  Mat2 F;
  F(0, 0) = dpdr.x * cx + dpdt.x * (-sx);
  F(0, 1) = dpdr.x * sx + dpdt.x * cx;
  F(1, 0) = dpdr.y * cx + dpdt.y * (-sx);
  F(1, 1) = dpdr.y * sx + dpdt.y * cx;
  return F;
}

StructureState wavy(int n, double a1, double a2) {
  StructureState s(n);
  for (int j = 0; j < n; ++j) {
    const double y = 2.0 * kPi * j / n;
    s.eta[j] = a1 * std::cos(y) + a2 * std::sin(2.0 * y);
  }
  return s;
}

// ---------------------------------------------------------------------------
// manufactured solutions
// ---------------------------------------------------------------------------

// Solute: f = 1 + e^{-t} phi(x) (1 + qx qy / b) with phi = (3 - rho^2) x1,
// co-rotational drag from the compact swirl, zero-flux wall respected.
struct FpManufactured {
  double b;
  double swirl_amp = 0.5;

  double phi(const Vec2& x) const { return (3.0 - x.dot(x)) * x.x; }
  Vec2 grad_phi(const Vec2& x) const {
    return {3.0 - x.dot(x) - 2.0 * x.x * x.x, -2.0 * x.x * x.y};
  }
  double lap_phi(const Vec2& x) const { return -8.0 * x.x; }
  Vec2 flow(const Vec2& x) const {
    const double q = 1.0 - x.dot(x);
    return Vec2{-x.y, x.x} * (4.0 * swirl_amp * q);
  }
  double skew(const Vec2& x) const { return 4.0 * swirl_amp * (1.0 - 2.0 * x.dot(x)); }

  double value(double t, const Vec2& x, const Vec2& q) const {
    return 1.0 + std::exp(-t) * phi(x) * (1.0 + q.x * q.y / b);
  }
  double source(double t, const Vec2& x, const Vec2& q, double eps, double kappa) const {
    const double e = std::exp(-t);
    const double psi = q.x * q.y / b;
    const double up = 1.0 / (1.0 - q.dot(q) / b);
    const double om = skew(x);
    double s = -e * phi(x) * (1.0 + psi);                       // time derivative
    s += e * flow(x).dot(grad_phi(x)) * (1.0 + psi);            // transport
    s += e * phi(x) * om * (q.x * q.x - q.y * q.y) / b;         // rotational drag
    s -= eps * e * lap_phi(x) * (1.0 + psi);                    // space diffusion
    s += kappa * e * phi(x) * 2.0 * up * q.x * q.y / b;         // ball diffusion
    return s;
  }
};

struct FpConvergencePoint {
  double h;
  double err;
};

FpConvergencePoint fp_manufactured_error(int nr, int nqr, double dt, double T) {
  DiskGrid g(nr, 2 * nr, 1.0);
  ReferenceDomain dom(1.0, 2 * nr, 0.5, 0.15, 2.0);
  FeneModel m(4.0, nqr, 3 * nqr / 2);
  FpManufactured mf{m.b()};

  const StructureState s0(g.nt());
  const HanzawaMap map = build_hanzawa(dom, g, s0);
  VecField w(g);
  std::vector<Vec2> rim(g.nt(), Vec2{0.0, 0.0});
  for (int c = 0; c < g.size(); ++c) w[c] = mf.flow(g.center(c / g.nt(), c % g.nt()));

  DistributionState f(g, m);
  for (int c = 0; c < g.size(); ++c) {
    const Vec2 x = g.center(c / g.nt(), c % g.nt());
    for (int mm = 0; mm < m.nqr(); ++mm)
      for (int l = 0; l < m.nqc(); ++l)
        f.at(c, m.idx(mm, l)) = mf.value(0.0, x, m.node(mm, l));
  }
  f.seed_geometry(g, map);

  FpSolver solver(g, m);
  std::vector<double> src(f.f.size());
  const int steps = static_cast<int>(std::round(T / dt));
  for (int n = 0; n < steps; ++n) {
    const double t = n * dt;
    for (int c = 0; c < g.size(); ++c) {
      const Vec2 x = g.center(c / g.nt(), c % g.nt());
      for (int mm = 0; mm < m.nqr(); ++mm)
        for (int l = 0; l < m.nqc(); ++l)
          src[static_cast<size_t>(c) * m.size() + m.idx(mm, l)] =
              mf.source(t, x, m.node(mm, l), 1.0, 1.0);
    }
    FpStepInput in;
    in.state = &f;
    in.w_bar = &w;
    in.w_rim = &rim;
    in.map_t = &map;
    in.map_next = &map;
    in.mode = DragMode::CoRotational;
    in.dt = dt;
    in.source = &src;
    f = solver.step(in);
  }
  std::vector<double> diff(f.f.size());
  for (int c = 0; c < g.size(); ++c) {
    const Vec2 x = g.center(c / g.nt(), c % g.nt());
    for (int mm = 0; mm < m.nqr(); ++mm)
      for (int l = 0; l < m.nqc(); ++l)
        diff[static_cast<size_t>(c) * m.size() + m.idx(mm, l)] =
            f.at(c, m.idx(mm, l)) - mf.value(steps * dt, x, m.node(mm, l));
  }
  return {1.0 / nr, l2_omega_m(g, m, diff)};
}

// Interface-flow manufactured solution on the flat base geometry:
// eta = a t^2 cos(2y), velocity the matching solenoidal extension.
struct SolventManufactured {
  double a = 0.4;

  double A(double t) const { return a * t * t; }
  double Ap(double t) const { return 2.0 * a * t; }
  double App(double) const { return 2.0 * a; }

  double eta(double t, double y) const { return A(t) * std::cos(2.0 * y); }
  double eta_dot(double t, double y) const { return Ap(t) * std::cos(2.0 * y); }

  Vec2 velocity(double t, double r, double th) const {
    const double ur = Ap(t) * r * (2.0 - r * r) * std::cos(2.0 * th);
    const double ut = -2.0 * Ap(t) * r * (1.0 - r * r) * std::sin(2.0 * th);
    const Vec2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
    return er * ur + et * ut;
  }
  Vec2 dt_velocity(double t, double r, double th) const {
    const double ur = App(t) * r * (2.0 - r * r) * std::cos(2.0 * th);
    const double ut = -2.0 * App(t) * r * (1.0 - r * r) * std::sin(2.0 * th);
    const Vec2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
    return er * ur + et * ut;
  }
  Vec2 lap_velocity(double t, double r, double th) const {
    // curl of lap(psi) with lap(psi) = -6 A' r^2 sin(2 th)
    const double ur = -12.0 * Ap(t) * r * std::cos(2.0 * th);
    const double ut = 12.0 * Ap(t) * r * std::sin(2.0 * th);
    const Vec2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
    return er * ur + et * ut;
  }
  double boundary_force(double t, double y, const PhysParams& p) const {
    return (p.rho_s * App(t) + 4.0 * p.gamma * Ap(t) + 16.0 * p.alpha_beam * A(t) -
            p.mu * Ap(t)) * std::cos(2.0 * y);
  }
};

struct SolventErrors {
  double h;
  double err_u;
  double err_eta;
};

SolventErrors solvent_manufactured_error(int nr, double dt, double T) {
  DiskGrid g(nr, 2 * nr, 1.0);
  ReferenceDomain dom(1.0, 2 * nr, 0.5, 0.15, 2.0);
  SolventManufactured mf;
  const PhysParams params;

  const StructureState s0(g.nt());
  const HanzawaMap base = build_hanzawa(dom, g, s0);
  LinearSolventSolver solver(g, dom, base, dt, params);

  PerturbationTerms terms;
  terms.h = ScalarField(g);
  terms.big_h = MatField(g);
  terms.h_vec = VecField(g);
  MatField stress(g);
  StructureState st(g.nt());
  FlowState fl(g, g.nt());
  const int steps = static_cast<int>(std::round(T / dt));
  for (int n = 0; n < steps; ++n) {
    const double t1 = (n + 1) * dt;
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const int c = g.idx(i, j);
        terms.h_vec[c] = mf.dt_velocity(t1, g.rc(i), g.theta(j)) * params.rho_f -
                         mf.lap_velocity(t1, g.rc(i), g.theta(j)) * params.mu;
      }
    std::vector<double> gf(g.nt());
    for (int j = 0; j < g.nt(); ++j)
      gf[j] = mf.boundary_force(t1, dom.boundary().y(j), params);
    auto res = solver.step(st, fl, terms, stress, gf);
    st = res.structure;
    fl = res.flow;
  }
  double num = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const Vec2 d = fl.u[g.idx(i, j)] - mf.velocity(steps * dt, g.rc(i), g.theta(j));
      num += g.cell_volume(i) * d.dot(d);
    }
  double eeta = 0.0;
  for (int j = 0; j < g.nt(); ++j)
    eeta = std::max(eeta,
                    std::fabs(st.eta[j] - mf.eta(steps * dt, dom.boundary().y(j))));
  return {1.0 / nr, std::sqrt(num), eeta};
}

double fit_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const std::string& scratch_dir) {
  std::vector<CriterionResult> results;
  std::filesystem::create_directories(scratch_dir);

  auto run_criterion = [&](int id, const std::string& name,
                           const std::function<std::pair<bool, std::string>()>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    const auto t0 = Clock::now();
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    results.push_back(r);
  };

  // Shared coupled co-rotational run at the desk scale (criteria 1, 2, 7).
  DeskRig desk;
  GlobalRunResult coupled;
  bool coupled_ok = true;
  std::string coupled_err;
  {
    try {
      const Dataset ds = relaxation_dataset(desk.g, desk.dom, desk.model, 0.05, 0.3);
      CouplerOptions opt;
      opt.window_steps = 16;
      opt.dt = 1e-3;
      opt.mode = DragMode::CoRotational;
      coupled = global_extend(desk.g, desk.dom, desk.model, ds, 500, opt);
    } catch (const std::exception& e) {
      coupled_ok = false;
      coupled_err = e.what();
    }
  }

  run_criterion(1, "mass conservation (coupled co-rotational, 500 steps)", [&] {
    if (!coupled_ok) return std::make_pair(false, coupled_err);
    const double m0 = coupled.diagnostics.front().mass;
    double drift = 0.0;
    for (const auto& d : coupled.diagnostics)
      drift = std::max(drift, std::fabs(d.mass - m0) / std::fabs(m0));
    return std::make_pair(drift <= 1e-10 && coupled.steps_completed == 500,
                          "max |m - m0|/m0 = " + fmt(drift));
  });

  run_criterion(2, "nonnegativity in both drag modes", [&] {
    auto f0 = [&](int i, int j, int q) {
      const Vec2 qv = desk.model.node(q / desk.model.nqc(), q % desk.model.nqc());
      const double v = 0.5 + 0.5 * std::sin(3.0 * qv.x) - 0.2 * qv.y +
                       0.1 * std::cos(desk.g.theta(j)) * desk.g.rc(i);
      return std::max(0.0, v);
    };
    const FpOnlyRun full =
        run_fp_only(desk.g, desk.dom, desk.model, DragMode::FullGradient, 1.0, 300, f0);
    const FpOnlyRun coro =
        run_fp_only(desk.g, desk.dom, desk.model, DragMode::CoRotational, 1.0, 300, f0);
    double coupled_min = 0.0;
    if (coupled_ok)
      for (const auto& d : coupled.diagnostics) coupled_min = std::min(coupled_min, d.min_f);
    const bool ok = full.min_f >= -1e-12 && coro.min_f >= -1e-12 && coupled_min >= -1e-12;
    return std::make_pair(ok, "min f: full=" + fmt(full.min_f) + " coro=" + fmt(coro.min_f) +
                                  " coupled=" + fmt(coupled_min));
  });

  run_criterion(3, "co-rotational maximum principle (500 steps)", [&] {
    auto f0 = [&](int i, int j, int q) {
      (void)q;
      return 1.0 + 0.5 * std::cos(desk.g.theta(j)) * desk.g.rc(i);
    };
    const FpOnlyRun r =
        run_fp_only(desk.g, desk.dom, desk.model, DragMode::CoRotational, 2.0, 500, f0);
    const bool ok = r.sup_max <= r.sup0 * (1.0 + 1e-8);
    return std::make_pair(ok, "sup growth = " + fmt(r.sup_max / r.sup0 - 1.0));
  });

  run_criterion(4, "skew-symmetry neutrality of the drag", [&] {
    const StructureState s0(desk.g.nt());
    const HanzawaMap map = build_hanzawa(desk.dom, desk.g, s0);
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> dist(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      VecField w(desk.g);
      for (int c = 0; c < desk.g.size(); ++c) {
        const Vec2 x = desk.g.center(c / desk.g.nt(), c % desk.g.nt());
        w[c] = Vec2{dist(rng) * x.y + dist(rng) * x.x * x.y,
                    dist(rng) * x.x + dist(rng) * x.y * x.y};
      }
      DistributionState f(desk.g, desk.model);
      for (auto& v : f.f) v = 1.0 + 0.3 * dist(rng);
      f.seed_geometry(desk.g, map);
      const FpEnergyReport er = energy_report(desk.g, desk.model, f, map, w, nullptr,
                                              DragMode::CoRotational, 4);
      worst = std::max(worst, std::fabs(er.production));
    }
    return std::make_pair(worst <= 1e-12, "max |production| = " + fmt(worst));
  });

  run_criterion(5, "interface transform consistency", [&] {
    std::ostringstream detail;
    // round trip
    const StructureState s = wavy(desk.g.nt(), 0.08, 0.04);
    const HanzawaMap m = build_hanzawa(desk.dom, desk.g, s);
    double rt = 0.0;
    for (int i = 0; i < desk.g.nr(); ++i)
      for (int j = 0; j < desk.g.nt(); ++j) {
        const Vec2 x = desk.g.center(i, j);
        rt = std::max(rt, (m.inverse(m.forward_at(x)) - x).norm());
      }
    detail << "roundtrip=" << fmt(rt);
    bool ok = rt <= 1e-10;
    // tensors against the independent oracle
    double tensor_err = 0.0;
    for (int i = 1; i < desk.g.nr() - 1; i += 2)
      for (int j = 0; j < desk.g.nt(); j += 3) {
        const Mat2 F = oracle_map_gradient(desk.g, m.forward, m.forward_rim, i, j);
        const double J = F.det();
        const Mat2 G = F.inverse();
        const Mat2 B = G * J;
        const Mat2 A = B * G.transpose();
        const int c = desk.g.idx(i, j);
        tensor_err = std::max(tensor_err, std::fabs(m.jac[c] - J));
        tensor_err = std::max(tensor_err, (m.tensor_a[c] - A).frobenius());
        tensor_err = std::max(tensor_err, (m.tensor_b[c] - B).frobenius());
      }
    detail << " tensors=" << fmt(tensor_err);
    ok = ok && tensor_err <= 1e-8;
    // divergence-free columns under refinement
    std::vector<double> resid;
    for (int n : {24, 48, 96}) {
      DiskGrid gg(n, 2 * n, 1.0);
      ReferenceDomain dd(1.0, 2 * n, 0.5, 0.15, 2.0);
      const StructureState sw = wavy(2 * n, 0.08, 0.04);
      const HanzawaMap mm = build_hanzawa(dd, gg, sw);
      double worst = 0.0;
      for (int k = 0; k < 2; ++k) {
        ScalarField bx(gg), by(gg);
        std::vector<double> rx(2 * n), ry(2 * n);
        for (int id = 0; id < gg.size(); ++id) {
          bx[id] = mm.tensor_b[id](0, k);
          by[id] = mm.tensor_b[id](1, k);
        }
        for (int j = 0; j < 2 * n; ++j) {
          rx[j] = mm.tensor_b_rim[j](0, k);
          ry[j] = mm.tensor_b_rim[j](1, k);
        }
        const VecField gx = gradient(gg, bx, false, &rx);
        const VecField gy = gradient(gg, by, false, &ry);
        for (int id = 0; id < gg.size(); ++id)
          worst = std::max(worst, std::fabs(gx[id].x + gy[id].y));
      }
      resid.push_back(worst);
    }
    const double o1 = std::log2(resid[0] / resid[1]);
    const double o2 = std::log2(resid[1] / resid[2]);
    detail << " piola orders=" << fmt(o1) << "," << fmt(o2);
    ok = ok && o1 >= 1.8 && o2 >= 1.8;
    return std::make_pair(ok, detail.str());
  });

  run_criterion(6, "transform difference ratios are uniformly bounded", [&] {
    // fixed per-mode amplitudes with random phases: every draw carries the
    // same spectral mass, so the recorded bound concentrates across seeds
    auto constant_for_seed = [&](uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      double cmax = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        StructureState a(desk.g.nt()), b(desk.g.nt());
        for (int mode = 0; mode <= 3; ++mode) {
          const double amp = 0.02 / (1.0 + mode);
          const double pa = phase(rng), pb = phase(rng);
          for (int j = 0; j < desk.g.nt(); ++j) {
            const double y = desk.dom.boundary().y(j);
            a.eta[j] += amp * std::cos(mode * y + pa);
            b.eta[j] += amp * std::cos(mode * y + pb);
          }
        }
        const LipschitzReport r = verify_lipschitz(desk.dom, desk.g, a, b, 1);
        cmax = std::max(cmax, std::max(r.ratio[0], r.ratio[1]));
      }
      return cmax;
    };
    const double c1 = constant_for_seed(11), c2 = constant_for_seed(12);
    const bool ok = c1 > 0.0 && c1 < 50.0 && std::fabs(c1 - c2) <= 0.1 * std::max(c1, c2);
    return std::make_pair(ok, "constants " + fmt(c1) + " / " + fmt(c2));
  });

  run_criterion(7, "divergence and trace constraint residuals", [&] {
    if (!coupled_ok) return std::make_pair(false, coupled_err);
    double divr = 0.0, trr = 0.0;
    for (const auto& d : coupled.diagnostics) {
      divr = std::max(divr, d.div_residual);
      trr = std::max(trr, d.trace_residual);
    }
    return std::make_pair(divr <= 1e-9 && trr <= 1e-9,
                          "max div=" + fmt(divr) + " trace=" + fmt(trr));
  });

  run_criterion(8, "compatibility machinery", [&] {
    std::ostringstream detail;
    const StructureState s0(desk.g.nt());
    const HanzawaMap map0 = build_hanzawa(desk.dom, desk.g, s0);
    // zero dataset
    Dataset zero = Dataset::zero(desk.g, desk.dom, desk.model);
    const CompatibilityReport rz =
        check_compatibility(desk.g, desk.dom, map0, zero, desk.model);
    bool ok = rz.sup_residual <= 1e-10;
    detail << "zero=" << fmt(rz.sup_residual);
    // back-substituted dataset: isotropic state, boundary force from the
    // discrete identity
    Dataset bs = Dataset::zero(desk.g, desk.dom, desk.model);
    bs.f_hat0.assign(bs.f_hat0.size(), 1.0);
    const CompatibilityReport r0 = check_compatibility(desk.g, desk.dom, map0, bs, desk.model);
    std::vector<double> gfix(desk.g.nt());
    for (int j = 0; j < desk.g.nt(); ++j) gfix[j] = -r0.residual_normal[j];
    bs.boundary_force = [gfix](double) { return gfix; };
    const CompatibilityReport r1 = check_compatibility(desk.g, desk.dom, map0, bs, desk.model);
    ok = ok && r1.sup_residual <= 1e-9;
    detail << " back-substituted=" << fmt(r1.sup_residual);
    // linear response to a boundary-force perturbation
    std::vector<double> slopes;
    for (double delta : {1e-3, 1e-4, 1e-5}) {
      Dataset dp = Dataset::zero(desk.g, desk.dom, desk.model);
      dp.boundary_force = [&, delta](double) {
        std::vector<double> out(desk.g.nt());
        for (int j = 0; j < desk.g.nt(); ++j)
          out[j] = delta * std::cos(desk.dom.boundary().y(j));
        return out;
      };
      const CompatibilityReport r = check_compatibility(desk.g, desk.dom, map0, dp, desk.model);
      slopes.push_back(r.l2_residual / delta);
    }
    const bool lin = std::fabs(slopes[0] - slopes[1]) <= 0.05 * slopes[0] &&
                     std::fabs(slopes[1] - slopes[2]) <= 0.05 * slopes[1];
    ok = ok && lin;
    detail << " slopes=" << fmt(slopes[0]) << "," << fmt(slopes[1]) << "," << fmt(slopes[2]);
    return std::make_pair(ok, detail.str());
  });

  run_criterion(9, "inner iteration contracts, window halving is monotone", [&] {
    std::ostringstream detail;
    DiskGrid g(16, 32, 1.0);
    ReferenceDomain dom(1.0, 32, 0.5, 0.15, 2.0);
    auto make_ds = [&](double amp) {
      Dataset ds = Dataset::zero(g, dom, desk.model);
      ds.boundary_force = [amp, &dom, &g](double t) {
        std::vector<double> out(g.nt());
        const double a = amp * smooth_ramp(t / 3.2e-2);
        for (int j = 0; j < g.nt(); ++j) out[j] = a * std::cos(3.0 * dom.boundary().y(j));
        return out;
      };
      ds.body_force = [amp](double, const Vec2& x) {
        return Vec2{-amp * x.y, amp * x.x} * 0.5;
      };
      return ds;
    };
    std::vector<MatField> stress(65, MatField(g));
    InnerFpOptions opt;
    opt.window_steps = 64;
    opt.dt = 4e-3;
    opt.tol = 1e-12;
    opt.max_iterations = 25;
    const SolventTrajectory traj = inner_fixed_point(g, dom, make_ds(1.0), stress, opt);
    bool ok = traj.contraction.size() >= 4;
    double rho_max = 0.0;
    for (double rho : traj.contraction) rho_max = std::max(rho_max, rho);
    ok = ok && rho_max < 1.0;
    // geometric decay of the distances over the informative iterations
    int geometric = 0;
    for (size_t k = 0; k + 1 < traj.distances.size(); ++k)
      if (traj.distances[k + 1] < 0.5 * traj.distances[k]) ++geometric;
    ok = ok && geometric >= 4;
    detail << "iters=" << traj.distances.size() << " rho_max=" << fmt(rho_max);
    // halving counts across data magnitudes
    std::vector<int> halvings;
    for (double amp : {1.0, 4.0, 8.0, 16.0}) {
      try {
        const SolventTrajectory t2 = inner_fixed_point(g, dom, make_ds(amp), stress, opt);
        halvings.push_back(t2.halvings);
      } catch (const NoContraction&) {
        halvings.push_back(6);  // window underflow counts as the most halvings
      }
    }
    bool monotone = true;
    for (size_t k = 0; k + 1 < halvings.size(); ++k)
      if (halvings[k + 1] < halvings[k]) monotone = false;
    ok = ok && monotone && halvings.back() > halvings.front();
    detail << " halvings=";
    for (int h : halvings) detail << h << ";";
    return std::make_pair(ok, detail.str());
  });

  run_criterion(10, "outer iteration contracts and fixes the solute", [&] {
    std::ostringstream detail;
    const Dataset ds = relaxation_dataset(desk.g, desk.dom, desk.model, 0.1, 0.3);
    CoupledState start;
    start.structure = StructureState(desk.g.nt());
    start.structure.eta = ds.eta0;
    start.structure.eta_dot = ds.eta_star;
    start.flow = FlowState(desk.g, desk.g.nt());
    start.dist = DistributionState(desk.g, desk.model);
    start.dist.f = ds.f_hat0;
    const HanzawaMap map0 = build_hanzawa(desk.dom, desk.g, start.structure);
    start.dist.seed_geometry(desk.g, map0);
    CouplerOptions opt;
    opt.window_steps = 16;
    opt.dt = 1e-3;
    opt.tol = 1e-9;
    opt.mode = DragMode::CoRotational;
    const CoupledResult r = fixed_point_drive(desk.g, desk.dom, desk.model, ds, start, opt);
    double rho_max = 0.0;
    for (double rho : r.rho) rho_max = std::max(rho_max, rho);
    bool ok = rho_max < 1.0 || r.rho.empty();
    detail << "rho_max=" << fmt(rho_max);
    const OuterMapResult extra =
        outer_map(desk.g, desk.dom, desk.model, ds, r.fp, start, opt);
    const double move = y_distance(desk.g, desk.model, extra.fp, r.fp, opt.dt);
    ok = ok && move <= 2.0 * opt.tol;
    detail << " extra_move=" << fmt(move);
    // independence of the Picard start
    FpTrajectory alt(r.window_steps_used + 1, start.dist);
    for (auto& s : alt)
      for (auto& v : s.f) v *= 1.05;
    OuterMapResult it = outer_map(desk.g, desk.dom, desk.model, ds, alt, start, opt);
    for (int k = 0; k < 15; ++k) {
      OuterMapResult next = outer_map(desk.g, desk.dom, desk.model, ds, it.fp, start, opt);
      const double d = y_distance(desk.g, desk.model, next.fp, it.fp, opt.dt);
      it = std::move(next);
      if (d <= opt.tol) break;
    }
    const double indep = y_distance(desk.g, desk.model, it.fp, r.fp, opt.dt);
    ok = ok && indep <= 5.0 * opt.tol;
    detail << " start_gap=" << fmt(indep);
    return std::make_pair(ok, detail.str());
  });

  run_criterion(11, "equilibrium relaxation rate matches the radial oracle", [&] {
    FeneModel small_ball(4.0, 6, 8);
    const StructureState s0(desk.g.nt());
    const HanzawaMap map = build_hanzawa(desk.dom, desk.g, s0);
    DistributionState f(desk.g, small_ball);
    for (int i = 0; i < desk.g.nr(); ++i)
      for (int j = 0; j < desk.g.nt(); ++j) {
        const double r = desk.g.rc(i);
        const double bump = 0.5 * r * (2.0 - r) * std::cos(desk.g.theta(j));
        for (int q = 0; q < small_ball.size(); ++q)
          f.at(desk.g.idx(i, j), q) = 1.0 + bump;
      }
    f.seed_geometry(desk.g, map);
    VecField w(desk.g);
    std::vector<Vec2> rim(desk.g.nt(), Vec2{0.0, 0.0});
    FpSolver solver(desk.g, small_ball);
    FpStepInput in;
    in.w_bar = &w;
    in.w_rim = &rim;
    in.map_t = &map;
    in.map_next = &map;
    in.mode = DragMode::CoRotational;
    in.dt = 1e-3;
    auto deviation = [&](const DistributionState& s) {
      std::vector<double> d = s.f;
      for (auto& v : d) v -= 1.0;
      return l2_omega_m(desk.g, small_ball, d);
    };
    DistributionState cur = f;
    for (int n = 0; n < 150; ++n) {
      in.state = &cur;
      cur = solver.step(in);
    }
    const double d0 = deviation(cur);
    for (int n = 0; n < 200; ++n) {
      in.state = &cur;
      cur = solver.step(in);
    }
    const double rate = -std::log(deviation(cur) / d0) / (200 * in.dt);
    // high-resolution radial eigenvalue of the first angular mode
    const double oracle = [] {
      const int n = 2000;
      const double dr = 1.0 / n;
      std::vector<double> rc(n), a(n, 0.0), b(n, 0.0), c(n, 0.0);
      for (int i = 0; i < n; ++i) rc[i] = (i + 0.5) * dr;
      for (int i = 0; i < n; ++i) {
        const double vol = rc[i] * dr;
        if (i > 0) {
          a[i] = -(i * dr) / dr / vol;
          b[i] += (i * dr) / dr / vol;
        }
        if (i + 1 < n) {
          c[i] = -((i + 1) * dr) / dr / vol;
          b[i] += ((i + 1) * dr) / dr / vol;
        }
        b[i] += 1.0 / (rc[i] * rc[i]);
      }
      std::vector<double> v(n, 1.0), w2(n);
      double lambda = 0.0;
      for (int it = 0; it < 150; ++it) {
        std::vector<double> cp(n), dp(n);
        cp[0] = c[0] / b[0];
        dp[0] = v[0] / b[0];
        for (int i = 1; i < n; ++i) {
          const double m = b[i] - a[i] * cp[i - 1];
          cp[i] = c[i] / m;
          dp[i] = (v[i] - a[i] * dp[i - 1]) / m;
        }
        w2[n - 1] = dp[n - 1];
        for (int i = n - 2; i >= 0; --i) w2[i] = dp[i] - cp[i] * w2[i + 1];
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) nrm += w2[i] * w2[i] * rc[i] * dr;
        nrm = std::sqrt(nrm);
        for (int i = 0; i < n; ++i) w2[i] /= nrm;
        double num = 0.0;
        for (int i = 0; i < n; ++i) {
          double bw = b[i] * w2[i];
          if (i > 0) bw += a[i] * w2[i - 1];
          if (i + 1 < n) bw += c[i] * w2[i + 1];
          num += w2[i] * bw * rc[i] * dr;
        }
        lambda = num;
        v = w2;
      }
      return lambda;
    }();
    const bool ok = std::fabs(rate - oracle) <= 0.05 * oracle;
    return std::make_pair(ok, "rate=" + fmt(rate) + " oracle=" + fmt(oracle));
  });

  run_criterion(12, "manufactured-solution convergence orders", [&] {
    std::ostringstream detail;
    // solute solver, space
    const double T = 5e-3;
    // both grid families refine by the same ratio so the fitted order is
    // meaningful for the combined error; the order is the least-squares
    // slope over three refinements
    std::vector<FpConvergencePoint> fp;
    fp.push_back(fp_manufactured_error(12, 8, 2.0e-4, T));
    fp.push_back(fp_manufactured_error(18, 12, 8.888888888888889e-5, T));
    fp.push_back(fp_manufactured_error(27, 18, 3.950617283950617e-5, T));
    fp.push_back(fp_manufactured_error(39, 26, 1.893491124260355e-5, T));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& p : fp) {
      const double lx = std::log(p.h), ly = std::log(p.err);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double n_pts = static_cast<double>(fp.size());
    const double fp_order = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);
    bool ok = fp_order >= 1.8;
    detail << "fp_space=" << fmt(fp_order);
    // interface flow, space
    std::vector<SolventErrors> sv;
    sv.push_back(solvent_manufactured_error(16, 8.0e-4, 0.02));
    sv.push_back(solvent_manufactured_error(24, 3.5556e-4, 0.02));
    sv.push_back(solvent_manufactured_error(36, 1.5803e-4, 0.02));
    const double su1 = fit_order(sv[0].err_u, sv[1].err_u, sv[0].h, sv[1].h);
    const double su2 = fit_order(sv[1].err_u, sv[2].err_u, sv[1].h, sv[2].h);
    const double se1 = fit_order(sv[0].err_eta, sv[1].err_eta, sv[0].h, sv[1].h);
    const double se2 = fit_order(sv[1].err_eta, sv[2].err_eta, sv[1].h, sv[2].h);
    ok = ok && su1 >= 1.8 && su2 >= 1.8 && se1 >= 1.8 && se2 >= 1.8;
    detail << " flow_space=" << fmt(su1) << "," << fmt(su2) << " eta_space=" << fmt(se1)
           << "," << fmt(se2);
    // temporal self-convergence of the solute solver
    {
      auto run_dt = [&](double dt) {
        DiskGrid g(24, 48, 1.0);
        ReferenceDomain dom(1.0, 48, 0.5, 0.15, 2.0);
        FeneModel m(4.0, 8, 12);
        FpManufactured mf{m.b()};
        const StructureState s0(g.nt());
        const HanzawaMap map = build_hanzawa(dom, g, s0);
        VecField w(g);
        std::vector<Vec2> rim(g.nt(), Vec2{0.0, 0.0});
        for (int c = 0; c < g.size(); ++c)
          w[c] = mf.flow(g.center(c / g.nt(), c % g.nt()));
        DistributionState f(g, m);
        for (int c = 0; c < g.size(); ++c) {
          const Vec2 x = g.center(c / g.nt(), c % g.nt());
          for (int mm = 0; mm < m.nqr(); ++mm)
            for (int l = 0; l < m.nqc(); ++l)
              f.at(c, m.idx(mm, l)) = mf.value(0.0, x, m.node(mm, l));
        }
        f.seed_geometry(g, map);
        FpSolver solver(g, m);
        std::vector<double> src(f.f.size());
        const int steps = static_cast<int>(std::round(8e-3 / dt));
        for (int n = 0; n < steps; ++n) {
          for (int c = 0; c < g.size(); ++c) {
            const Vec2 x = g.center(c / g.nt(), c % g.nt());
            for (int mm = 0; mm < m.nqr(); ++mm)
              for (int l = 0; l < m.nqc(); ++l)
                src[static_cast<size_t>(c) * m.size() + m.idx(mm, l)] =
                    mf.source(n * dt, x, m.node(mm, l), 1.0, 1.0);
          }
          FpStepInput in;
          in.state = &f;
          in.w_bar = &w;
          in.w_rim = &rim;
          in.map_t = &map;
          in.map_next = &map;
          in.mode = DragMode::CoRotational;
          in.dt = dt;
          in.source = &src;
          f = solver.step(in);
        }
        return f;
      };
      DiskGrid g(24, 48, 1.0);
      FeneModel m(4.0, 8, 12);
      const DistributionState f1 = run_dt(8e-4), f2 = run_dt(4e-4), f3 = run_dt(2e-4);
      std::vector<double> d12(f1.f.size()), d23(f1.f.size());
      for (size_t k = 0; k < f1.f.size(); ++k) {
        d12[k] = f1.f[k] - f2.f[k];
        d23[k] = f2.f[k] - f3.f[k];
      }
      const double t_order = std::log2(l2_omega_m(g, m, d12) / l2_omega_m(g, m, d23));
      ok = ok && t_order >= 0.9;
      detail << " fp_time=" << fmt(t_order);
    }
    // temporal self-convergence of the interface-flow solver
    {
      auto run_dt = [&](double dt) {
        DiskGrid g(24, 48, 1.0);
        ReferenceDomain dom(1.0, 48, 0.5, 0.15, 2.0);
        SolventManufactured mf;
        const PhysParams params;
        const StructureState s0(g.nt());
        const HanzawaMap base = build_hanzawa(dom, g, s0);
        LinearSolventSolver solver(g, dom, base, dt, params);
        PerturbationTerms terms;
        terms.h = ScalarField(g);
        terms.big_h = MatField(g);
        terms.h_vec = VecField(g);
        MatField stress(g);
        StructureState st(g.nt());
        FlowState fl(g, g.nt());
        const int steps = static_cast<int>(std::round(0.016 / dt));
        for (int n = 0; n < steps; ++n) {
          const double t1 = (n + 1) * dt;
          for (int i = 0; i < g.nr(); ++i)
            for (int j = 0; j < g.nt(); ++j)
              terms.h_vec[g.idx(i, j)] =
                  mf.dt_velocity(t1, g.rc(i), g.theta(j)) * params.rho_f -
                  mf.lap_velocity(t1, g.rc(i), g.theta(j)) * params.mu;
          std::vector<double> gf(g.nt());
          for (int j = 0; j < g.nt(); ++j)
            gf[j] = mf.boundary_force(t1, dom.boundary().y(j), params);
          auto res = solver.step(st, fl, terms, stress, gf);
          st = res.structure;
          fl = res.flow;
        }
        return fl;
      };
      DiskGrid g(24, 48, 1.0);
      const FlowState f1 = run_dt(2e-3), f2 = run_dt(1e-3), f3 = run_dt(5e-4);
      double a12 = 0.0, a23 = 0.0;
      for (int i = 0; i < g.nr(); ++i)
        for (int j = 0; j < g.nt(); ++j) {
          const int c = g.idx(i, j);
          const Vec2 d1 = f1.u[c] - f2.u[c];
          const Vec2 d2 = f2.u[c] - f3.u[c];
          a12 += g.cell_volume(i) * d1.dot(d1);
          a23 += g.cell_volume(i) * d2.dot(d2);
        }
      const double t_order = 0.5 * std::log2(a12 / a23);
      ok = ok && t_order >= 0.9;
      detail << " flow_time=" << fmt(t_order);
    }
    return std::make_pair(ok, detail.str());
  });

  run_criterion(13, "global regime: termination taxonomy and long benign run", [&] {
    std::ostringstream detail;
    // inflating shape forcing must stop with the displacement criterion
    Dataset infl = Dataset::zero(desk.g, desk.dom, desk.model);
    infl.f_hat0.assign(infl.f_hat0.size(), 1.0);
    infl.boundary_force = [&](double t) {
      std::vector<double> out(desk.g.nt());
      const double a = 8.0 * smooth_ramp(t / 2e-3);
      for (int j = 0; j < desk.g.nt(); ++j)
        out[j] = a * std::cos(2.0 * desk.dom.boundary().y(j));
      return out;
    };
    CouplerOptions opt;
    opt.window_steps = 16;
    opt.dt = 1e-3;
    opt.mode = DragMode::CoRotational;
    const GlobalRunResult ri =
        global_extend(desk.g, desk.dom, desk.model, infl, 4000, opt, 0.01);
    bool ok = ri.termination.terminated && ri.termination.criterion == "sup_eta";
    detail << "terminated=" << ri.termination.criterion << "@" << fmt(ri.termination.value);
    // benign run holds the conservation, positivity and norm bounds
    const Dataset ben = relaxation_dataset(desk.g, desk.dom, desk.model, 0.03, 0.3);
    const GlobalRunResult rb = global_extend(desk.g, desk.dom, desk.model, ben, 1000, opt);
    ok = ok && !rb.termination.terminated && rb.steps_completed == 1000;
    const double m0 = rb.diagnostics.front().mass;
    const double sup0 = rb.diagnostics.front().supx_l2m;
    double drift = 0.0, minf = 0.0, supmax = 0.0;
    for (const auto& d : rb.diagnostics) {
      drift = std::max(drift, std::fabs(d.mass - m0) / m0);
      minf = std::min(minf, d.min_f);
      supmax = std::max(supmax, d.supx_l2m);
    }
    ok = ok && drift <= 1e-10 && minf >= -1e-12 && supmax <= sup0 * (1.0 + 1e-8);
    detail << " benign: drift=" << fmt(drift) << " min_f=" << fmt(minf)
           << " sup_growth=" << fmt(supmax / sup0 - 1.0);
    return std::make_pair(ok, detail.str());
  });

  run_criterion(14, "determinism and persistence", [&] {
    std::ostringstream detail;
    const std::string base = scratch_dir + "/c14";
    std::filesystem::remove_all(base);
    const std::string cfg_text = R"({
      "scenario": "coupled_global",
      "geometry": {"n_r": 12, "n_theta": 24, "tube_radius": 0.5, "sup_margin": 0.15},
      "fene": {"b": 4.0, "n_q_radial": 6, "n_q_angular": 8},
      "time": {"dt": 1e-3, "horizon_steps": 24, "window_steps": 8},
      "forcing": {"g_amplitude": 0.05, "g_mode": 2, "g_ramp": 0.005},
      "output": {"directory": "-"},
      "seed": 7
    })";
    RunConfig ca = RunConfig::from_json_text(cfg_text);
    ca.out_dir = base + "/a";
    ca.checkpoint_every = 1;
    RunConfig cb = RunConfig::from_json_text(cfg_text);
    cb.out_dir = base + "/b";
    cb.checkpoint_every = 1;
    const RunReport ra = run(ca);
    const RunReport rb = run(cb);
    bool ok = ra.exit_code == 0 && rb.exit_code == 0;
    const std::string csv_a = slurp_file(ra.csv_path);
    ok = ok && csv_a == slurp_file(rb.csv_path) && !csv_a.empty();
    detail << "bytes=" << csv_a.size() << (ok ? " identical" : " differ");
    // resume from the first window checkpoint
    RunConfig cr = RunConfig::from_json_text(cfg_text);
    cr.out_dir = base + "/r";
    cr.checkpoint_every = 1;
    const RunReport rr = run(cr, std::optional<std::string>(ca.out_dir +
                                                            "/checkpoint_000008.bin"));
    ok = ok && rr.exit_code == 0;
    std::istringstream fa(csv_a), fb(slurp_file(rr.csv_path));
    std::vector<std::string> la, lb;
    std::string line;
    while (std::getline(fa, line)) la.push_back(line);
    while (std::getline(fb, line)) lb.push_back(line);
    bool tail_ok = lb.size() >= 2 && la.size() >= lb.size();
    if (tail_ok) {
      const size_t tail = lb.size() - 1;
      for (size_t k = 0; k < tail; ++k)
        if (lb[1 + k] != la[la.size() - tail + k]) tail_ok = false;
    }
    ok = ok && tail_ok;
    detail << (tail_ok ? ", resume tail matches" : ", resume tail differs");
    return std::make_pair(ok, detail.str());
  });

  return results;
}

bool print_acceptance_table(const std::vector<CriterionResult>& results, std::ostream& os) {
  bool all = true;
  os << "--- acceptance criteria ---\n";
  for (const auto& r : results) {
    all = all && r.passed;
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2d %-58s (%.1fs)",
                  r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    os << head << "\n       " << r.detail << "\n";
  }
  os << (all ? "all criteria passed\n" : "criteria FAILED\n");
  return all;
}

}  // namespace polyfsi
