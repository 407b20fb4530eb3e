#include "polyfsi/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace polyfsi {

double forcing_ramp(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

namespace {

// Divergence-free test flow with zero trace: curl of
// psi = a (1-rho^2)^2 (rho^2 + c rho^3 cos(3 theta)) R^2, rho = r/R.
// Smooth through the origin and stationary.
void rotational_flow(const DiskGrid& g, double amp, double mode_amp, VecField& w,
                     std::vector<Vec2>& rim) {
  const double R = g.radius();
  auto eval = [&](double r, double th) -> Vec2 {
    const double rho = r / R;
    const double q = 1.0 - rho * rho;
    // psi and its derivatives in rho
    const double c3 = std::cos(3.0 * th), s3 = std::sin(3.0 * th);
    const double psi_rho = q * q * (2.0 * rho + mode_amp * 3.0 * rho * rho * c3) -
                           4.0 * rho * q * (rho * rho + mode_amp * rho * rho * rho * c3);
    const double psi_th = q * q * mode_amp * rho * rho * rho * (-3.0 * s3);
    const double ur = (r > 1e-14) ? amp * R * psi_th / rho : 0.0;  // (1/r) dpsi/dtheta * R^2/R
    const double ut = -amp * R * psi_rho;
    const Vec2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
    return er * ur + et * ut;
  };
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      w[g.idx(i, j)] = eval(g.rc(i), g.theta(j));
  for (int j = 0; j < g.nt(); ++j) rim[j] = Vec2{0.0, 0.0};  // q(1) = 0 kills the trace
}

std::vector<double> initial_distribution(const DiskGrid& g, const FeneModel& m, double pert) {
  std::vector<double> f(static_cast<size_t>(g.size()) * m.size(), 1.0);
  if (pert == 0.0) return f;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const double rho = g.rc(i) / g.radius();
      const double bump = pert * (1.0 - rho * rho) * rho * std::cos(g.theta(j));
      for (int q = 0; q < m.size(); ++q)
        f[static_cast<size_t>(g.idx(i, j)) * m.size() + q] = 1.0 + bump;
    }
  return f;
}

}  // namespace

Scenario build_scenario(const RunConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.grid = std::make_shared<DiskGrid>(cfg.n_r, cfg.n_theta, cfg.disk_radius);
  sc.dom = std::make_shared<ReferenceDomain>(cfg.disk_radius, cfg.n_theta, cfg.tube_radius,
                                             cfg.sup_margin, cfg.grad_bound);
  sc.model = std::make_shared<FeneModel>(cfg.b, cfg.n_q_radial, cfg.n_q_angular);
  sc.ds = Dataset::zero(*sc.grid, *sc.dom, *sc.model);
  sc.ds.params = {cfg.rho_s, cfg.gamma, cfg.alpha, cfg.rho_f, cfg.mu, cfg.eps, cfg.kappa};

  const double gA = cfg.g_amplitude, ramp_t = cfg.g_ramp;
  const int gm = cfg.g_mode;
  const int ny = cfg.n_theta;
  auto g_force = [gA, ramp_t, gm, ny](double t) {
    std::vector<double> out(ny);
    const double a = gA * forcing_ramp(t / ramp_t);
    for (int j = 0; j < ny; ++j)
      out[j] = a * std::cos(gm * (2.0 * std::numbers::pi * j / ny));
    return out;
  };
  const double fA = cfg.f_amplitude;
  auto body = [fA, ramp_t](double t, const Vec2& x) {
    const double a = fA * forcing_ramp(t / ramp_t);
    return Vec2{-a * x.y, a * x.x};
  };

  if (cfg.scenario == "zero_coupled") {
    sc.kind = Scenario::Kind::Coupled;
    // all-zero dataset, solute identically zero
  } else if (cfg.scenario == "relaxation" || cfg.scenario == "coupled_global" ||
             cfg.scenario == "benign") {
    sc.kind = Scenario::Kind::Coupled;
    sc.ds.boundary_force = g_force;
    if (fA != 0.0) sc.ds.body_force = body;
    sc.ds.f_hat0 = initial_distribution(*sc.grid, *sc.model,
                                        cfg.f0_perturbation != 0.0 ? cfg.f0_perturbation : 0.3);
  } else if (cfg.scenario == "coupled_local") {
    sc.kind = Scenario::Kind::Coupled;
    sc.ds.boundary_force = g_force;
    if (fA != 0.0) sc.ds.body_force = body;
    sc.ds.f_hat0 = initial_distribution(*sc.grid, *sc.model, cfg.f0_perturbation);
  } else if (cfg.scenario == "inflating") {
    sc.kind = Scenario::Kind::Coupled;
    sc.ds.boundary_force = g_force;  // configure g_mode = 0 for uniform inflation
    sc.ds.f_hat0 = initial_distribution(*sc.grid, *sc.model, 0.0);
  } else if (cfg.scenario == "fp_fixed") {
    sc.kind = Scenario::Kind::FpOnly;
    sc.ds.f_hat0 = initial_distribution(*sc.grid, *sc.model,
                                        cfg.f0_perturbation != 0.0 ? cfg.f0_perturbation : 0.5);
    const auto grid = sc.grid;
    const double amp = cfg.f_amplitude;
    sc.prescribe_w = [grid, amp](double, VecField& w, std::vector<Vec2>& rim) {
      rotational_flow(*grid, amp, 0.4, w, rim);
    };
    const int n = cfg.n_theta;
    sc.prescribe_structure = [n](double t) {
      StructureState s(n, t);
      return s;
    };
  } else if (cfg.scenario == "fp_relaxation") {
    sc.kind = Scenario::Kind::FpOnly;
    sc.ds.f_hat0 = initial_distribution(*sc.grid, *sc.model,
                                        cfg.f0_perturbation != 0.0 ? cfg.f0_perturbation : 0.5);
    sc.prescribe_w = [](double, VecField& w, std::vector<Vec2>& rim) {
      for (auto& v : w.v) v = Vec2{0.0, 0.0};
      for (auto& v : rim) v = Vec2{0.0, 0.0};
    };
    const int n = cfg.n_theta;
    sc.prescribe_structure = [n](double t) { return StructureState(n, t); };
  } else if (cfg.scenario == "fp_moving") {
    sc.kind = Scenario::Kind::FpOnly;
    sc.ds.f_hat0 = initial_distribution(*sc.grid, *sc.model, cfg.f0_perturbation);
    const int n = cfg.n_theta;
    const double a = (cfg.g_amplitude != 0.0) ? cfg.g_amplitude : 0.02;
    const double om = 2.0;
    sc.prescribe_structure = [n, a, om](double t) {
      StructureState s(n, t);
      for (int j = 0; j < n; ++j) {
        const double y = 2.0 * std::numbers::pi * j / n;
        s.eta[j] = a * std::sin(om * t) * std::cos(2.0 * y);
        s.eta_dot[j] = a * om * std::cos(om * t) * std::cos(2.0 * y);
      }
      return s;
    };
    // flow follows the domain velocity so the kinematic trace is exact
    sc.prescribe_w = nullptr;
  } else if (cfg.scenario == "solvent_only") {
    sc.kind = Scenario::Kind::SolventOnly;
    sc.ds.boundary_force = g_force;
    if (fA != 0.0) sc.ds.body_force = body;
  } else {
    throw ConfigError("unknown scenario: " + cfg.scenario);
  }
  return sc;
}

}  // namespace polyfsi
