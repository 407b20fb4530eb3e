#include "polyfsi/solvent.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>

namespace polyfsi {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

void radial_deriv_stencil(const DiskGrid& g, int i, int j,
                          std::vector<std::pair<int, double>>& out) {
  const double dr = g.dr();
  out.clear();
  if (i == 0) {
    if (g.has_pole_pair()) {
      out.push_back({g.idx(1, j), 1.0 / (2.0 * dr)});
      out.push_back({g.idx(0, g.jop(j)), -1.0 / (2.0 * dr)});
    } else {
      out.push_back({g.idx(1, j), 1.0 / dr});
      out.push_back({g.idx(0, j), -1.0 / dr});
    }
  } else if (i == g.nr() - 1) {
    out.push_back({g.idx(i, j), 1.5 / dr});
    out.push_back({g.idx(i - 1, j), -2.0 / dr});
    out.push_back({g.idx(i - 2, j), 0.5 / dr});
  } else {
    out.push_back({g.idx(i + 1, j), 1.0 / (2.0 * dr)});
    out.push_back({g.idx(i - 1, j), -1.0 / (2.0 * dr)});
  }
}

void angular_deriv_stencil(const DiskGrid& g, int i, int j,
                           std::vector<std::pair<int, double>>& out) {
  out.clear();
  const double c = 1.0 / (2.0 * g.dtheta() * g.rc(i));
  out.push_back({g.idx(i, g.jp(j)), c});
  out.push_back({g.idx(i, g.jm(j)), -c});
}

// Volume-integrated row-wise divergence of a cell tensor field treated as a
// flux tensor (row k holds the flux vector of component k), with supplied
// rim values.
VecField tensor_flux_divergence(const DiskGrid& g, const MatField& T,
                                const std::vector<Mat2>& T_rim) {
  VecField out(g);
  auto add_face = [&](int a, int b, const Mat2& Tf, const Vec2& nh, double area) {
    const Vec2 flux{area * (Tf(0, 0) * nh.x + Tf(0, 1) * nh.y),
                    area * (Tf(1, 0) * nh.x + Tf(1, 1) * nh.y)};
    out[a] += flux;
    if (b >= 0) out[b] -= flux;
  };
  for (int i = 0; i + 1 < g.nr(); ++i) {
    const double area = g.radial_face_area(i + 1);
    for (int j = 0; j < g.nt(); ++j) {
      const Mat2 Tf = (T[g.idx(i, j)] + T[g.idx(i + 1, j)]) * 0.5;
      add_face(g.idx(i, j), g.idx(i + 1, j), Tf, g.unit_r(g.theta(j)), area);
    }
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double area = g.theta_face_area();
    for (int j = 0; j < g.nt(); ++j) {
      const Mat2 Tf = (T[g.idx(i, j)] + T[g.idx(i, g.jp(j))]) * 0.5;
      add_face(g.idx(i, j), g.idx(i, g.jp(j)), Tf, g.unit_t(g.theta_face(j)), area);
    }
  }
  const int i = g.nr() - 1;
  const double area = g.radial_face_area(g.nr());
  for (int j = 0; j < g.nt(); ++j)
    add_face(g.idx(i, j), -1, T_rim[j], g.unit_r(g.theta(j)), area);
  return out;
}

Mat2 extrapolate_rim(const MatField& T, const DiskGrid& g, int j) {
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  return T[g.idx(n1, j)] * 1.5 - T[g.idx(n2, j)] * 0.5;
}

Vec2 extrapolate_rim(const VecField& T, const DiskGrid& g, int j) {
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  return T[g.idx(n1, j)] * 1.5 - T[g.idx(n2, j)] * 0.5;
}

double extrapolate_rim(const ScalarField& T, const DiskGrid& g, int j) {
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  return T[g.idx(n1, j)] * 1.5 - T[g.idx(n2, j)] * 0.5;
}

// Physical velocity gradient at a rim node from one-sided reference
// derivatives and the trace values.
Mat2 rim_velocity_gradient(const DiskGrid& g, const HanzawaMap& map, const VecField& u,
                           const std::vector<Vec2>& trace, int j) {
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  const double dr = g.dr();
  const double th = g.theta(j);
  const Vec2 er = g.unit_r(th), et = g.unit_t(th);
  const Vec2 dudr = (trace[j] * 8.0 - u[g.idx(n1, j)] * 9.0 + u[g.idx(n2, j)]) / (3.0 * dr);
  const Vec2 dudt = (trace[g.jp(j)] - trace[g.jm(j)]) /
                    (2.0 * g.dtheta() * g.radius());
  Mat2 ref;  // reference Jacobian d u_k / d xbar_l
  ref(0, 0) = dudr.x * er.x + dudt.x * et.x;
  ref(0, 1) = dudr.x * er.y + dudt.x * et.y;
  ref(1, 0) = dudr.y * er.x + dudt.y * et.x;
  ref(1, 1) = dudr.y * er.y + dudt.y * et.y;
  const Mat2 Grim = map.tensor_b_rim[j] * (1.0 / map.jac_rim[j]);
  return ref * Grim;
}

}  // namespace

Dataset Dataset::zero(const DiskGrid& g, const ReferenceDomain& dom, const FeneModel& m) {
  Dataset d;
  d.eta0.assign(dom.boundary().size(), 0.0);
  d.eta_star.assign(dom.boundary().size(), 0.0);
  d.u0 = VecField(g);
  d.u0_rim.assign(dom.boundary().size(), Vec2{0.0, 0.0});
  d.f_hat0.assign(static_cast<size_t>(g.size()) * m.size(), 0.0);
  return d;
}

PerturbationTerms assemble_perturbation_terms(
    const DiskGrid& g, const HanzawaMap& base, const HanzawaMap& zeta_map,
    const VecField& w_bar, const std::vector<Vec2>& w_rim, const VecField* w_bar_prev,
    const ScalarField& q_bar, const MatField& stress, const BodyForce& f, double time,
    double dt, const PhysParams& params) {
  PerturbationTerms out;
  out.h = ScalarField(g);
  out.h_vec = VecField(g);
  out.big_h = MatField(g);
  const MatField Jw = jacobian(g, w_bar, false, &w_rim);
  for (int id = 0; id < g.size(); ++id) {
    const Mat2 dB = base.tensor_b[id] - zeta_map.tensor_b[id];
    const Mat2 dA = base.tensor_a[id] - zeta_map.tensor_a[id];
    out.h[id] = (dB * Jw[id]).trace();
    Mat2 piS = Mat2::identity() * q_bar[id] - stress[id];
    out.big_h[id] = Jw[id] * dA * params.mu - piS * dB.transpose();

    Vec2 hv{0.0, 0.0};
    if (w_bar_prev) {
      const Vec2 dwdt = (w_bar[id] - (*w_bar_prev)[id]) / dt;
      hv += dwdt * (params.rho_f * (base.jac[id] - zeta_map.jac[id]));
    }
    hv -= (Jw[id] * zeta_map.inv_dot_of_fwd[id]) * (params.rho_f * zeta_map.jac[id]);
    const Vec2 conv = Jw[id] * (zeta_map.grad_inv[id] * w_bar[id]);
    hv -= conv * (params.rho_f * zeta_map.jac[id]);
    if (f) hv += f(time, zeta_map.forward[id]) * zeta_map.jac[id];
    out.h_vec[id] = hv;
  }
  return out;
}

struct LinearSolventSolver::Impl {
  int nx = 0, ny = 0, n = 0;
  Eigen::SparseLU<SpMat> lu;
  // index helpers
  int iux(int c) const { return c; }
  int iuy(int c) const { return nx + c; }
  int ip(int c) const { return 2 * nx + c; }
  int iv(int j) const { return 3 * nx + j; }
};

LinearSolventSolver::LinearSolventSolver(const DiskGrid& g, const ReferenceDomain& dom,
                                         const HanzawaMap& base, double dt,
                                         const PhysParams& params)
    : g_(&g), dom_(&dom), base_(&base), dt_(dt), params_(params),
      impl_(std::make_unique<Impl>()) {
  if (dt <= 0.0) throw ConfigError("dt must be positive");
  Impl& im = *impl_;
  im.nx = g.size();
  im.ny = dom.boundary().size();
  im.n = 3 * im.nx + im.ny;

  std::vector<Trip> t;
  t.reserve(static_cast<size_t>(im.nx) * 60);
  auto add = [&](int r, int c, double v) {
    if (v != 0.0) t.emplace_back(r, c, v);
  };
  std::vector<std::pair<int, double>> sten;

  // time terms
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const int c = g.idx(i, j);
      const double mass = params.rho_f * base.jac[c] * g.cell_volume(i) / dt;
      add(im.iux(c), im.iux(c), mass);
      add(im.iuy(c), im.iuy(c), mass);
    }

  // interior faces: viscous, pressure and constraint couplings
  auto face_terms = [&](int a, int b, const Vec2& nh, const Vec2& th, double area,
                        double delta, int ia, int ja, int ib, int jb) {
    const Mat2 Ab = (base.tensor_a[a] + base.tensor_a[b]) * 0.5;
    const Mat2 Bb = (base.tensor_b[a] + base.tensor_b[b]) * 0.5;
    const double ann = nh.dot(Ab * nh);
    const double ant = th.dot(Ab * nh);
    const Vec2 cb = Bb.transpose() * nh;  // coefficient vector for B-weighted fluxes

    for (int k = 0; k < 2; ++k) {
      const int ra = (k == 0) ? im.iux(a) : im.iuy(a);
      const int rb = (k == 0) ? im.iux(b) : im.iuy(b);
      auto col = [&](int cell) { return (k == 0) ? im.iux(cell) : im.iuy(cell); };
      // viscous flux area*mu*ann*(u_b - u_a)/delta leaves cell a; the
      // momentum row carries minus the flux divergence
      const double cn = params.mu * area * ann / delta;
      add(ra, col(b), -cn);
      add(ra, col(a), cn);
      add(rb, col(b), cn);
      add(rb, col(a), -cn);
      if (ant != 0.0) {
        const int is[2] = {ia, ib}, js[2] = {ja, jb};
        for (int side = 0; side < 2; ++side) {
          const bool radial_tan = (std::fabs(th.dot(g.unit_r(g.theta(js[side])))) > 0.5);
          if (radial_tan)
            radial_deriv_stencil(g, is[side], js[side], sten);
          else
            angular_deriv_stencil(g, is[side], js[side], sten);
          for (auto& [cell, cf] : sten) {
            const double v = 0.5 * params.mu * area * ant * cf;
            add(ra, col(cell), -v);
            add(rb, col(cell), v);
          }
        }
      }
      // pressure flux: +area*pface*cb_k into momentum (divergence of p B^T)
      const double pk = (k == 0) ? cb.x : cb.y;
      add(ra, im.ip(a), 0.5 * area * pk);
      add(ra, im.ip(b), 0.5 * area * pk);
      add(rb, im.ip(a), -0.5 * area * pk);
      add(rb, im.ip(b), -0.5 * area * pk);
      // constraint rows: divergence of B u
      add(im.ip(a), col(a), 0.5 * area * pk);
      add(im.ip(a), col(b), 0.5 * area * pk);
      add(im.ip(b), col(a), -0.5 * area * pk);
      add(im.ip(b), col(b), -0.5 * area * pk);
    }
  };

  for (int i = 0; i + 1 < g.nr(); ++i) {
    const double area = g.radial_face_area(i + 1);
    for (int j = 0; j < g.nt(); ++j) {
      const double th = g.theta(j);
      face_terms(g.idx(i, j), g.idx(i + 1, j), g.unit_r(th), g.unit_t(th), area, g.dr(),
                 i, j, i + 1, j);
    }
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double area = g.theta_face_area();
    for (int j = 0; j < g.nt(); ++j) {
      const double thf = g.theta_face(j);
      face_terms(g.idx(i, j), g.idx(i, g.jp(j)), g.unit_t(thf), g.unit_r(thf), area,
                 g.theta_center_spacing(i), i, j, i, g.jp(j));
    }
  }

  // rim faces: trace-coupled closures
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  const double rim_area = g.radial_face_area(g.nr());
  const double dr = g.dr();
  for (int j = 0; j < g.nt(); ++j) {
    const int a = g.idx(n1, j);
    const double th = g.theta(j);
    const Vec2 nh = g.unit_r(th), tv = g.unit_t(th);
    const Mat2& Ar = base.tensor_a_rim[j];
    const Mat2& Br = base.tensor_b_rim[j];
    const double ann = nh.dot(Ar * nh);
    const double ant = tv.dot(Ar * nh);
    const Vec2 cb = Br.transpose() * nh;
    const Vec2 nj = dom.outward_normal(dom.boundary().y(j));
    const Vec2 njp = dom.outward_normal(dom.boundary().y(g.jp(j)));
    const Vec2 njm = dom.outward_normal(dom.boundary().y(g.jm(j)));

    for (int k = 0; k < 2; ++k) {
      const int ra = (k == 0) ? im.iux(a) : im.iuy(a);
      auto col = [&](int cell) { return (k == 0) ? im.iux(cell) : im.iuy(cell); };
      const double njk = (k == 0) ? nj.x : nj.y;
      const double njpk = (k == 0) ? njp.x : njp.y;
      const double njmk = (k == 0) ? njm.x : njm.y;
      // normal derivative (8 trace - 9 u_{n1} + u_{n2}) / (3 dr); the
      // outgoing viscous flux enters the row negated
      const double cn = params.mu * rim_area * ann / (3.0 * dr);
      add(ra, im.iv(j), -cn * 8.0 * njk);
      add(ra, col(g.idx(n1, j)), cn * 9.0);
      add(ra, col(g.idx(n2, j)), -cn * 1.0);
      // tangential derivative of the trace
      const double ct = params.mu * rim_area * ant / (2.0 * g.dtheta() * g.radius());
      add(ra, im.iv(g.jp(j)), -ct * njpk);
      add(ra, im.iv(g.jm(j)), ct * njmk);
      // pressure at the rim by extrapolation
      const double pk = (k == 0) ? cb.x : cb.y;
      add(ra, im.ip(g.idx(n1, j)), rim_area * pk * 1.5);
      add(ra, im.ip(g.idx(n2, j)), rim_area * pk * -0.5);
      // constraint rim flux through the trace
      add(im.ip(a), im.iv(j), rim_area * pk * njk);
    }
  }

  // beam rows
  const CircleBoundary& om = dom.boundary();
  const double dy = om.dy();
  const double dy2 = dy * dy, dy4 = dy2 * dy2;
  for (int j = 0; j < im.ny; ++j) {
    const int r = im.iv(j);
    add(r, im.iv(j), params.rho_s / dt);
    // -gamma * second difference of v
    add(r, im.iv(j), 2.0 * params.gamma / dy2);
    add(r, im.iv(om.jp(j)), -params.gamma / dy2);
    add(r, im.iv(om.jm(j)), -params.gamma / dy2);
    // +alpha * dt * fourth difference of v
    const int j1 = om.jp(j), j2 = om.jp(j1), k1 = om.jm(j), k2 = om.jm(k1);
    add(r, im.iv(j), 6.0 * params.alpha_beam * dt / dy4);
    add(r, im.iv(j1), -4.0 * params.alpha_beam * dt / dy4);
    add(r, im.iv(k1), -4.0 * params.alpha_beam * dt / dy4);
    add(r, im.iv(j2), params.alpha_beam * dt / dy4);
    add(r, im.iv(k2), params.alpha_beam * dt / dy4);

    // traction coupling: + n . (Jac(u) A n) - (n^T B n) p_rim on the left
    const Vec2 nj = dom.outward_normal(om.y(j));
    const Mat2& Ar = base.tensor_a_rim[j];
    const Mat2& Br = base.tensor_b_rim[j];
    const Vec2 An = Ar * nj;
    const double cr = nj.dot(An);                      // e_r . A n (n == e_r at rim)
    const double ct = g.unit_t(g.theta(j)).dot(An);    // e_t . A n
    const double nBn = nj.dot(Br * nj);
    const int a1 = g.idx(g.nr() - 1, j), a2 = g.idx(g.nr() - 2, j);
    for (int k = 0; k < 2; ++k) {
      auto col = [&](int cell) { return (k == 0) ? im.iux(cell) : im.iuy(cell); };
      const double njk = (k == 0) ? nj.x : nj.y;
      const double cvis = params.mu * cr / (3.0 * dr);
      add(r, im.iv(j), cvis * 8.0 * njk * njk);
      add(r, col(a1), -cvis * 9.0 * njk);
      add(r, col(a2), cvis * njk);
      const Vec2 njp = dom.outward_normal(om.y(om.jp(j)));
      const Vec2 njm = dom.outward_normal(om.y(om.jm(j)));
      const double cvt = params.mu * ct / (2.0 * g.dtheta() * g.radius());
      add(r, im.iv(om.jp(j)), cvt * ((k == 0) ? njp.x : njp.y) * njk);
      add(r, im.iv(om.jm(j)), -cvt * ((k == 0) ? njm.x : njm.y) * njk);
    }
    add(r, im.ip(a1), -nBn * 1.5);
    add(r, im.ip(a2), nBn * 0.5);
  }

  SpMat K(im.n, im.n);
  K.setFromTriplets(t.begin(), t.end());
  im.lu.compute(K);
  if (im.lu.info() != Eigen::Success)
    throw SolverDivergence("monolithic interface-flow factorization failed");
}

LinearSolventSolver::~LinearSolventSolver() = default;

LinearSolventSolver::StepResult LinearSolventSolver::step(
    const StructureState& s_prev, const FlowState& f_prev, const PerturbationTerms& terms,
    const MatField& stress, const std::vector<double>& g_force) const {
  const DiskGrid& g = *g_;
  const ReferenceDomain& dom = *dom_;
  const HanzawaMap& base = *base_;
  const Impl& im = *impl_;

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.n);

  // stress and defect flux tensors
  MatField sflux(g);
  for (int id = 0; id < g.size(); ++id)
    sflux[id] = stress[id] * base.tensor_b[id].transpose();
  std::vector<Mat2> sflux_rim(im.ny), H_rim(im.ny), S_rim(im.ny);
  for (int j = 0; j < im.ny; ++j) {
    S_rim[j] = extrapolate_rim(stress, g, j);
    sflux_rim[j] = S_rim[j] * base.tensor_b_rim[j].transpose();
    H_rim[j] = extrapolate_rim(terms.big_h, g, j);
  }
  const VecField div_s = tensor_flux_divergence(g, sflux, sflux_rim);
  const VecField div_H = tensor_flux_divergence(g, terms.big_h, H_rim);

  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const int c = g.idx(i, j);
      const double vol = g.cell_volume(i);
      const double mass = params_.rho_f * base.jac[c] * vol / dt_;
      rhs[im.iux(c)] += mass * f_prev.u[c].x + vol * terms.h_vec[c].x + div_s[c].x - div_H[c].x;
      rhs[im.iuy(c)] += mass * f_prev.u[c].y + vol * terms.h_vec[c].y + div_s[c].y - div_H[c].y;
      rhs[im.ip(c)] += vol * terms.h[c];
    }

  const CircleBoundary& om = dom.boundary();
  const auto d4_eta = om.fourth_difference(s_prev.eta);
  for (int j = 0; j < im.ny; ++j) {
    const Vec2 nj = dom.outward_normal(om.y(j));
    const double trH = nj.dot(H_rim[j] * nj);
    const double trS = nj.dot((base.tensor_b_rim[j] * S_rim[j]) * nj);
    rhs[im.iv(j)] += params_.rho_s * s_prev.eta_dot[j] / dt_ -
                     params_.alpha_beam * d4_eta[j] + g_force[j] + trH - trS;
  }

  Eigen::VectorXd sol = im.lu.solve(rhs);
  if (im.lu.info() != Eigen::Success)
    throw SolverDivergence("monolithic interface-flow solve failed");

  StepResult out;
  out.structure = StructureState(im.ny, s_prev.time + dt_);
  out.flow = FlowState(g, im.ny);
  out.flow.time = s_prev.time + dt_;
  for (int j = 0; j < im.ny; ++j) {
    out.structure.eta_dot[j] = sol[im.iv(j)];
    out.structure.eta[j] = s_prev.eta[j] + dt_ * sol[im.iv(j)];
    out.flow.u_rim[j] = dom.outward_normal(om.y(j)) * sol[im.iv(j)];
  }
  for (int c = 0; c < im.nx; ++c) {
    out.flow.u[c] = Vec2{sol[im.iux(c)], sol[im.iuy(c)]};
    out.flow.p[c] = sol[im.ip(c)];
  }

  // constraint residual against the assembled divergence operator
  {
    ScalarField div(g);
    auto add_face = [&](int a, int b, const Mat2& Bb, const Vec2& uf, const Vec2& nh,
                        double area) {
      const double flux = area * nh.dot(Bb * uf);
      div[a] += flux;
      if (b >= 0) div[b] -= flux;
    };
    for (int i = 0; i + 1 < g.nr(); ++i) {
      const double area = g.radial_face_area(i + 1);
      for (int j = 0; j < g.nt(); ++j) {
        const int a = g.idx(i, j), b = g.idx(i + 1, j);
        add_face(a, b, (base.tensor_b[a] + base.tensor_b[b]) * 0.5,
                 (out.flow.u[a] + out.flow.u[b]) * 0.5, g.unit_r(g.theta(j)), area);
      }
    }
    for (int i = 0; i < g.nr(); ++i) {
      for (int j = 0; j < g.nt(); ++j) {
        const int a = g.idx(i, j), b = g.idx(i, g.jp(j));
        add_face(a, b, (base.tensor_b[a] + base.tensor_b[b]) * 0.5,
                 (out.flow.u[a] + out.flow.u[b]) * 0.5, g.unit_t(g.theta_face(j)),
                 g.theta_face_area());
      }
    }
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(g.nr() - 1, j);
      add_face(a, -1, base.tensor_b_rim[j], out.flow.u_rim[j], g.unit_r(g.theta(j)),
               g.radial_face_area(g.nr()));
    }
    double acc = 0.0;
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const int c = g.idx(i, j);
        const double r = div[c] / g.cell_volume(i) - terms.h[c];
        acc += g.cell_volume(i) * r * r;
      }
    out.flow.div_residual = std::sqrt(acc);
  }
  // the trace is imposed strongly; report the defect of the stored trace
  double tres = 0.0;
  for (int j = 0; j < im.ny; ++j) {
    const Vec2 d = out.flow.u_rim[j] -
                   dom.outward_normal(om.y(j)) * out.structure.eta_dot[j];
    tres = std::max(tres, d.norm());
  }
  out.flow.trace_residual = tres;
  return out;
}

namespace {

// Volume-integrated div(A grad s) per component of a velocity field with the
// rim trace imposed through one-sided closures; mirrors the solver stencils.
VecField apply_viscous(const DiskGrid& g, const HanzawaMap& map, const VecField& u,
                       const std::vector<Vec2>& trace, double mu) {
  VecField out(g);
  std::vector<std::pair<int, double>> sten;
  auto tang_deriv = [&](int i, int j, bool radial) {
    Vec2 d{0.0, 0.0};
    if (radial)
      radial_deriv_stencil(g, i, j, sten);
    else
      angular_deriv_stencil(g, i, j, sten);
    for (auto& [cell, cf] : sten) d += u[cell] * cf;
    return d;
  };
  for (int i = 0; i + 1 < g.nr(); ++i) {
    const double area = g.radial_face_area(i + 1);
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(i, j), b = g.idx(i + 1, j);
      const double th = g.theta(j);
      const Vec2 nh = g.unit_r(th), tv = g.unit_t(th);
      const Mat2 Ab = (map.tensor_a[a] + map.tensor_a[b]) * 0.5;
      const double ann = nh.dot(Ab * nh), ant = tv.dot(Ab * nh);
      Vec2 flux = (u[b] - u[a]) * (mu * area * ann / g.dr());
      if (ant != 0.0)
        flux += (tang_deriv(i, j, false) + tang_deriv(i + 1, j, false)) *
                (0.5 * mu * area * ant);
      out[a] += flux;
      out[b] -= flux;
    }
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double area = g.theta_face_area();
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(i, j), b = g.idx(i, g.jp(j));
      const double thf = g.theta_face(j);
      const Vec2 nh = g.unit_t(thf), tv = g.unit_r(thf);
      const Mat2 Ab = (map.tensor_a[a] + map.tensor_a[b]) * 0.5;
      const double ann = nh.dot(Ab * nh), ant = tv.dot(Ab * nh);
      Vec2 flux = (u[b] - u[a]) * (mu * area * ann / g.theta_center_spacing(i));
      if (ant != 0.0)
        flux += (tang_deriv(i, j, true) + tang_deriv(i, g.jp(j), true)) *
                (0.5 * mu * area * ant);
      out[a] += flux;
      out[b] -= flux;
    }
  }
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  const double rim_area = g.radial_face_area(g.nr());
  for (int j = 0; j < g.nt(); ++j) {
    const int a = g.idx(n1, j);
    const double th = g.theta(j);
    const Vec2 nh = g.unit_r(th), tv = g.unit_t(th);
    const Mat2& Ar = map.tensor_a_rim[j];
    const double ann = nh.dot(Ar * nh), ant = tv.dot(Ar * nh);
    const Vec2 dn = (trace[j] * 8.0 - u[g.idx(n1, j)] * 9.0 + u[g.idx(n2, j)]) / (3.0 * g.dr());
    const Vec2 dt_ = (trace[g.jp(j)] - trace[g.jm(j)]) / (2.0 * g.dtheta() * g.radius());
    out[a] += (dn * ann + dt_ * ant) * (mu * rim_area);
  }
  return out;
}

// Volume-integrated divergence of the Piola-weighted vector field B V with
// supplied rim values of V.
ScalarField piola_divergence(const DiskGrid& g, const HanzawaMap& map, const VecField& V,
                             const std::vector<Vec2>& V_rim) {
  ScalarField out(g);
  auto add_face = [&](int a, int b, const Vec2& bv, const Vec2& nh, double area) {
    const double flux = area * nh.dot(bv);
    out[a] += flux;
    if (b >= 0) out[b] -= flux;
  };
  VecField bv(g);
  for (int id = 0; id < g.size(); ++id) bv[id] = map.tensor_b[id] * V[id];
  for (int i = 0; i + 1 < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      add_face(g.idx(i, j), g.idx(i + 1, j),
               (bv[g.idx(i, j)] + bv[g.idx(i + 1, j)]) * 0.5, g.unit_r(g.theta(j)),
               g.radial_face_area(i + 1));
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      add_face(g.idx(i, j), g.idx(i, g.jp(j)),
               (bv[g.idx(i, j)] + bv[g.idx(i, g.jp(j))]) * 0.5,
               g.unit_t(g.theta_face(j)), g.theta_face_area());
  for (int j = 0; j < g.nt(); ++j)
    add_face(g.idx(g.nr() - 1, j), -1, map.tensor_b_rim[j] * V_rim[j],
             g.unit_r(g.theta(j)), g.radial_face_area(g.nr()));
  return out;
}

// Physical momentum right-hand side (without the pressure) pulled to cells:
// mu lap(u) + f + div S - rho_f (u . grad) u, evaluated discretely.
VecField momentum_residual_field(const DiskGrid& g, const HanzawaMap& map, const VecField& u,
                                 const std::vector<Vec2>& trace, const MatField& stress,
                                 const BodyForce& f, double time, const PhysParams& params) {
  const VecField lap = apply_viscous(g, map, u, trace, params.mu);
  MatField sflux(g);
  for (int id = 0; id < g.size(); ++id) sflux[id] = stress[id] * map.tensor_b[id].transpose();
  std::vector<Mat2> sflux_rim(g.nt());
  for (int j = 0; j < g.nt(); ++j)
    sflux_rim[j] = extrapolate_rim(stress, g, j) * map.tensor_b_rim[j].transpose();
  const VecField sdiv = tensor_flux_divergence(g, sflux, sflux_rim);
  const MatField Ju = jacobian(g, u, false, &trace);
  VecField out(g);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const int c = g.idx(i, j);
      const double jv = map.jac[c] * g.cell_volume(i);
      Vec2 w = (lap[c] + sdiv[c]) / jv;
      if (f) w += f(time, map.forward[c]);
      w -= (Ju[c] * (map.grad_inv[c] * u[c])) * params.rho_f;
      out[c] = w;
    }
  return out;
}

// Interior anisotropic operator rows for a scalar elliptic problem (no rim
// faces); triplets are appended.
void scalar_elliptic_interior(const DiskGrid& g, const MatField& A, std::vector<Trip>& t) {
  std::vector<std::pair<int, double>> sten;
  auto add = [&](int r, int c, double v) {
    if (v != 0.0) t.emplace_back(r, c, v);
  };
  for (int i = 0; i + 1 < g.nr(); ++i) {
    const double area = g.radial_face_area(i + 1);
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(i, j), b = g.idx(i + 1, j);
      const double th = g.theta(j);
      const Vec2 nh = g.unit_r(th), tv = g.unit_t(th);
      const Mat2 Ab = (A[a] + A[b]) * 0.5;
      const double ann = nh.dot(Ab * nh), ant = tv.dot(Ab * nh);
      const double cn = area * ann / g.dr();
      add(a, b, cn);
      add(a, a, -cn);
      add(b, b, -cn);
      add(b, a, cn);
      if (ant != 0.0) {
        for (int side = 0; side < 2; ++side) {
          angular_deriv_stencil(g, i + side, j, sten);
          for (auto& [cell, cf] : sten) {
            const double v = 0.5 * area * ant * cf;
            add(a, cell, v);
            add(b, cell, -v);
          }
        }
      }
    }
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double area = g.theta_face_area();
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(i, j), b = g.idx(i, g.jp(j));
      const double thf = g.theta_face(j);
      const Vec2 nh = g.unit_t(thf), tv = g.unit_r(thf);
      const Mat2 Ab = (A[a] + A[b]) * 0.5;
      const double ann = nh.dot(Ab * nh), ant = tv.dot(Ab * nh);
      const double cn = area * ann / g.theta_center_spacing(i);
      add(a, b, cn);
      add(a, a, -cn);
      add(b, b, -cn);
      add(b, a, cn);
      if (ant != 0.0) {
        const int js[2] = {j, g.jp(j)};
        for (int side = 0; side < 2; ++side) {
          radial_deriv_stencil(g, i, js[side], sten);
          for (auto& [cell, cf] : sten) {
            const double v = 0.5 * area * ant * cf;
            add(a, cell, v);
            add(b, cell, -v);
          }
        }
      }
    }
  }
}

}  // namespace

PressureDecomposition recover_pressure(const DiskGrid& g, const ReferenceDomain& dom,
                                       const HanzawaMap& map, const FlowState& flow,
                                       const StructureState& s_now,
                                       const StructureState& s_prev, const MatField& stress,
                                       const std::vector<double>& g_force, const BodyForce& f,
                                       double dt, const PhysParams& params) {
  const int nx = g.size();
  const CircleBoundary& om = dom.boundary();
  const DeformedNormal dn = deformed_normal(dom, s_now.eta);
  double lhs_int = 0.0;
  for (int j = 0; j < om.size(); ++j)
    lhs_int += dom.outward_normal(om.y(j)).dot(dn.n[j]) * dn.area_factor[j] * om.dy();
  if (lhs_int <= 1e-10)
    throw DegenerateBoundary("pressure constant integral lost positivity");

  const VecField W = momentum_residual_field(g, map, flow.u, flow.u_rim, stress, f,
                                             flow.time, params);
  // rim flux of the pressure problem is supplied by the interface
  // acceleration, so the divergence keeps a zero rim closure here
  const std::vector<Vec2> zero_rim(om.size(), Vec2{0.0, 0.0});
  ScalarField rhs_div = piola_divergence(g, map, W, zero_rim);

  std::vector<Trip> t;
  scalar_elliptic_interior(g, map.tensor_a, t);
  // mean gauge through a multiplier, weighted by the moving-cell measure
  std::vector<double> wj(nx);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      wj[g.idx(i, j)] = g.cell_volume(i) * map.jac[g.idx(i, j)];
  for (int c = 0; c < nx; ++c) {
    t.emplace_back(c, nx, wj[c]);
    t.emplace_back(nx, c, wj[c]);
  }
  SpMat K(nx + 1, nx + 1);
  K.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverDivergence("pressure recovery factorization");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nx + 1);
  for (int c = 0; c < nx; ++c) rhs[c] = rhs_div[c];
  const double rim_area = g.radial_face_area(g.nr());
  for (int j = 0; j < g.nt(); ++j) {
    const int a = g.idx(g.nr() - 1, j);
    const Vec2 nh = g.unit_r(g.theta(j));
    const Vec2 nj = dom.outward_normal(om.y(j));
    const double etadd = (s_now.eta_dot[j] - s_prev.eta_dot[j]) / dt;
    rhs[a] += rim_area * params.rho_f * etadd * nh.dot(map.tensor_b_rim[j] * nj);
  }
  Eigen::VectorXd sol = lu.solve(rhs);

  PressureDecomposition out;
  out.pi_star = ScalarField(g);
  double mean = 0.0, wsum = 0.0;
  for (int c = 0; c < nx; ++c) {
    mean += wj[c] * sol[c];
    wsum += wj[c];
  }
  mean /= wsum;
  for (int c = 0; c < nx; ++c) out.pi_star[c] = sol[c] - mean;

  // boundary-determined constant
  double acc = 0.0;
  for (int j = 0; j < om.size(); ++j) {
    const Mat2 gu = rim_velocity_gradient(g, map, flow.u, flow.u_rim, j);
    const Mat2 T = (gu + gu.transpose()) * params.mu +
                   extrapolate_rim(stress, g, j) -
                   Mat2::identity() * extrapolate_rim(out.pi_star, g, j);
    const Vec2 nj = dom.outward_normal(om.y(j));
    const double etadd = (s_now.eta_dot[j] - s_prev.eta_dot[j]) / dt;
    acc += (nj.dot(T * dn.n[j]) * dn.area_factor[j] + params.rho_s * etadd - g_force[j]) *
           om.dy();
  }
  out.c_pi = acc / lhs_int;
  return out;
}

ScalarField initial_pressure(const DiskGrid& g, const ReferenceDomain& dom,
                             const HanzawaMap& map0, const Dataset& ds, const FeneModel& model,
                             double* residual_out) {
  const int nx = g.size();
  const CircleBoundary& om = dom.boundary();
  const PhysParams& pp = ds.params;

  DistributionState f0(g, model);
  f0.f = ds.f_hat0;
  const MatField stress = kramers_stress(g, model, f0);
  const VecField W = momentum_residual_field(g, map0, ds.u0, ds.u0_rim, stress,
                                             ds.body_force, 0.0, pp);
  const std::vector<Vec2> zero_rim(om.size(), Vec2{0.0, 0.0});
  ScalarField rhs_div = piola_divergence(g, map0, W, zero_rim);

  // -d/dt of the divergence defect at t = 0 through a displacement probe
  {
    const double delta = 1e-6;
    StructureState probe(om.size());
    for (int j = 0; j < om.size(); ++j) {
      probe.eta[j] = ds.eta0[j] + delta * ds.eta_star[j];
      probe.eta_dot[j] = ds.eta_star[j];
    }
    const HanzawaMap mp = build_hanzawa(dom, g, probe);
    const MatField Ju = jacobian(g, ds.u0, false, &ds.u0_rim);
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const int c = g.idx(i, j);
        const double hprobe = ((map0.tensor_b[c] - mp.tensor_b[c]) * Ju[c]).trace();
        rhs_div[c] += -g.cell_volume(i) * hprobe / delta;
      }
  }

  std::vector<Trip> t;
  scalar_elliptic_interior(g, map0.tensor_a, t);
  auto add = [&](int r, int c, double v) { t.emplace_back(r, c, v); };

  const double rim_area = g.radial_face_area(g.nr());
  const int n1 = g.nr() - 1, n2 = g.nr() - 2;
  Eigen::VectorXd rhs(nx);
  for (int c = 0; c < nx; ++c) rhs[c] = rhs_div[c];

  const auto d2_star = om.second_difference(ds.eta_star);
  const auto d4_eta0 = om.fourth_difference(ds.eta0);
  const std::vector<double> g0 =
      ds.boundary_force ? ds.boundary_force(0.0) : std::vector<double>(om.size(), 0.0);
  for (int j = 0; j < g.nt(); ++j) {
    const int a = g.idx(n1, j);
    const Vec2 nh = g.unit_r(g.theta(j));
    const Vec2 nj = dom.outward_normal(om.y(j));
    const double cnb = nh.dot(map0.tensor_b_rim[j] * nj);
    const double nBn = nj.dot(map0.tensor_b_rim[j] * nj);
    // Robin closure from the interface acceleration; the pressure trace
    // enters through the traction
    const double robin = rim_area * cnb * (pp.rho_f / pp.rho_s) * nBn;
    add(a, g.idx(n1, j), -robin * 1.5);
    add(a, g.idx(n2, j), robin * 0.5);

    // conormal traction of the frozen-coefficient momentum operator
    const Vec2 dudr =
        (ds.u0_rim[j] * 8.0 - ds.u0[g.idx(n1, j)] * 9.0 + ds.u0[g.idx(n2, j)]) / (3.0 * g.dr());
    const Vec2 dudt = (ds.u0_rim[g.jp(j)] - ds.u0_rim[g.jm(j)]) /
                      (2.0 * g.dtheta() * g.radius());
    const Vec2 An = map0.tensor_a_rim[j] * nj;
    const Vec2 tv = g.unit_t(g.theta(j));
    const double trac_visc = pp.mu * nj.dot(dudr * nj.dot(An) + dudt * tv.dot(An));
    const double trac_s = nj.dot((map0.tensor_b_rim[j] * extrapolate_rim(stress, g, j)) * nj);
    const double accel_known =
        (pp.gamma * d2_star[j] - pp.alpha_beam * d4_eta0[j] + g0[j] - trac_visc - trac_s) /
        pp.rho_s;
    rhs[a] += rim_area * cnb * pp.rho_f * accel_known;
  }

  SpMat K(nx, nx);
  K.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverDivergence("initial pressure factorization");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SolverDivergence("initial pressure solve failed");

  if (residual_out) {
    Eigen::VectorXd r = K * sol - rhs;
    *residual_out = r.norm();
  }
  ScalarField out(g);
  for (int c = 0; c < nx; ++c) out[c] = sol[c];
  return out;
}

CompatibilityReport check_compatibility(const DiskGrid& g, const ReferenceDomain& dom,
                                        const HanzawaMap& map0, const Dataset& ds,
                                        const FeneModel& model) {
  const CircleBoundary& om = dom.boundary();
  const PhysParams& pp = ds.params;
  const ScalarField pi0 = initial_pressure(g, dom, map0, ds, model);

  DistributionState f0(g, model);
  f0.f = ds.f_hat0;
  const MatField stress = kramers_stress(g, model, f0);

  // fluid side: mu lap u0 - grad pi0 + f(0) + div S, pulled to cells then
  // extrapolated to the rim
  const VecField lap = apply_viscous(g, map0, ds.u0, ds.u0_rim, pp.mu);
  MatField sflux(g);
  for (int id = 0; id < g.size(); ++id) sflux[id] = stress[id] * map0.tensor_b[id].transpose();
  std::vector<Mat2> sflux_rim(om.size());
  for (int j = 0; j < om.size(); ++j)
    sflux_rim[j] = extrapolate_rim(stress, g, j) * map0.tensor_b_rim[j].transpose();
  const VecField sdiv = tensor_flux_divergence(g, sflux, sflux_rim);
  const VecField gp = gradient(g, pi0, false, nullptr);
  VecField fluid(g);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const int c = g.idx(i, j);
      const double jv = map0.jac[c] * g.cell_volume(i);
      Vec2 v = (lap[c] + sdiv[c]) / jv;
      v -= map0.grad_inv[c].transpose() * gp[c];
      if (ds.body_force) v += ds.body_force(0.0, map0.forward[c]);
      fluid[c] = v;
    }

  const DeformedNormal dn = deformed_normal(dom, ds.eta0);
  const auto d2_star = om.second_difference(ds.eta_star);
  const auto d4_eta0 = om.fourth_difference(ds.eta0);
  const std::vector<double> g0 =
      ds.boundary_force ? ds.boundary_force(0.0) : std::vector<double>(om.size(), 0.0);

  CompatibilityReport rep;
  rep.residual_normal.resize(om.size());
  double l2 = 0.0;
  for (int j = 0; j < om.size(); ++j) {
    const Vec2 nj = dom.outward_normal(om.y(j));
    const Mat2 gu = rim_velocity_gradient(g, map0, ds.u0, ds.u0_rim, j);
    const Mat2 T = (gu + gu.transpose()) * pp.mu + extrapolate_rim(stress, g, j) -
                   Mat2::identity() * extrapolate_rim(pi0, g, j);
    const double beam = pp.gamma * d2_star[j] - pp.alpha_beam * d4_eta0[j] + g0[j] -
                        nj.dot(T * dn.n[j]) * dn.area_factor[j];
    const Vec2 lhs = nj * (beam / pp.rho_s);
    const Vec2 rhs = extrapolate_rim(fluid, g, j) / pp.rho_f;
    const Vec2 res = lhs - rhs;
    rep.residual_normal[j] = res.dot(nj);
    rep.sup_residual = std::max(rep.sup_residual, res.norm());
    l2 += res.dot(res) * om.dy();
  }
  rep.l2_residual = std::sqrt(l2);
  return rep;
}

SolventTrajectory inner_fixed_point(const DiskGrid& g, const ReferenceDomain& dom,
                                    const Dataset& ds, const std::vector<MatField>& stress_series,
                                    const InnerFpOptions& opt) {
  int steps = opt.window_steps;
  const double dt = opt.dt;

  StructureState s0(dom.boundary().size());
  s0.eta = ds.eta0;
  s0.eta_dot = ds.eta_star;
  const HanzawaMap base = build_hanzawa(dom, g, s0);
  const LinearSolventSolver solver(g, dom, base, dt, ds.params);

  int halvings = 0;
  while (true) {
    if (static_cast<int>(stress_series.size()) < steps + 1)
      throw ConfigError("stress series shorter than the window");

    // frozen initial guess
    SolventTrajectory cur;
    cur.dt = dt;
    cur.steps = steps;
    cur.structure.assign(steps + 1, s0);
    FlowState fl0(g, dom.boundary().size());
    fl0.u = ds.u0;
    fl0.u_rim = ds.u0_rim;
    cur.flow.assign(steps + 1, fl0);
    for (int n = 0; n <= steps; ++n) {
      cur.structure[n].time = n * dt;
      cur.flow[n].time = n * dt;
    }

    std::vector<double> dists;
    bool converged = false, stalled = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      SolventTrajectory next;
      next.dt = dt;
      next.steps = steps;
      next.structure.assign(steps + 1, s0);
      next.flow.assign(steps + 1, fl0);
      try {
        for (int n = 0; n < steps; ++n) {
          StructureState zst = cur.structure[n + 1];
          const HanzawaMap zeta_map = build_hanzawa(dom, g, zst);
          const PerturbationTerms terms = assemble_perturbation_terms(
              g, base, zeta_map, cur.flow[n + 1].u, cur.flow[n + 1].u_rim,
              &cur.flow[n].u, cur.flow[n + 1].p, stress_series[n + 1], ds.body_force,
              (n + 1) * dt, dt, ds.params);
          const std::vector<double> gf = ds.boundary_force
                                             ? ds.boundary_force((n + 1) * dt)
                                             : std::vector<double>(dom.boundary().size(), 0.0);
          auto res = solver.step(next.structure[n], next.flow[n], terms,
                                 stress_series[n + 1], gf);
          next.structure[n + 1] = res.structure;
          next.flow[n + 1] = res.flow;
        }
      } catch (const DegenerateMap&) {
        stalled = true;
      } catch (const InadmissibleDisplacement&) {
        stalled = true;
      }
      if (!stalled) {
        const double d = xhat_distance(g, dom, next, cur);
        dists.push_back(d);
        cur = std::move(next);
        if (d <= opt.tol) {
          converged = true;
          break;
        }
        const size_t k = dists.size();
        if (k >= 2 && dists[k - 1] > 0.999 * dists[k - 2]) stalled = true;
      }
      if (stalled) break;
    }
    if (converged) {
      cur.distances = dists;
      cur.halvings = halvings;
      cur.contraction.clear();
      for (size_t k = 1; k < dists.size(); ++k)
        if (dists[k - 1] > 0.0) cur.contraction.push_back(dists[k] / dists[k - 1]);
      return cur;
    }
    // shrink the window and retry
    steps /= 2;
    ++halvings;
    if (steps < opt.min_window)
      throw NoContraction("window underflow in the frozen-coefficient iteration");
  }
}

std::vector<EnergyRow> energy_monitor(const DiskGrid& g, const ReferenceDomain& dom,
                                      const SolventTrajectory& traj, const PhysParams& params) {
  const CircleBoundary& om = dom.boundary();
  std::vector<EnergyRow> rows;
  StructureState s0(om.size());
  s0.eta = traj.structure.front().eta;
  s0.eta_dot = traj.structure.front().eta_dot;
  const HanzawaMap base = build_hanzawa(dom, g, s0);
  for (size_t n = 0; n < traj.structure.size(); ++n) {
    const auto& st = traj.structure[n];
    const auto& fl = traj.flow[n];
    EnergyRow row;
    row.time = st.time;
    const auto detad = om.derivative(st.eta_dot);
    const auto d2 = om.second_difference(st.eta);
    const auto gd2 = om.derivative(d2);
    row.beam_kinetic = om.l2_norm(st.eta_dot);
    row.beam_kinetic *= row.beam_kinetic;
    row.beam_grad_rate = om.l2_norm(detad);
    row.beam_grad_rate *= row.beam_grad_rate;
    row.beam_bending = om.l2_norm(gd2);
    row.beam_bending *= row.beam_bending;
    const MatField Ju = jacobian(g, fl.u, false, &fl.u_rim);
    double fg = 0.0, ke = 0.0;
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const int c = g.idx(i, j);
        fg += g.cell_volume(i) * Ju[c].frobenius() * Ju[c].frobenius();
        ke += g.cell_volume(i) * base.jac[c] * fl.u[c].dot(fl.u[c]);
      }
    row.flow_grad = fg;
    const double d2n = om.l2_norm(d2);
    row.total_energy = 0.5 * params.rho_s * row.beam_kinetic +
                       0.5 * params.alpha_beam * d2n * d2n + 0.5 * params.rho_f * ke;
    rows.push_back(row);
  }
  return rows;
}

double xhat_distance(const DiskGrid& g, const ReferenceDomain& dom, const SolventTrajectory& a,
                     const SolventTrajectory& b) {
  if (a.structure.size() != b.structure.size()) throw ShapeMismatch("trajectory lengths");
  const CircleBoundary& om = dom.boundary();
  double sup = 0.0, integ = 0.0;
  for (size_t n = 0; n < a.structure.size(); ++n) {
    std::vector<double> de(om.size()), dv(om.size());
    for (int j = 0; j < om.size(); ++j) {
      de[j] = a.structure[n].eta[j] - b.structure[n].eta[j];
      dv[j] = a.structure[n].eta_dot[j] - b.structure[n].eta_dot[j];
    }
    const auto de1 = om.derivative(de);
    const auto de2 = om.derivative(de1);
    const auto dv1 = om.derivative(dv);
    double beam = om.l2_norm(de) + om.l2_norm(de1) + om.l2_norm(de2) + om.l2_norm(dv) +
                  om.l2_norm(dv1);
    VecField du(g);
    ScalarField dp(g);
    for (int c = 0; c < g.size(); ++c) {
      du[c] = a.flow[n].u[c] - b.flow[n].u[c];
      dp[c] = a.flow[n].p[c] - b.flow[n].p[c];
    }
    const MatField Jd = jacobian(g, du);
    double gn = 0.0;
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const int c = g.idx(i, j);
        gn += g.cell_volume(i) * Jd[c].frobenius() * Jd[c].frobenius();
      }
    const double flow = l2_norm(g, du) + std::sqrt(gn);
    sup = std::max(sup, beam + flow);
    integ += a.dt * l2_norm(g, dp) * l2_norm(g, dp);
  }
  return sup + std::sqrt(integ);
}

}  // namespace polyfsi
