#include "polyfsi/fokker_planck.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>

namespace polyfsi {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// Stencil of the centered radial derivative at (i,j): list of (cell, coeff).
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

// Volume-integrated anisotropic diffusion operator: (Lf)_c = sum over faces
// of area * (Abar grad f) . n_out, zero flux through the rim. Row sums are
// exactly zero, so constants are in the kernel.
SpMat assemble_tensor_diffusion(const DiskGrid& g, const MatField& A) {
  std::vector<Trip> t;
  t.reserve(static_cast<size_t>(g.size()) * 16);
  std::vector<std::pair<int, double>> sten;
  auto add_pair = [&](int row, int col, double v) { t.emplace_back(row, col, v); };

  for (int i = 0; i + 1 < g.nr(); ++i) {
    const double area = g.radial_face_area(i + 1);
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(i, j), b = g.idx(i + 1, j);
      const double th = g.theta(j);
      const Vec2 nh = g.unit_r(th), th_v = g.unit_t(th);
      const Mat2 Ab = (A[a] + A[b]) * 0.5;
      const double ann = nh.dot(Ab * nh);
      const double ant = th_v.dot(Ab * nh);
      const double cn = area * ann / g.dr();
      add_pair(a, b, cn);
      add_pair(a, a, -cn);
      add_pair(b, b, -cn);
      add_pair(b, a, cn);
      if (ant != 0.0) {
        for (int side = 0; side < 2; ++side) {
          angular_deriv_stencil(g, i + side, j, sten);
          for (auto& [col, cf] : sten) {
            const double v = 0.5 * area * ant * cf;
            add_pair(a, col, v);
            add_pair(b, col, -v);
          }
        }
      }
    }
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double area = g.theta_face_area();
    const double dn = g.theta_center_spacing(i);
    for (int j = 0; j < g.nt(); ++j) {
      const int a = g.idx(i, j), b = g.idx(i, g.jp(j));
      const double thf = g.theta_face(j);
      const Vec2 nh = g.unit_t(thf), tv = g.unit_r(thf);
      const Mat2 Ab = (A[a] + A[b]) * 0.5;
      const double ann = nh.dot(Ab * nh);
      const double ant = tv.dot(Ab * nh);
      const double cn = area * ann / dn;
      add_pair(a, b, cn);
      add_pair(a, a, -cn);
      add_pair(b, b, -cn);
      add_pair(b, a, cn);
      if (ant != 0.0) {
        const int js[2] = {j, g.jp(j)};
        for (int side = 0; side < 2; ++side) {
          radial_deriv_stencil(g, i, js[side], sten);
          for (auto& [col, cf] : sten) {
            const double v = 0.5 * area * ant * cf;
            add_pair(a, col, v);
            add_pair(b, col, -v);
          }
        }
      }
    }
  }
  SpMat L(g.size(), g.size());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

// Face-based transport fluxes of the Piola-weighted relative velocity.
struct TransportFaces {
  // radial interior faces: (nr-1) * nt, flux from (i,j) to (i+1,j)
  std::vector<double> radial;
  // angular faces: nr * nt, flux from (i,j) to (i,jp)
  std::vector<double> angular;
};

TransportFaces transport_fluxes(const DiskGrid& g, const HanzawaMap& map, const VecField& w) {
  TransportFaces tf;
  tf.radial.assign(static_cast<size_t>(g.nr() - 1) * g.nt(), 0.0);
  tf.angular.assign(static_cast<size_t>(g.nr()) * g.nt(), 0.0);
  VecField flux(g);
  for (int id = 0; id < g.size(); ++id)
    flux[id] = map.tensor_b[id] * (w[id] - map.psi_dot[id]);
  for (int i = 0; i + 1 < g.nr(); ++i) {
    const double area = g.radial_face_area(i + 1);
    for (int j = 0; j < g.nt(); ++j) {
      const Vec2 f = (flux[g.idx(i, j)] + flux[g.idx(i + 1, j)]) * 0.5;
      tf.radial[static_cast<size_t>(i) * g.nt() + j] = area * f.dot(g.unit_r(g.theta(j)));
    }
  }
  for (int i = 0; i < g.nr(); ++i) {
    const double area = g.theta_face_area();
    for (int j = 0; j < g.nt(); ++j) {
      const Vec2 f = (flux[g.idx(i, j)] + flux[g.idx(i, g.jp(j))]) * 0.5;
      tf.angular[static_cast<size_t>(i) * g.nt() + j] =
          area * f.dot(g.unit_t(g.theta_face(j)));
    }
  }
  return tf;
}

// Monotonized-central limited half-cell offset in difference form: the
// reconstructed face value stays inside the adjacent-cell interval and the
// offset never exceeds the upstream difference, which keeps the sweep
// updates convex under the Courant bound.
double limited_half_offset(double dm, double dp) {
  if (dm * dp <= 0.0) return 0.0;
  const double s = dm > 0.0 ? 1.0 : -1.0;
  return 0.5 * s *
         std::min(std::min(2.0 * std::fabs(dm), 2.0 * std::fabs(dp)),
                  0.5 * std::fabs(dm + dp));
}

}  // namespace

MatField skew_gradient(const DiskGrid& g, const VecField& w, const std::vector<Vec2>* rim) {
  const MatField J = jacobian(g, w, /*spectral_theta=*/true, rim);
  MatField out(g);
  for (int id = 0; id < g.size(); ++id) {
    const Mat2& d = J[id];
    out[id] = (d - d.transpose()) * 0.5;
  }
  return out;
}

struct FpSolver::Impl {
  Eigen::PartialPivLU<Eigen::MatrixXd> qlu;  // dense: the ball system is small
  double cached_dt_kappa = -1.0;
  std::vector<double> qweight;  // per q-cell: area * cell-averaged Maxwellian

  void ensure_q_factorization(const FeneModel& m, double dt, double kappa) {
    if (cached_dt_kappa == dt * kappa && !qweight.empty()) return;
    const int n = m.size();
    std::vector<Trip> t;
    qweight.assign(n, 0.0);
    for (int mm = 0; mm < m.nqr(); ++mm)
      for (int l = 0; l < m.nqc(); ++l)
        qweight[m.idx(mm, l)] = m.cell_area(mm) * m.cell_maxwellian(mm);
    for (int q = 0; q < n; ++q) t.emplace_back(q, q, qweight[q] / dt);
    // radial faces, outermost face carries zero weight so the natural
    // boundary condition needs no ghost values
    for (int mm = 1; mm < m.nqr(); ++mm) {
      const double cond = kappa * m.face_maxwellian_radial(mm) * m.rf(mm) * m.dchi() /
                          (m.rc(mm) - m.rc(mm - 1));
      for (int l = 0; l < m.nqc(); ++l) {
        const int a = m.idx(mm - 1, l), b = m.idx(mm, l);
        t.emplace_back(a, a, cond);
        t.emplace_back(b, b, cond);
        t.emplace_back(a, b, -cond);
        t.emplace_back(b, a, -cond);
      }
    }
    for (int mm = 0; mm < m.nqr(); ++mm) {
      const double cond = kappa * m.cell_maxwellian(mm) * (m.rf(mm + 1) - m.rf(mm)) /
                          (m.rc(mm) * m.dchi());
      for (int l = 0; l < m.nqc(); ++l) {
        const int a = m.idx(mm, l), b = m.idx(mm, m.lp(l));
        t.emplace_back(a, a, cond);
        t.emplace_back(b, b, cond);
        t.emplace_back(a, b, -cond);
        t.emplace_back(b, a, -cond);
      }
    }
    SpMat K(n, n);
    K.setFromTriplets(t.begin(), t.end());
    qlu.compute(Eigen::MatrixXd(K));
    cached_dt_kappa = dt * kappa;
  }
};

FpSolver::FpSolver(const DiskGrid& g, const FeneModel& m)
    : g_(&g), m_(&m), impl_(std::make_unique<Impl>()) {}

FpSolver::~FpSolver() = default;

DistributionState FpSolver::step(const FpStepInput& in, FpStepReport* report) {
  const DiskGrid& g = *g_;
  const FeneModel& m = *m_;
  if (!in.state || !in.w_bar || !in.map_t || !in.map_next)
    throw ConfigError("incomplete Fokker-Planck step input");
  const DistributionState& s = *in.state;
  if (s.nx != g.size() || s.nq != m.size()) throw ShapeMismatch("state vs grids");
  if (in.dt <= 0.0) throw ConfigError("dt must be positive");
  const int nq = m.size();

  FpStepReport rep;
  if (in.w_rim) {
    for (int j = 0; j < g.nt(); ++j) {
      const Vec2 target = in.map_t->dom->outward_normal(g.theta(j)) * in.map_t->eta_dot[j];
      rep.trace_residual = std::max(rep.trace_residual, ((*in.w_rim)[j] - target).norm());
    }
  }

  DistributionState out(s);
  out.time = s.time + in.dt;
  if (out.geom_w.empty()) out.seed_geometry(g, *in.map_t);

  // --- explicit transport: dimensionally split upwind sweeps with limited
  // linear reconstruction; the weights evolve with the same fluxes so
  // constants stay exact fixed points and the mass telescopes ---
  const TransportFaces tf = transport_fluxes(g, *in.map_t, *in.w_bar);

  // one directional sweep over a face list; faces carry (a, b, flux) with
  // the reconstruction neighbors (behind a, beyond b)
  struct SweepFace {
    int a, b;
    int aa, bb;  // upstream of a / downstream of b; -1 when missing
    double flux;
  };
  auto sweep = [&](const std::vector<SweepFace>& faces) {
    std::vector<double> w_old = out.geom_w, w_new = out.geom_w;
    std::vector<double> acc(out.f.size());
    for (size_t k = 0; k < out.f.size(); ++k) acc[k] = w_old[k / nq] * out.f[k];
    std::vector<double> outflow(g.size(), 0.0);
    for (const SweepFace& fc : faces) {
      if (fc.flux == 0.0) continue;
      w_new[fc.a] -= in.dt * fc.flux;
      w_new[fc.b] += in.dt * fc.flux;
      const bool up_a = fc.flux > 0.0;
      outflow[up_a ? fc.a : fc.b] += std::fabs(fc.flux);
      const int u = up_a ? fc.a : fc.b;
      const int uu = up_a ? fc.aa : fc.bb;
      const int d = up_a ? fc.b : fc.a;
      const double* fu = out.slab(u);
      const double* fd = out.slab(d);
      const double* fuu = uu >= 0 ? out.slab(uu) : nullptr;
      double* ra = acc.data() + static_cast<size_t>(fc.a) * nq;
      double* rb = acc.data() + static_cast<size_t>(fc.b) * nq;
      const double c = in.dt * fc.flux;
      for (int q = 0; q < nq; ++q) {
        double face = fu[q];
        if (fuu) face += limited_half_offset(fu[q] - fuu[q], fd[q] - fu[q]);
        ra[q] -= c * face;
        rb[q] += c * face;
      }
    }
    for (int c = 0; c < g.size(); ++c) {
      rep.cfl_x = std::max(rep.cfl_x, in.dt * outflow[c] / w_old[c]);
      if (in.dt * outflow[c] > 0.45 * w_old[c])
        throw CflViolation("transport Courant fraction " +
                           std::to_string(in.dt * outflow[c] / w_old[c]));
    }
    for (size_t k = 0; k < acc.size(); ++k) out.f[k] = acc[k] / w_new[k / nq];
    out.geom_w = w_new;
  };

  std::vector<SweepFace> faces;
  faces.reserve(static_cast<size_t>(g.size()));
  for (int j = 0; j < g.nt(); ++j)
    for (int i = 0; i + 1 < g.nr(); ++i) {
      SweepFace fc;
      fc.a = g.idx(i, j);
      fc.b = g.idx(i + 1, j);
      fc.aa = (i > 0) ? g.idx(i - 1, j) : (g.has_pole_pair() ? g.idx(0, g.jop(j)) : -1);
      fc.bb = (i + 2 < g.nr()) ? g.idx(i + 2, j) : -1;
      fc.flux = tf.radial[static_cast<size_t>(i) * g.nt() + j];
      faces.push_back(fc);
    }
  sweep(faces);
  faces.clear();
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      SweepFace fc;
      fc.a = g.idx(i, j);
      fc.b = g.idx(i, g.jp(j));
      fc.aa = g.idx(i, g.jm(j));
      fc.bb = g.idx(i, g.jp(g.jp(j)));
      fc.flux = tf.angular[static_cast<size_t>(i) * g.nt() + j];
      faces.push_back(fc);
    }
  sweep(faces);

  // --- explicit configuration drag: split sweeps with the same limited
  // reconstruction; the co-rotational field is purely angular on the polar
  // ball grid ((W q) . q = 0), so its radial sweep vanishes identically ---
  const MatField grad_ref = jacobian(g, *in.w_bar, /*spectral_theta=*/false, in.w_rim);
  std::vector<double> mw(m.size());
  for (int mm = 0; mm < m.nqr(); ++mm)
    for (int l = 0; l < m.nqc(); ++l) mw[m.idx(mm, l)] = m.cell_area(mm) * m.cell_maxwellian(mm);

  std::vector<double> slab(nq), qout(nq);
  auto drag_sweep = [&](double* f0, const std::function<void(
                            const std::function<void(int, int, int, int, double)>&)>& faces) {
    for (int q = 0; q < nq; ++q) {
      slab[q] = f0[q] * mw[q];
      qout[q] = 0.0;
    }
    auto face = [&](int qa, int qb, int qaa, int qbb, double a) {
      if (a == 0.0) return;
      const bool up_a = a > 0.0;
      qout[up_a ? qa : qb] += std::fabs(a);
      const int u = up_a ? qa : qb;
      const int uu = up_a ? qaa : qbb;
      const int d = up_a ? qb : qa;
      double fv = f0[u];
      if (uu >= 0) fv += limited_half_offset(f0[u] - f0[uu], f0[d] - f0[u]);
      slab[qa] -= in.dt * a * fv;
      slab[qb] += in.dt * a * fv;
    };
    faces(face);
    for (int q = 0; q < nq; ++q) {
      rep.cfl_q = std::max(rep.cfl_q, in.dt * qout[q] / mw[q]);
      if (in.dt * qout[q] > 0.45 * mw[q])
        throw CflViolation("drag Courant fraction " +
                           std::to_string(in.dt * qout[q] / mw[q]));
      f0[q] = slab[q] / mw[q];
    }
  };

  for (int c = 0; c < g.size(); ++c) {
    Mat2 d = grad_ref[c] * in.map_t->grad_inv[c];  // physical velocity gradient
    if (in.mode == DragMode::CoRotational) {
      const double omega = 0.5 * (d(1, 0) - d(0, 1));
      d = Mat2(0.0, -omega, omega, 0.0);
    }
    double* f0 = out.slab(c);
    if (in.mode == DragMode::FullGradient) {
      drag_sweep(f0, [&](const std::function<void(int, int, int, int, double)>& face) {
        for (int mm = 1; mm < m.nqr(); ++mm) {
          const double r = m.rf(mm);
          const double geo =
              m.face_maxwellian_radial(mm) * r * m.dchi() * m.cutoff_at(r, in.cutoff_level);
          if (geo == 0.0) continue;
          for (int l = 0; l < m.nqc(); ++l) {
            const Vec2 qhat{std::cos(m.chi(l)), std::sin(m.chi(l))};
            const double vel = qhat.dot(d * (qhat * r));
            face(m.idx(mm - 1, l), m.idx(mm, l), mm >= 2 ? m.idx(mm - 2, l) : -1,
                 mm + 1 < m.nqr() ? m.idx(mm + 1, l) : -1, vel * geo);
          }
        }
      });
    }
    drag_sweep(f0, [&](const std::function<void(int, int, int, int, double)>& face) {
      for (int mm = 0; mm < m.nqr(); ++mm) {
        const double r = m.rc(mm);
        const double geo =
            m.cell_maxwellian(mm) * (m.rf(mm + 1) - m.rf(mm)) *
            (in.mode == DragMode::FullGradient ? m.cutoff_at(r, in.cutoff_level) : 1.0);
        if (geo == 0.0) continue;
        for (int l = 0; l < m.nqc(); ++l) {
          const double cf = m.chi_face(l);
          const Vec2 ec{-std::sin(cf), std::cos(cf)};
          const Vec2 qf{r * std::cos(cf), r * std::sin(cf)};
          const double vel = ec.dot(d * qf);
          const int la = m.lm(l);
          face(m.idx(mm, la), m.idx(mm, l), m.idx(mm, m.lm(la)), m.idx(mm, m.lp(l)),
               vel * geo);
        }
      }
    });
  }

  if (in.source) {
    if (in.source->size() != out.f.size()) throw ShapeMismatch("source array size");
    for (size_t k = 0; k < out.f.size(); ++k) out.f[k] += in.dt * (*in.source)[k];
  }

  // --- implicit space diffusion, one factorization shared by all q ---
  {
    const SpMat L = assemble_tensor_diffusion(g, in.map_next->tensor_a);
    std::vector<Trip> t;
    t.reserve(static_cast<size_t>(L.nonZeros()) + g.size());
    for (int k = 0; k < L.outerSize(); ++k)
      for (SpMat::InnerIterator it(L, k); it; ++it)
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                       -in.eps * it.value());
    for (int c = 0; c < g.size(); ++c) t.emplace_back(c, c, out.geom_w[c] / in.dt);
    SpMat K(g.size(), g.size());
    K.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success)
      throw SolverDivergence("space diffusion factorization failed");
    Eigen::MatrixXd rhs(g.size(), nq);
    for (int c = 0; c < g.size(); ++c) {
      const double wdt = out.geom_w[c] / in.dt;
      const double* f = out.slab(c);
      for (int q = 0; q < nq; ++q) rhs(c, q) = wdt * f[q];
    }
    Eigen::MatrixXd sol = lu.solve(rhs);
    for (int c = 0; c < g.size(); ++c)
      for (int q = 0; q < nq; ++q) out.at(c, q) = sol(c, q);
  }

  // --- implicit configuration diffusion, per x-cell ---
  {
    impl_->ensure_q_factorization(m, in.dt, in.kappa);
    Eigen::MatrixXd rhs(nq, g.size());
    for (int c = 0; c < g.size(); ++c) {
      const double* f = out.slab(c);
      for (int q = 0; q < nq; ++q) rhs(q, c) = impl_->qweight[q] / in.dt * f[q];
    }
    Eigen::MatrixXd sol = impl_->qlu.solve(rhs);
    for (int c = 0; c < g.size(); ++c)
      for (int q = 0; q < nq; ++q) out.at(c, q) = sol(q, c);
  }

  for (size_t k = 0; k < out.f.size(); ++k) out.f_dot[k] = (out.f[k] - s.f[k]) / in.dt;
  if (report) *report = rep;
  return out;
}

double solute_mass(const DiskGrid& g, const FeneModel& m, const DistributionState& s,
                   const HanzawaMap& map) {
  if (s.nx != g.size() || s.nq != m.size()) throw ShapeMismatch("state vs grids");
  std::vector<double> w = s.geom_w;
  if (w.empty()) {
    w.resize(g.size());
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) w[g.idx(i, j)] = g.cell_volume(i) * map.jac[g.idx(i, j)];
  }
  double acc = 0.0;
  for (int c = 0; c < g.size(); ++c) {
    const double* f = s.slab(c);
    double cell = 0.0;
    for (int mm = 0; mm < m.nqr(); ++mm) {
      double ring = 0.0;
      for (int l = 0; l < m.nqc(); ++l) ring += f[m.idx(mm, l)];
      cell += m.mass_weight(mm) * ring;
    }
    acc += w[c] * cell;
  }
  return acc;
}

Extrema extrema(const DiskGrid& g, const FeneModel& m, const DistributionState& s) {
  Extrema e;
  e.min_f = s.f.empty() ? 0.0 : s.f[0];
  e.max_f = e.min_f;
  for (double v : s.f) {
    e.min_f = std::min(e.min_f, v);
    e.max_f = std::max(e.max_f, v);
  }
  for (int c = 0; c < g.size(); ++c) {
    const double* f = s.slab(c);
    double acc = 0.0;
    for (int mm = 0; mm < m.nqr(); ++mm) {
      double ring = 0.0;
      for (int l = 0; l < m.nqc(); ++l) ring += f[m.idx(mm, l)] * f[m.idx(mm, l)];
      acc += m.mass_weight(mm) * ring;
    }
    e.sup_x_l2m = std::max(e.sup_x_l2m, std::sqrt(acc));
  }
  return e;
}

FpEnergyReport energy_report(const DiskGrid& g, const FeneModel& m, const DistributionState& s,
                             const HanzawaMap& map, const VecField& w_bar,
                             const std::vector<Vec2>* w_rim, DragMode mode, int cutoff_level,
                             double eps, double kappa) {
  FpEnergyReport r;
  std::vector<double> w = s.geom_w;
  if (w.empty()) {
    w.resize(g.size());
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) w[g.idx(i, j)] = g.cell_volume(i) * map.jac[g.idx(i, j)];
  }

  // d/dt (1/2 |f|^2) via the stored time derivative.
  for (int c = 0; c < g.size(); ++c) {
    const double* f = s.f.data() + static_cast<size_t>(c) * s.nq;
    const double* fd = s.f_dot.data() + static_cast<size_t>(c) * s.nq;
    double cell = 0.0;
    for (int mm = 0; mm < m.nqr(); ++mm) {
      double ring = 0.0;
      for (int l = 0; l < m.nqc(); ++l) ring += f[m.idx(mm, l)] * fd[m.idx(mm, l)];
      cell += m.mass_weight(mm) * ring;
    }
    r.ddt_half_l2 += w[c] * cell;
  }

  // Space dissipation: Dirichlet form of the pulled-back tensor operator.
  {
    const SpMat L = assemble_tensor_diffusion(g, map.tensor_a);
    Eigen::VectorXd fc(g.size());
    for (int mm = 0; mm < m.nqr(); ++mm)
      for (int l = 0; l < m.nqc(); ++l) {
        const int q = m.idx(mm, l);
        for (int c = 0; c < g.size(); ++c) fc[c] = s.at(c, q);
        r.diss_x += -eps * m.mass_weight(mm) * fc.dot(L * fc);
      }
  }

  // Configuration dissipation and the centered drag production.
  const MatField grad_ref = jacobian(g, w_bar, false, w_rim);
  for (int c = 0; c < g.size(); ++c) {
    const double* f = s.slab(c);
    double dirich = 0.0;
    for (int mm = 1; mm < m.nqr(); ++mm) {
      const double cond =
          m.face_maxwellian_radial(mm) * m.rf(mm) * m.dchi() / (m.rc(mm) - m.rc(mm - 1));
      for (int l = 0; l < m.nqc(); ++l) {
        const double d = f[m.idx(mm, l)] - f[m.idx(mm - 1, l)];
        dirich += cond * d * d;
      }
    }
    for (int mm = 0; mm < m.nqr(); ++mm) {
      const double cond =
          m.cell_maxwellian(mm) * (m.rf(mm + 1) - m.rf(mm)) / (m.rc(mm) * m.dchi());
      for (int l = 0; l < m.nqc(); ++l) {
        const double d = f[m.idx(mm, m.lp(l))] - f[m.idx(mm, l)];
        dirich += cond * d * d;
      }
    }
    r.diss_q += kappa * w[c] * dirich;

    Mat2 d = grad_ref[c] * map.grad_inv[c];
    if (mode == DragMode::CoRotational) {
      const double omega = 0.5 * (d(1, 0) - d(0, 1));
      d = Mat2(0.0, -omega, omega, 0.0);
    }
    double prod = 0.0;
    if (mode == DragMode::FullGradient) {
      for (int mm = 1; mm < m.nqr(); ++mm) {
        const double r_f = m.rf(mm);
        const double geo =
            m.face_maxwellian_radial(mm) * r_f * m.dchi() * m.cutoff_at(r_f, cutoff_level);
        if (geo == 0.0) continue;
        for (int l = 0; l < m.nqc(); ++l) {
          const Vec2 qhat{std::cos(m.chi(l)), std::sin(m.chi(l))};
          const double a = qhat.dot(d * (qhat * r_f)) * geo;
          const int qa = m.idx(mm - 1, l), qb = m.idx(mm, l);
          prod += a * 0.5 * (f[qa] + f[qb]) * (f[qb] - f[qa]);
        }
      }
    }
    for (int mm = 0; mm < m.nqr(); ++mm) {
      const double rr = m.rc(mm);
      const double geo = m.cell_maxwellian(mm) * (m.rf(mm + 1) - m.rf(mm)) *
                         (mode == DragMode::FullGradient ? m.cutoff_at(rr, cutoff_level) : 1.0);
      if (geo == 0.0) continue;
      if (mode == DragMode::CoRotational) {
        // ring-constant coefficient; factored telescoping keeps roundoff tiny
        const double a = d(1, 0) * rr * geo;
        double ring = 0.0;
        for (int l = 0; l < m.nqc(); ++l) {
          const int qa = m.idx(mm, m.lm(l)), qb = m.idx(mm, l);
          ring += 0.5 * (f[qa] + f[qb]) * (f[qb] - f[qa]);
        }
        prod += a * ring;
      } else {
        for (int l = 0; l < m.nqc(); ++l) {
          const double cf = m.chi_face(l);
          const Vec2 ec{-std::sin(cf), std::cos(cf)};
          const Vec2 qf{rr * std::cos(cf), rr * std::sin(cf)};
          const double a = ec.dot(d * qf) * geo;
          const int qa = m.idx(mm, m.lm(l)), qb = m.idx(mm, l);
          prod += a * 0.5 * (f[qa] + f[qb]) * (f[qb] - f[qa]);
        }
      }
    }
    r.production += w[c] * prod;
  }
  r.residual = r.ddt_half_l2 + r.diss_x + r.diss_q - r.production;
  return r;
}

FpTimeDerivativeReport time_derivative_monitor(const DiskGrid& g, const FeneModel& m,
                                               const DistributionState& s,
                                               const HanzawaMap& map_t,
                                               const HanzawaMap& map_next, double dt) {
  FpTimeDerivativeReport r;
  r.l2_dt = l2_omega_m(g, m, s.f_dot);

  // Companion boundary defect: grad f_dot . n_eta + grad f . d/dt n_eta,
  // reduced over the ball in the weighted norm, sup over rim cells.
  const int i = g.nr() - 1;
  for (int j = 0; j < g.nt(); ++j) {
    const Vec2 n_now = map_next.deformed_n[j];
    const Vec2 dn_dt = (map_next.deformed_n[j] - map_t.deformed_n[j]) / dt;
    double acc = 0.0;
    for (int mm = 0; mm < m.nqr(); ++mm) {
      double ring = 0.0;
      for (int l = 0; l < m.nqc(); ++l) {
        const int q = m.idx(mm, l);
        // one-sided physical gradients at the rim cell
        Vec2 gf{0.0, 0.0}, gfd{0.0, 0.0};
        const double dr = g.dr();
        const double th = g.theta(j);
        const Vec2 er = g.unit_r(th), et = g.unit_t(th);
        auto dval = [&](const std::vector<double>& arr, int ii, int jj) {
          return arr[static_cast<size_t>(g.idx(ii, jj)) * m.size() + q];
        };
        const double fr = (3.0 * dval(s.f, i, j) - 4.0 * dval(s.f, i - 1, j) +
                           dval(s.f, i - 2, j)) / (2.0 * dr);
        const double ft = (dval(s.f, i, g.jp(j)) - dval(s.f, i, g.jm(j))) /
                          (2.0 * g.dtheta() * g.rc(i));
        gf = er * fr + et * ft;
        const double fdr = (3.0 * dval(s.f_dot, i, j) - 4.0 * dval(s.f_dot, i - 1, j) +
                            dval(s.f_dot, i - 2, j)) / (2.0 * dr);
        const double fdt = (dval(s.f_dot, i, g.jp(j)) - dval(s.f_dot, i, g.jm(j))) /
                           (2.0 * g.dtheta() * g.rc(i));
        gfd = er * fdr + et * fdt;
        // pull the reference gradients to physical ones
        const Mat2 Gi = map_next.grad_inv[g.idx(i, j)];
        const Vec2 gf_p = Gi.transpose() * gf;
        const Vec2 gfd_p = Gi.transpose() * gfd;
        const double defect = gfd_p.dot(n_now) + gf_p.dot(dn_dt);
        ring += defect * defect;
      }
      acc += m.mass_weight(mm) * ring;
    }
    r.bc_residual = std::max(r.bc_residual, std::sqrt(acc));
  }
  return r;
}

}  // namespace polyfsi
