#include "polyfsi/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "polyfsi/trig_interp.hpp"

namespace polyfsi {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double y) {
  y = std::fmod(y, kTwoPi);
  return y < 0.0 ? y + kTwoPi : y;
}
}  // namespace

TrigInterp TrigInterp::build(const std::vector<double>& samples, double period) {
  TrigInterp t;
  t.n = static_cast<int>(samples.size());
  t.period = period;
  const int m = t.n / 2;
  t.ac.assign(m, 0.0);
  t.as.assign(m, 0.0);
  double a0 = 0.0;
  for (int j = 0; j < t.n; ++j) a0 += samples[j];
  t.a0 = a0 / t.n;
  for (int k = 1; k <= m; ++k) {
    double c = 0.0, s = 0.0;
    for (int j = 0; j < t.n; ++j) {
      const double arg = kTwoPi * k * j / t.n;
      c += samples[j] * std::cos(arg);
      s += samples[j] * std::sin(arg);
    }
    const bool nyquist = (t.n % 2 == 0) && (k == m);
    t.ac[k - 1] = (nyquist ? 1.0 : 2.0) * c / t.n;
    t.as[k - 1] = (nyquist ? 1.0 : 2.0) * s / t.n;
  }
  return t;
}

double TrigInterp::eval(double y) const {
  const double w = kTwoPi * y / period;
  double v = a0;
  for (size_t k = 1; k <= ac.size(); ++k)
    v += ac[k - 1] * std::cos(k * w) + as[k - 1] * std::sin(k * w);
  return v;
}

double TrigInterp::eval_derivative(double y) const {
  const double w = kTwoPi * y / period;
  const double scale = kTwoPi / period;
  double v = 0.0;
  for (size_t k = 1; k <= ac.size(); ++k)
    v += k * scale * (-ac[k - 1] * std::sin(k * w) + as[k - 1] * std::cos(k * w));
  return v;
}

ReferenceDomain::ReferenceDomain(double disk_radius, int boundary_nodes, double tube_radius,
                                 double sup_margin, double grad_bound)
    : radius_(disk_radius),
      tube_(tube_radius),
      alpha_(sup_margin),
      grad_bound_(grad_bound),
      omega_(boundary_nodes, kTwoPi) {
  if (disk_radius <= 0.0) throw ConfigError("disk radius must be positive");
  // The exact tubular radius of a disk equals its radius; sample-check the
  // user-supplied L against it.
  if (!(tube_ > 0.0) || tube_ >= radius_)
    throw ConfigError("tube radius must satisfy 0 < L < disk radius");
  if (!(alpha_ > 0.0) || alpha_ >= tube_)
    throw ConfigError("sup margin must satisfy 0 < alpha < L");
  if (!(grad_bound_ > 0.0)) throw ConfigError("gradient bound must be positive");
}

double ReferenceDomain::cutoff(double s) const {
  if (s <= -0.8 * tube_) return 0.0;
  if (s >= -0.2 * tube_) return 1.0;
  const double t = (s + 0.8 * tube_) / (0.6 * tube_);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double ReferenceDomain::cutoff_derivative(double s) const {
  if (s <= -0.8 * tube_ || s >= -0.2 * tube_) return 0.0;
  const double t = (s + 0.8 * tube_) / (0.6 * tube_);
  return 30.0 * t * t * (1.0 - t) * (1.0 - t) / (0.6 * tube_);
}

ProjectionResult ReferenceDomain::project(const Vec2& x) const {
  const double r = x.norm();
  if (r < 1e-12 * radius_)
    throw AmbiguousProjection("projection is not unique at the disk centre");
  const double s = r - radius_;
  if (std::fabs(s) >= tube_)
    throw OutsideTube("point is outside the tubular neighborhood");
  ProjectionResult out;
  out.y = wrap_angle(std::atan2(x.y, x.x));
  out.s = s;
  out.foot = x * (radius_ / r);
  return out;
}

bool ReferenceDomain::admissible(const std::vector<double>& eta) const {
  if (CircleBoundary::max_abs(eta) >= alpha_) return false;
  const auto d = omega_.derivative(eta);
  return CircleBoundary::max_abs(d) < grad_bound_;
}

void ReferenceDomain::require_admissible(const std::vector<double>& eta) const {
  if (!admissible(eta))
    throw InadmissibleDisplacement("displacement exceeds sup margin or gradient bound");
}

DeformedNormal deformed_normal(const ReferenceDomain& dom, const std::vector<double>& eta,
                               double tol) {
  const CircleBoundary& omega = dom.boundary();
  const int n = omega.size();
  if (static_cast<int>(eta.size()) != n) throw ShapeMismatch("eta size vs boundary grid");
  const auto deta = omega.derivative(eta);
  DeformedNormal out;
  out.n.resize(n);
  out.area_factor.resize(n);
  out.n_dot_n.resize(n);
  for (int j = 0; j < n; ++j) {
    const double y = omega.y(j);
    const Vec2 tau = dom.tangent(y);
    const Vec2 nor = dom.outward_normal(y);
    // d/dy [phi + eta n] for the circle: (R + eta) tau + eta' n.
    const Vec2 t = tau * (dom.disk_radius() + eta[j]) + nor * deta[j];
    const double len = t.norm();
    if (len <= tol) throw DegenerateBoundary("parametrization derivative vanished");
    const Vec2 nn = Vec2{t.y, -t.x} / len;
    out.n[j] = nn;
    out.area_factor[j] = len;
    out.n_dot_n[j] = nn.dot(nor);
    if (out.n_dot_n[j] <= tol)
      throw DegenerateBoundary("deformed normal turned tangential");
  }
  return out;
}

namespace {

struct EtaInterp {
  TrigInterp val, vel;
};

}  // namespace

double HanzawaMap::eta_at(double y) const {
  return TrigInterp::build(eta, kTwoPi).eval(y);
}

double HanzawaMap::eta_dot_at(double y) const {
  return TrigInterp::build(eta_dot, kTwoPi).eval(y);
}

Vec2 HanzawaMap::forward_at(const Vec2& xbar) const {
  const double r = xbar.norm();
  const double L = dom->tube_radius();
  if (r <= dom->disk_radius() - L) return xbar;
  const ProjectionResult pr = dom->project(xbar);
  const double e = eta_at(pr.y);
  const double c = dom->cutoff(pr.s);
  return pr.foot + dom->outward_normal(pr.y) * (pr.s + e * c);
}

Vec2 HanzawaMap::inverse(const Vec2& x, double tol) const {
  const double L = dom->tube_radius();
  const double R = dom->disk_radius();
  const double r = x.norm();
  if (r <= R - 0.8 * L) return x;  // cutoff vanishes there, map is identity
  const double y = wrap_angle(std::atan2(x.y, x.x));
  const double e = eta_at(y);
  const double starget = r - R;
  // Solve s + eta(y)*cutoff(s) = starget on (-L, 0]; monotone for admissible eta.
  double lo = -0.8 * L, hi = std::min(0.0, starget - std::min(0.0, e)) + 1e-15;
  hi = std::max(hi, 0.0);
  auto g = [&](double s) { return s + e * dom->cutoff(s) - starget; };
  double glo = g(lo), ghi = g(hi);
  if (glo > 0.0 || ghi < 0.0) {
    // widen toward the full admissible bracket before giving up
    lo = -L + 1e-14;
    hi = 0.0;
    glo = g(lo);
    ghi = g(hi);
    if (glo > 0.0 || ghi < 0.0)
      throw DomainError("inverse map target outside deformed domain");
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double gs = g(s);
    if (std::fabs(gs) < tol) break;
    if (gs > 0.0)
      hi = s;
    else
      lo = s;
    const double dg = 1.0 + e * dom->cutoff_derivative(s);
    double snew = (dg > 1e-8) ? s - gs / dg : 0.5 * (lo + hi);
    if (snew <= lo || snew >= hi) snew = 0.5 * (lo + hi);
    s = snew;
  }
  return dom->outward_normal(y) * (R + s);
}

HanzawaMap build_hanzawa(const ReferenceDomain& dom, const DiskGrid& grid,
                         const StructureState& state) {
  const int ny = dom.boundary().size();
  if (state.size() != ny) throw ShapeMismatch("structure state vs boundary grid");
  if (grid.nt() != ny)
    throw ShapeMismatch("disk grid angular resolution must match boundary grid");
  if (CircleBoundary::max_abs(state.eta) >= dom.tube_radius())
    throw InadmissibleDisplacement("sup |eta| must stay below the tube radius");

  HanzawaMap m;
  m.grid = &grid;
  m.dom = &dom;
  m.eta = state.eta;
  m.eta_dot = state.eta_dot;

  const double R = dom.disk_radius();
  m.forward = VecField(grid);
  m.psi_dot = VecField(grid);
  for (int i = 0; i < grid.nr(); ++i) {
    const double r = grid.rc(i);
    const double s = r - R;
    const double c = dom.cutoff(s);
    for (int j = 0; j < grid.nt(); ++j) {
      const Vec2 er = grid.unit_r(grid.theta(j));
      m.forward[grid.idx(i, j)] = er * (r + state.eta[j] * c);
      m.psi_dot[grid.idx(i, j)] = er * (state.eta_dot[j] * c);
    }
  }
  m.forward_rim.resize(ny);
  for (int j = 0; j < ny; ++j)
    m.forward_rim[j] = dom.boundary_point(dom.boundary().y(j)) +
                       dom.outward_normal(dom.boundary().y(j)) * state.eta[j];

  // Spectral differentiation in the angle: the displacement is band-limited
  // grid data, so the zero-displacement map reduces to the identity exactly.
  const MatField F = jacobian(grid, m.forward, /*spectral_theta=*/true, &m.forward_rim);
  m.jac = ScalarField(grid);
  m.grad_inv = MatField(grid);
  m.tensor_a = MatField(grid);
  m.tensor_b = MatField(grid);
  m.inv_dot_of_fwd = VecField(grid);
  m.min_jac = std::numeric_limits<double>::max();
  for (int id = 0; id < grid.size(); ++id) {
    const double J = F[id].det();
    m.jac[id] = J;
    m.min_jac = std::min(m.min_jac, J);
  }
  if (m.min_jac <= 0.0)
    throw DegenerateMap("map gradient lost orientation, min det = " + std::to_string(m.min_jac));
  for (int id = 0; id < grid.size(); ++id) {
    const Mat2 G = F[id].inverse();
    m.grad_inv[id] = G;
    m.tensor_b[id] = G * m.jac[id];
    m.tensor_a[id] = m.tensor_b[id] * G.transpose();
    m.inv_dot_of_fwd[id] = (G * m.psi_dot[id]) * -1.0;
  }

  // Rim tensors from one-sided radial stencils plus centered rim tangents.
  m.jac_rim.resize(ny);
  m.tensor_a_rim.resize(ny);
  m.tensor_b_rim.resize(ny);
  const double dr = grid.dr();
  const int n1 = grid.nr() - 1, n2 = grid.nr() - 2;
  std::vector<double> rim_x(ny), rim_y(ny);
  for (int j = 0; j < ny; ++j) {
    rim_x[j] = m.forward_rim[j].x;
    rim_y[j] = m.forward_rim[j].y;
  }
  const auto drim_x = dom.boundary().derivative(rim_x);
  const auto drim_y = dom.boundary().derivative(rim_y);
  for (int j = 0; j < ny; ++j) {
    const double th = grid.theta(j);
    const Vec2 er = grid.unit_r(th), et = grid.unit_t(th);
    const Vec2 fr = m.forward_rim[j];
    const Vec2 f1 = m.forward[grid.idx(n1, j)];
    const Vec2 f2 = m.forward[grid.idx(n2, j)];
    const Vec2 dpsi_dr = (fr * 8.0 - f1 * 9.0 + f2) / (3.0 * dr);
    const Vec2 dpsi_dt = Vec2{drim_x[j], drim_y[j]} / R;
    Mat2 Fr;
    Fr(0, 0) = dpsi_dr.x * er.x + dpsi_dt.x * et.x;
    Fr(0, 1) = dpsi_dr.x * er.y + dpsi_dt.x * et.y;
    Fr(1, 0) = dpsi_dr.y * er.x + dpsi_dt.y * et.x;
    Fr(1, 1) = dpsi_dr.y * er.y + dpsi_dt.y * et.y;
    const double J = Fr.det();
    if (J <= 0.0) throw DegenerateMap("rim map gradient lost orientation");
    const Mat2 G = Fr.inverse();
    m.jac_rim[j] = J;
    m.tensor_b_rim[j] = G * J;
    m.tensor_a_rim[j] = m.tensor_b_rim[j] * G.transpose();
  }

  const DeformedNormal dn = deformed_normal(dom, state.eta, 1e-12);
  m.deformed_n = dn.n;
  m.area_factor = dn.area_factor;
  return m;
}

LipschitzReport verify_lipschitz(const ReferenceDomain& dom, const DiskGrid& grid,
                                 const StructureState& eta, const StructureState& zeta,
                                 int order, bool with_time_derivative) {
  if (order < 0 || order > 2) throw ConfigError("verify_lipschitz supports orders 0..2");
  dom.require_admissible(eta.eta);
  dom.require_admissible(zeta.eta);

  const HanzawaMap me = build_hanzawa(dom, grid, eta);
  const HanzawaMap mz = build_hanzawa(dom, grid, zeta);

  auto sobolev_map = [&](const VecField& d, const std::vector<Vec2>& rim, int s) {
    double acc = l2_norm(grid, d);
    acc = acc * acc;
    if (s >= 1) {
      const MatField Jc = jacobian(grid, d, false, &rim);
      double g = 0.0;
      for (int i = 0; i < grid.nr(); ++i)
        for (int j = 0; j < grid.nt(); ++j) {
          const double f = Jc[grid.idx(i, j)].frobenius();
          g += grid.cell_volume(i) * f * f;
        }
      acc += g;
      if (s >= 2) {
        // second derivatives entrywise, one-sided at the rim
        for (int c = 0; c < 4; ++c) {
          ScalarField comp(grid);
          for (int id = 0; id < grid.size(); ++id) comp[id] = Jc[id].a[c];
          const VecField g2 = gradient(grid, comp, false, nullptr);
          for (int i = 0; i < grid.nr(); ++i)
            for (int j = 0; j < grid.nt(); ++j) {
              const Vec2& v = g2[grid.idx(i, j)];
              acc += grid.cell_volume(i) * v.dot(v);
            }
        }
      }
    }
    return std::sqrt(acc);
  };

  auto sobolev_omega = [&](const std::vector<double>& d, int s) {
    const CircleBoundary& om = dom.boundary();
    double acc = om.l2_norm(d);
    acc = acc * acc;
    std::vector<double> cur = d;
    for (int k = 1; k <= s; ++k) {
      cur = om.derivative(cur);
      const double nk = om.l2_norm(cur);
      acc += nk * nk;
    }
    return std::sqrt(acc);
  };

  LipschitzReport rep;
  rep.ratio.assign(order + 1, 0.0);

  VecField dmap(grid);
  for (int id = 0; id < grid.size(); ++id) dmap[id] = me.forward[id] - mz.forward[id];
  std::vector<Vec2> drim(me.forward_rim.size());
  for (size_t j = 0; j < drim.size(); ++j) drim[j] = me.forward_rim[j] - mz.forward_rim[j];
  std::vector<double> deta(eta.eta.size());
  for (size_t j = 0; j < deta.size(); ++j) deta[j] = eta.eta[j] - zeta.eta[j];

  for (int s = 0; s <= order; ++s) {
    const double den = sobolev_omega(deta, s);
    rep.ratio[s] = (den > 0.0) ? sobolev_map(dmap, drim, s) / den : 0.0;
  }

  if (with_time_derivative) {
    VecField ddot(grid);
    for (int id = 0; id < grid.size(); ++id) ddot[id] = me.psi_dot[id] - mz.psi_dot[id];
    std::vector<Vec2> ddot_rim(drim.size());
    for (size_t j = 0; j < ddot_rim.size(); ++j) {
      const Vec2 nor = dom.outward_normal(dom.boundary().y(static_cast<int>(j)));
      ddot_rim[j] = nor * (eta.eta_dot[j] - zeta.eta_dot[j]);
    }
    std::vector<double> detad(eta.eta_dot.size());
    for (size_t j = 0; j < detad.size(); ++j) detad[j] = eta.eta_dot[j] - zeta.eta_dot[j];
    const double den = sobolev_omega(detad, order);
    rep.ratio_dt = (den > 0.0) ? sobolev_map(ddot, ddot_rim, order) / den : 0.0;
  }
  return rep;
}

}  // namespace polyfsi
