#include <doctest.h>

#include <cmath>
#include <random>

#include "polyfsi/geometry.hpp"
#include "support/oracles.hpp"

using namespace polyfsi;

namespace {

constexpr double kPi = 3.14159265358979323846;

StructureState mode_state(int n, double amp, int mode, double amp_dot = 0.0) {
  StructureState s(n);
  for (int j = 0; j < n; ++j) {
    const double y = 2.0 * kPi * j / n;
    s.eta[j] = amp * std::cos(mode * y);
    s.eta_dot[j] = amp_dot * std::cos(mode * y);
  }
  return s;
}

}  // namespace

TEST_CASE("projection on the unit disk") {
  ReferenceDomain dom(1.0, 48, 0.35, 0.1, 2.0);

  SUBCASE("radially symmetric point") {
    const ProjectionResult p = dom.project({0.9, 0.0});
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p.s == doctest::Approx(-0.1).epsilon(1e-14));
  }
  SUBCASE("boundary point is a fixed point") {
    const Vec2 x{std::cos(1.3), std::sin(1.3)};
    const ProjectionResult p = dom.project(x);
    CHECK(p.s == doctest::Approx(0.0).epsilon(1e-14));
    CHECK((p.foot - x).norm() < 1e-14);
  }
  SUBCASE("outside the tube") {
    const Vec2 x{0.6 * std::cos(1.2), 0.6 * std::sin(1.2)};  // dist 0.4 >= L = 0.35
    CHECK_THROWS_AS(dom.project(x), OutsideTube);
  }
  SUBCASE("ambiguous at the centre") {
    CHECK_THROWS_AS(dom.project({0.0, 0.0}), AmbiguousProjection);
  }
}

TEST_CASE("cutoff profile plateaus") {
  ReferenceDomain dom(1.0, 48, 0.5, 0.15, 2.0);
  CHECK(dom.cutoff(-0.5 * 0.9) == 0.0);
  CHECK(dom.cutoff(-0.4) == 0.0);
  CHECK(dom.cutoff(-0.05) == 1.0);
  CHECK(dom.cutoff(0.0) == 1.0);
  // monotone in between
  double prev = 0.0;
  for (double s = -0.4; s <= -0.1; s += 0.01) {
    const double c = dom.cutoff(s);
    CHECK(c >= prev - 1e-15);
    prev = c;
  }
}

TEST_CASE("interface transform at zero displacement is the identity") {
  DiskGrid g(16, 32, 1.0);
  ReferenceDomain dom(1.0, 32, 0.5, 0.15, 2.0);
  const StructureState s(32);
  const HanzawaMap m = build_hanzawa(dom, g, s);
  for (int id = 0; id < g.size(); ++id) {
    const int i = id / g.nt(), j = id % g.nt();
    CHECK((m.forward[id] - g.center(i, j)).norm() < 1e-13);
    CHECK(m.jac[id] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((m.tensor_a[id] - Mat2::identity()).frobenius() < 1e-11);
    CHECK((m.tensor_b[id] - Mat2::identity()).frobenius() < 1e-11);
  }
}

TEST_CASE("boundary node maps by the displacement along the normal") {
  DiskGrid g(16, 32, 1.0);
  ReferenceDomain dom(1.0, 32, 0.5, 0.15, 2.0);
  const StructureState s = mode_state(32, 0.05, 3);
  const HanzawaMap m = build_hanzawa(dom, g, s);
  for (int j = 0; j < 32; ++j) {
    const double y = dom.boundary().y(j);
    const Vec2 expect = dom.boundary_point(y) + dom.outward_normal(y) * s.eta[j];
    CHECK((m.forward_rim[j] - expect).norm() < 1e-14);
  }
}

TEST_CASE("jacobian matches the straight-line determinant oracle") {
  DiskGrid g(24, 48, 1.0);
  ReferenceDomain dom(1.0, 48, 0.5, 0.15, 2.0);
  const StructureState s = mode_state(48, 0.1, 1);
  const HanzawaMap m = build_hanzawa(dom, g, s);
  for (int i = 2; i < g.nr() - 2; i += 3)
    for (int j = 0; j < g.nt(); j += 5) {
      const double oracle =
          oracles::fd_map_determinant(g, m.forward, m.forward_rim, i, j);
      CHECK(m.jac[g.idx(i, j)] == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("round trip of forward and inverse maps") {
  DiskGrid g(20, 40, 1.0);
  ReferenceDomain dom(1.0, 40, 0.5, 0.15, 2.0);
  const StructureState s = mode_state(40, 0.08, 2);
  const HanzawaMap m = build_hanzawa(dom, g, s);
  double worst = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const Vec2 x = g.center(i, j);
      const Vec2 back = m.inverse(m.forward_at(x));
      worst = std::max(worst, (back - x).norm());
    }
  CHECK(worst <= 1e-11);
}

TEST_CASE("discrete Piola residual converges at second order") {
  std::vector<double> resid;
  for (int n : {24, 48, 96}) {
    DiskGrid g(n, 2 * n, 1.0);
    ReferenceDomain dom(1.0, 2 * n, 0.5, 0.15, 2.0);
    const StructureState s = mode_state(2 * n, 0.1, 2);
    const HanzawaMap m = build_hanzawa(dom, g, s);
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      ScalarField bx(g), by(g);
      std::vector<double> rx(2 * n), ry(2 * n);
      for (int id = 0; id < g.size(); ++id) {
        bx[id] = m.tensor_b[id](0, k);
        by[id] = m.tensor_b[id](1, k);
      }
      for (int j = 0; j < 2 * n; ++j) {
        rx[j] = m.tensor_b_rim[j](0, k);
        ry[j] = m.tensor_b_rim[j](1, k);
      }
      const VecField gx = gradient(g, bx, false, &rx);
      const VecField gy = gradient(g, by, false, &ry);
      for (int id = 0; id < g.size(); ++id)
        worst = std::max(worst, std::fabs(gx[id].x + gy[id].y));
    }
    resid.push_back(worst);
  }
  const double order1 = std::log2(resid[0] / resid[1]);
  const double order2 = std::log2(resid[1] / resid[2]);
  INFO("piola residuals ", resid[0], " ", resid[1], " ", resid[2]);
  CHECK(order1 > 1.8);
  CHECK(order2 > 1.8);
}

TEST_CASE("degeneracy detection is monotone along a pinching family") {
  DiskGrid g(16, 48, 1.0);
  ReferenceDomain dom(1.0, 48, 0.5, 0.45, 20.0);
  // large-amplitude short wave pinches the deformed boundary
  auto fires = [&](double t) {
    StructureState s = mode_state(48, 0.42 * t, 8);
    try {
      build_hanzawa(dom, g, s);
      return false;
    } catch (const DegenerateMap&) {
      return true;
    } catch (const DegenerateBoundary&) {
      return true;
    }
  };
  double tstar = -1.0;
  bool after = true;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    const bool f = fires(t);
    if (f && tstar < 0.0) tstar = t;
    if (tstar > 0.0 && !f) after = false;
  }
  CHECK(tstar > 0.0);
  CHECK(tstar < 1.0);
  CHECK(after);  // once degenerate, stays degenerate
}

TEST_CASE("deformed normal") {
  ReferenceDomain dom(1.0, 48, 0.5, 0.2, 2.0);

  SUBCASE("zero displacement") {
    std::vector<double> eta(48, 0.0);
    const DeformedNormal dn = deformed_normal(dom, eta);
    for (int j = 0; j < 48; ++j) {
      CHECK((dn.n[j] - dom.outward_normal(dom.boundary().y(j))).norm() < 1e-14);
      CHECK(dn.area_factor[j] == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("uniform dilation") {
    std::vector<double> eta(48, 0.1);
    const DeformedNormal dn = deformed_normal(dom, eta);
    for (int j = 0; j < 48; ++j) {
      CHECK((dn.n[j] - dom.outward_normal(dom.boundary().y(j))).norm() < 1e-13);
      CHECK(dn.area_factor[j] == doctest::Approx(1.1).epsilon(1e-13));
    }
  }
  SUBCASE("matches the analytic derivative of the parametrization") {
    // eta = 0.1 cos y; compare against the closed-form tangent
    const int n = 48;
    std::vector<double> eta(n);
    for (int j = 0; j < n; ++j) eta[j] = 0.1 * std::cos(dom.boundary().y(j));
    const DeformedNormal dn = deformed_normal(dom, eta);
    for (int j = 0; j < n; ++j) {
      const double y = dom.boundary().y(j);
      const double e = 0.1 * std::cos(y), ep = -0.1 * std::sin(y);
      const Vec2 tau{-std::sin(y), std::cos(y)}, nor{std::cos(y), std::sin(y)};
      const Vec2 t = tau * (1.0 + e) + nor * ep;
      CHECK(dn.area_factor[j] == doctest::Approx(t.norm()).epsilon(1e-10));
      const Vec2 nref = Vec2{t.y, -t.x} / t.norm();
      CHECK((dn.n[j] - nref).norm() < 1e-10);
    }
  }
}

TEST_CASE("transform difference ratios") {
  DiskGrid g(16, 32, 1.0);
  ReferenceDomain dom(1.0, 32, 0.5, 0.15, 2.0);

  SUBCASE("identical displacements give zero") {
    const StructureState a = mode_state(32, 0.05, 2);
    const LipschitzReport r = verify_lipschitz(dom, g, a, a, 2);
    for (double v : r.ratio) CHECK(v == 0.0);
  }
  SUBCASE("ratio stays finite as a constant shift shrinks") {
    const StructureState a = mode_state(32, 0.05, 2);
    std::vector<double> ratios;
    for (double c : {1e-2, 1e-3, 1e-4}) {
      StructureState b = a;
      for (auto& e : b.eta) e += c;
      ratios.push_back(verify_lipschitz(dom, g, a, b, 0).ratio[0]);
    }
    CHECK(std::fabs(ratios[0] - ratios[1]) < 0.05 * ratios[0]);
    CHECK(std::fabs(ratios[1] - ratios[2]) < 0.05 * ratios[1]);
  }
  SUBCASE("random admissible pairs share one bound") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> dist(0.0, 1.0);
    double cmax = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      StructureState a(32), b(32);
      for (int mode = 0; mode <= 3; ++mode) {
        const double ca = 0.02 * dist(rng), cb = 0.02 * dist(rng);
        const double sa = 0.02 * dist(rng), sb = 0.02 * dist(rng);
        for (int j = 0; j < 32; ++j) {
          const double y = dom.boundary().y(j);
          a.eta[j] += ca * std::cos(mode * y) + sa * std::sin(mode * y);
          b.eta[j] += cb * std::cos(mode * y) + sb * std::sin(mode * y);
        }
      }
      const LipschitzReport r = verify_lipschitz(dom, g, a, b, 1);
      cmax = std::max(cmax, std::max(r.ratio[0], r.ratio[1]));
    }
    INFO("empirical constant ", cmax);
    CHECK(cmax < 10.0);
    CHECK(cmax > 0.0);
  }
  SUBCASE("inadmissible displacement is rejected") {
    StructureState a = mode_state(32, 0.2, 1);  // above the sup margin 0.15
    const StructureState b(32);
    CHECK_THROWS_AS(verify_lipschitz(dom, g, a, b, 0), InadmissibleDisplacement);
  }
}
