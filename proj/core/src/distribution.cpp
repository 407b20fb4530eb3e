#include "polyfsi/distribution.hpp"

namespace polyfsi {

void DistributionState::seed_geometry(const DiskGrid& g, const HanzawaMap& map) {
  geom_w.resize(g.size());
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const int id = g.idx(i, j);
      geom_w[id] = g.cell_volume(i) * map.jac[id];
    }
}

double l2_omega_m(const DiskGrid& g, const FeneModel& m, const std::vector<double>& v) {
  if (v.size() != static_cast<size_t>(g.size()) * m.size())
    throw ShapeMismatch("distribution array size");
  double acc = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    for (int j = 0; j < g.nt(); ++j) {
      const double* fq = v.data() + static_cast<size_t>(g.idx(i, j)) * m.size();
      double cell = 0.0;
      for (int mm = 0; mm < m.nqr(); ++mm) {
        double ring = 0.0;
        for (int l = 0; l < m.nqc(); ++l) {
          const double x = fq[m.idx(mm, l)];
          ring += x * x;
        }
        cell += m.mass_weight(mm) * ring;
      }
      acc += g.cell_volume(i) * cell;
    }
  }
  return std::sqrt(acc);
}

namespace {

// Weighted configuration-space Dirichlet form at one x-cell.
double q_dirichlet(const FeneModel& m, const double* fq) {
  double acc = 0.0;
  for (int mm = 1; mm < m.nqr(); ++mm) {
    const double cond = m.face_maxwellian_radial(mm) * m.rf(mm) * m.dchi() /
                        (m.rc(mm) - m.rc(mm - 1));
    for (int l = 0; l < m.nqc(); ++l) {
      const double d = fq[m.idx(mm, l)] - fq[m.idx(mm - 1, l)];
      acc += cond * d * d;
    }
  }
  for (int mm = 0; mm < m.nqr(); ++mm) {
    const double dr = m.rf(mm + 1) - m.rf(mm);
    const double cond = m.cell_maxwellian(mm) * dr / (m.rc(mm) * m.dchi());
    for (int l = 0; l < m.nqc(); ++l) {
      const double d = fq[m.idx(mm, m.lp(l))] - fq[m.idx(mm, l)];
      acc += cond * d * d;
    }
  }
  return acc;
}

}  // namespace

WeightedNorms weighted_norms(const DiskGrid& g, const FeneModel& m, const DistributionState& s) {
  if (s.nx != g.size() || s.nq != m.size()) throw ShapeMismatch("state vs grids");
  WeightedNorms out;
  out.l2 = l2_omega_m(g, m, s.f);

  // x-gradient per configuration node, centered polar differences.
  double gacc = 0.0;
  for (int q = 0; q < s.nq; ++q) {
    ScalarField comp(g);
    for (int x = 0; x < s.nx; ++x) comp[x] = s.at(x, q);
    const VecField gr = gradient(g, comp);
    const int mm = q / m.nqc();
    for (int i = 0; i < g.nr(); ++i)
      for (int j = 0; j < g.nt(); ++j) {
        const Vec2& v = gr[g.idx(i, j)];
        gacc += g.cell_volume(i) * m.mass_weight(mm) * v.dot(v);
      }
  }
  out.grad_x = std::sqrt(gacc);

  double qacc = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      qacc += g.cell_volume(i) * q_dirichlet(m, s.slab(g.idx(i, j)));
  out.grad_q = std::sqrt(qacc);
  return out;
}

Mat2 kramers_stress_at(const FeneModel& m, const double* fq) {
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (int mm = 0; mm < m.nqr(); ++mm)
    for (int l = 0; l < m.nqc(); ++l) {
      const double f = fq[m.idx(mm, l)];
      s11 += m.stress_w11(mm, l) * f;
      s12 += m.stress_w12(mm, l) * f;
      s22 += m.stress_w22(mm, l) * f;
    }
  return {s11, s12, s12, s22};
}

MatField kramers_stress(const DiskGrid& g, const FeneModel& m, const DistributionState& s) {
  if (s.nx != g.size() || s.nq != m.size()) throw ShapeMismatch("state vs grids");
  MatField out(g);
  for (int x = 0; x < s.nx; ++x) out[x] = kramers_stress_at(m, s.slab(x));
  return out;
}

}  // namespace polyfsi
