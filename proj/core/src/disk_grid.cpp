#include "polyfsi/disk_grid.hpp"

#include <numbers>

#include "polyfsi/fourier.hpp"

namespace polyfsi {

DiskGrid::DiskGrid(int nr, int nt, double radius)
    : nr_(nr), nt_(nt), radius_(radius) {
  if (nr < 4 || nt < 4 || radius <= 0.0)
    throw ConfigError("DiskGrid needs nr,nt >= 4 and radius > 0");
  dr_ = radius / nr;
  dt_ = 2.0 * std::numbers::pi / nt;

  vol_.resize(nr_);
  rface_area_.resize(nr_ + 1);
  const double s = std::sin(dt_);
  for (int i = 0; i < nr_; ++i) {
    const double r0 = rf(i), r1 = rf(i + 1);
    vol_[i] = 0.5 * (r1 * r1 - r0 * r0) * s;
  }
  const double chord = 2.0 * std::sin(dt_ / 2.0);
  for (int i = 0; i <= nr_; ++i) rface_area_[i] = rf(i) * chord;

  spec_d_ = spectral_diff_matrix(nt_, 2.0 * std::numbers::pi);
}

double DiskGrid::total_volume() const {
  double s = 0.0;
  for (int i = 0; i < nr_; ++i) s += vol_[i] * nt_;
  return s;
}

namespace {

// d/dtheta at (i,j), either spectral or 2nd-order centered.
double dtheta_at(const DiskGrid& g, const ScalarField& f, int i, int j, bool spectral) {
  if (spectral) {
    const auto& D = g.spectral_dtheta();
    double s = 0.0;
    for (int k = 0; k < g.nt(); ++k) s += D[static_cast<size_t>(j) * g.nt() + k] * f[g.idx(i, k)];
    return s;
  }
  return (f[g.idx(i, g.jp(j))] - f[g.idx(i, g.jm(j))]) / (2.0 * g.dtheta());
}

double dr_at(const DiskGrid& g, const ScalarField& f, int i, int j,
             const std::vector<double>* rim) {
  const double dr = g.dr();
  if (i == 0) {
    if (g.has_pole_pair()) {
      // Values along the diameter through theta_j are uniformly spaced.
      return (f[g.idx(1, j)] - f[g.idx(0, g.jop(j))]) / (2.0 * dr);
    }
    return (f[g.idx(1, j)] - f[g.idx(0, j)]) / dr;
  }
  if (i == g.nr() - 1) {
    if (rim) {
      // Rim value lives at r = R, half a cell beyond the last center.
      const double fb = (*rim)[j];
      return (fb - f[g.idx(i - 1, j)] + 3.0 * (fb - f[g.idx(i, j)])) / (3.0 * dr);
    }
    return (3.0 * f[g.idx(i, j)] - 4.0 * f[g.idx(i - 1, j)] + f[g.idx(i - 2, j)]) / (2.0 * dr);
  }
  return (f[g.idx(i + 1, j)] - f[g.idx(i - 1, j)]) / (2.0 * dr);
}

}  // namespace

VecField gradient(const DiskGrid& g, const ScalarField& f, bool spectral_theta,
                  const std::vector<double>* rim_value) {
  VecField out(g);
  for (int i = 0; i < g.nr(); ++i) {
    for (int j = 0; j < g.nt(); ++j) {
      const double th = g.theta(j);
      const double fr = dr_at(g, f, i, j, rim_value);
      const double ft = dtheta_at(g, f, i, j, spectral_theta) / g.rc(i);
      out[g.idx(i, j)] = g.unit_r(th) * fr + g.unit_t(th) * ft;
    }
  }
  return out;
}

MatField jacobian(const DiskGrid& g, const VecField& u, bool spectral_theta,
                  const std::vector<Vec2>* rim_value) {
  ScalarField ux(g), uy(g);
  for (int id = 0; id < g.size(); ++id) {
    ux[id] = u[id].x;
    uy[id] = u[id].y;
  }
  std::vector<double> rx, ry;
  const std::vector<double>* prx = nullptr;
  const std::vector<double>* pry = nullptr;
  if (rim_value) {
    rx.resize(rim_value->size());
    ry.resize(rim_value->size());
    for (size_t j = 0; j < rim_value->size(); ++j) {
      rx[j] = (*rim_value)[j].x;
      ry[j] = (*rim_value)[j].y;
    }
    prx = &rx;
    pry = &ry;
  }
  const VecField gx = gradient(g, ux, spectral_theta, prx);
  const VecField gy = gradient(g, uy, spectral_theta, pry);
  MatField out(g);
  for (int id = 0; id < g.size(); ++id)
    out[id] = Mat2(gx[id].x, gx[id].y, gy[id].x, gy[id].y);
  return out;
}

double l2_norm(const DiskGrid& g, const ScalarField& f) {
  double s = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const double v = f[g.idx(i, j)];
      s += g.cell_volume(i) * v * v;
    }
  return std::sqrt(s);
}

double l2_norm(const DiskGrid& g, const VecField& f) {
  double s = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      const Vec2& v = f[g.idx(i, j)];
      s += g.cell_volume(i) * v.dot(v);
    }
  return std::sqrt(s);
}

double integral(const DiskGrid& g, const ScalarField& f) {
  double s = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) s += g.cell_volume(i) * f[g.idx(i, j)];
  return s;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.v) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace polyfsi
