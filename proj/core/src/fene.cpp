#include "polyfsi/fene.hpp"

#include <cmath>
#include <numbers>

namespace polyfsi {

namespace {

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace

double fene_potential(double s, double b) {
  if (s < 0.0 || s >= 0.5 * b)
    throw DomainError("spring elongation argument must lie in [0, b/2)");
  return -0.5 * b * std::log1p(-2.0 * s / b);
}

double fene_potential_derivative(double s, double b) {
  if (s < 0.0 || s >= 0.5 * b)
    throw DomainError("spring elongation argument must lie in [0, b/2)");
  return 1.0 / (1.0 - 2.0 * s / b);
}

FeneModel::FeneModel(double b, int n_radial, int n_angular)
    : b_(b), nqr_(n_radial), nqc_(n_angular) {
  if (!(b > 2.0)) throw ConfigError("extensibility parameter must satisfy b > 2");
  if (n_radial < 4 || n_angular < 4) throw ConfigError("ball grid needs >= 4 cells per direction");
  dchi_ = 2.0 * std::numbers::pi / nqc_;
  const double rb = std::sqrt(b_);

  rf_.resize(nqr_ + 1);
  rc_.resize(nqr_);
  for (int m = 0; m <= nqr_; ++m)
    rf_[m] = rb * std::sin(0.5 * std::numbers::pi * m / nqr_);
  rf_[nqr_] = rb;
  for (int m = 0; m < nqr_; ++m)
    rc_[m] = rb * std::sin(0.5 * std::numbers::pi * (m + 0.5) / nqr_);

  auto one_minus = [&](double r) { return std::max(0.0, 1.0 - r * r / b_); };

  area_.resize(nqr_);
  cell_m_.resize(nqr_);
  massw_.resize(nqr_);
  mface_.resize(nqr_ + 1);
  const double cmass = b_ / (b_ + 2.0);
  double zsum = 0.0;
  for (int m = 0; m < nqr_; ++m) {
    area_[m] = 0.5 * (rf_[m + 1] * rf_[m + 1] - rf_[m] * rf_[m]) * dchi_;
    // closed form: int r (1-r^2/b)^{b/2} dr = -(b/(b+2)) (1-r^2/b)^{(b+2)/2}
    const double mint = cmass * (std::pow(one_minus(rf_[m]), 0.5 * b_ + 1.0) -
                                 std::pow(one_minus(rf_[m + 1]), 0.5 * b_ + 1.0));
    cell_m_[m] = mint / (0.5 * (rf_[m + 1] * rf_[m + 1] - rf_[m] * rf_[m]));
    massw_[m] = mint * dchi_;  // unnormalized for now
    zsum += mint * dchi_ * nqc_;
  }
  z_ = zsum;
  for (int m = 0; m < nqr_; ++m) {
    massw_[m] /= z_;
    cell_m_[m] /= z_;
  }
  for (int m = 0; m <= nqr_; ++m) mface_[m] = std::pow(one_minus(rf_[m]), 0.5 * b_) / z_;
  mface_[nqr_] = 0.0;

  // Stress moments by nodal product sampling: midpoint in the mapped radial
  // variable times periodic trapezoid in the angle. The radial integrand
  // vanishes to third order at both endpoints under the sine map, so the
  // rule is fourth-order there and spectral in the angle; the weights stay
  // positive, which keeps the assembled stress positive semidefinite.
  s11_.resize(size());
  s12_.resize(size());
  s22_.resize(size());
  const double drho = 1.0 / nqr_;
  for (int m = 0; m < nqr_; ++m) {
    const double rho = (m + 0.5) * drho;
    const double r = rc_[m];
    const double rp = rb * 0.5 * std::numbers::pi * std::cos(0.5 * std::numbers::pi * rho);
    const double mup = std::pow(one_minus(r), 0.5 * b_ - 1.0) / z_;  // M U' at radius r
    const double wr = mup * r * rp * drho * dchi_;
    for (int l = 0; l < nqc_; ++l) {
      const double c = std::cos(chi(l)), s = std::sin(chi(l));
      s11_[idx(m, l)] = wr * r * r * c * c;
      s12_[idx(m, l)] = wr * r * r * s * c;
      s22_[idx(m, l)] = wr * r * r * s * s;
    }
  }
}

double FeneModel::maxwellian_radial(double r) const {
  const double t = 1.0 - r * r / b_;
  if (t <= 0.0) {
    if (t < -1e-12) throw DomainError("configuration point outside the ball");
    return 0.0;
  }
  return std::pow(t, 0.5 * b_) / z_;
}

double FeneModel::maxwellian(const Vec2& q) const {
  const double r2 = q.dot(q);
  if (r2 >= b_) throw DomainError("configuration point outside the ball");
  return std::pow(1.0 - r2 / b_, 0.5 * b_) / z_;
}

double FeneModel::integrate_mass(const std::vector<double>& f) const {
  if (static_cast<int>(f.size()) != size()) throw ShapeMismatch("ball field size");
  double s = 0.0;
  for (int m = 0; m < nqr_; ++m) {
    double ring = 0.0;
    for (int l = 0; l < nqc_; ++l) ring += f[idx(m, l)];
    s += massw_[m] * ring;
  }
  return s;
}

double FeneModel::cutoff_at(double r, int n) const {
  const double rb = ball_radius();
  const double plateau = rb * (1.0 - std::pow(2.0, -n));
  const double zero_at = rb * (1.0 - std::pow(2.0, -n - 1));
  if (r <= plateau) return 1.0;
  if (r >= zero_at) return 0.0;
  return 1.0 - smoothstep5((r - plateau) / (zero_at - plateau));
}

std::vector<double> FeneModel::build_cutoff(int n) const {
  if (n < 1) throw ConfigError("cutoff level must be >= 1");
  std::vector<double> chi_field(size());
  for (int m = 0; m < nqr_; ++m)
    for (int l = 0; l < nqc_; ++l) chi_field[idx(m, l)] = cutoff_at(rc_[m], n);
  return chi_field;
}

}  // namespace polyfsi
