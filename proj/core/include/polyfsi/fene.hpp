#pragma once

#include <vector>

#include "polyfsi/types.hpp"

namespace polyfsi {

/// Warner spring potential U(s) = -(b/2) ln(1 - 2s/b) on [0, b/2).
double fene_potential(double s, double b);
/// U'(s) = 1/(1 - 2s/b).
double fene_potential_derivative(double s, double b);

/// Configuration-ball model: polar tensor grid on the ball of radius sqrt(b),
/// cell-centered in the mapped radial variable r = sqrt(b) sin(pi rho / 2) so
/// cells cluster where the Maxwellian degenerates. Radial Maxwellian moments
/// are integrated per cell (closed form for the mass weight, high-order
/// quadrature for the stress weight), which keeps the weighted quadrature
/// positivity-preserving and the total mass exact.
class FeneModel {
 public:
  FeneModel(double b, int n_radial, int n_angular);

  double b() const { return b_; }
  double ball_radius() const { return std::sqrt(b_); }
  int nqr() const { return nqr_; }
  int nqc() const { return nqc_; }
  int size() const { return nqr_ * nqc_; }

  int idx(int m, int l) const { return m * nqc_ + l; }
  int lp(int l) const { return l + 1 < nqc_ ? l + 1 : 0; }
  int lm(int l) const { return l > 0 ? l - 1 : nqc_ - 1; }

  double rc(int m) const { return rc_[m]; }
  double rf(int m) const { return rf_[m]; }  // m = 0..nqr
  double chi(int l) const { return (l + 0.5) * dchi_; }
  double chi_face(int l) const { return l * dchi_; }
  double dchi() const { return dchi_; }
  Vec2 node(int m, int l) const {
    return {rc_[m] * std::cos(chi(l)), rc_[m] * std::sin(chi(l))};
  }

  double normalization() const { return z_; }
  /// Pointwise Maxwellian; DomainError outside the open ball.
  double maxwellian(const Vec2& q) const;
  double maxwellian_radial(double r) const;  // unnormalized (1 - r^2/b)^{b/2} / Z -> normalized

  // Cell metrics and Maxwellian integrals.
  double cell_area(int m) const { return area_[m]; }
  double cell_maxwellian(int m) const { return cell_m_[m]; }   // cell average of M
  double mass_weight(int m) const { return massw_[m]; }        // = area * cell average of M
  double face_maxwellian_radial(int m) const { return mface_[m]; }  // at radial face m

  // Per-cell stress moments: integral over the cell of M U' q_k q_l.
  double stress_w11(int m, int l) const { return s11_[idx(m, l)]; }
  double stress_w12(int m, int l) const { return s12_[idx(m, l)]; }
  double stress_w22(int m, int l) const { return s22_[idx(m, l)]; }

  /// Weighted integral of nodal values: sum of mass_weight * f.
  double integrate_mass(const std::vector<double>& f) const;

  /// Drag cut-off field at level n: 1 inside radius sqrt(b)(1 - 2^-n), C^1
  /// decay to zero at sqrt(b)(1 - 2^{-n-1}).
  std::vector<double> build_cutoff(int n) const;
  double cutoff_at(double r, int n) const;

 private:
  double b_, dchi_, z_;
  int nqr_, nqc_;
  std::vector<double> rc_, rf_, area_, cell_m_, massw_, mface_;
  std::vector<double> s11_, s12_, s22_;
};

}  // namespace polyfsi
