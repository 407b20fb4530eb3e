#pragma once

#include <vector>

#include "polyfsi/types.hpp"

namespace polyfsi {

/// Cell-centered polar grid on the disk of radius `radius`.
///
/// Radial index i = 0..nr-1 with centers r_i = (i+1/2)*dr (no node at the
/// origin), angular index j = 0..nt-1 with theta_j = j*dtheta, periodic.
/// Cells are treated as straight-edged quadrilaterals (chords instead of
/// arcs) so that the discrete divergence theorem closes exactly:
/// sum over faces of area*normal = 0 for every cell.
class DiskGrid {
 public:
  DiskGrid(int nr, int nt, double radius);

  int nr() const { return nr_; }
  int nt() const { return nt_; }
  int size() const { return nr_ * nt_; }
  double radius() const { return radius_; }
  double dr() const { return dr_; }
  double dtheta() const { return dt_; }

  int idx(int i, int j) const { return i * nt_ + j; }
  int jp(int j) const { return j + 1 < nt_ ? j + 1 : 0; }
  int jm(int j) const { return j > 0 ? j - 1 : nt_ - 1; }
  // Angular index of the cell diametrically across the origin.
  int jop(int j) const { return (j + nt_ / 2) % nt_; }
  bool has_pole_pair() const { return nt_ % 2 == 0; }

  double rc(int i) const { return (i + 0.5) * dr_; }
  double rf(int i) const { return i * dr_; }  // radial face i = 0..nr
  double theta(int j) const { return j * dt_; }
  double theta_face(int j) const { return (j + 0.5) * dt_; }

  Vec2 unit_r(double th) const { return {std::cos(th), std::sin(th)}; }
  Vec2 unit_t(double th) const { return {-std::sin(th), std::cos(th)}; }
  Vec2 center(int i, int j) const { return unit_r(theta(j)) * rc(i); }

  // Polygonal metrics.
  double cell_volume(int i) const { return vol_[i]; }
  double radial_face_area(int i) const { return rface_area_[i]; }  // face index 0..nr
  double theta_face_area() const { return dr_; }
  double total_volume() const;

  // Distance between cell centers across a theta face along the face normal.
  double theta_center_spacing(int i) const { return rc(i) * 2.0 * std::sin(dt_ / 2.0); }

  // Dense spectral differentiation matrix in theta (nt x nt, row-major).
  const std::vector<double>& spectral_dtheta() const { return spec_d_; }

 private:
  int nr_, nt_;
  double radius_, dr_, dt_;
  std::vector<double> vol_, rface_area_, spec_d_;
};

struct ScalarField {
  std::vector<double> v;
  ScalarField() = default;
  explicit ScalarField(const DiskGrid& g, double fill = 0.0) : v(g.size(), fill) {}
  double& operator[](int id) { return v[id]; }
  double operator[](int id) const { return v[id]; }
  int size() const { return static_cast<int>(v.size()); }
};

struct VecField {
  std::vector<Vec2> v;
  VecField() = default;
  explicit VecField(const DiskGrid& g) : v(g.size()) {}
  Vec2& operator[](int id) { return v[id]; }
  const Vec2& operator[](int id) const { return v[id]; }
  int size() const { return static_cast<int>(v.size()); }
};

struct MatField {
  std::vector<Mat2> v;
  MatField() = default;
  explicit MatField(const DiskGrid& g) : v(g.size()) {}
  Mat2& operator[](int id) { return v[id]; }
  const Mat2& operator[](int id) const { return v[id]; }
  int size() const { return static_cast<int>(v.size()); }
};

/// Gradient of a cell-centered scalar in Cartesian components.
/// Radial derivative: centered, crossing the pole for i=0, one-sided 2nd
/// order at the rim unless a boundary value per angular cell is supplied.
/// Angular derivative: spectral when `spectral_theta`, else centered.
VecField gradient(const DiskGrid& g, const ScalarField& f, bool spectral_theta = false,
                  const std::vector<double>* rim_value = nullptr);

/// Jacobian field (dv_i/dx_j) of a cell-centered vector field.
MatField jacobian(const DiskGrid& g, const VecField& u, bool spectral_theta = false,
                  const std::vector<Vec2>* rim_value = nullptr);

/// L2 norm over the grid with the polygonal cell measure.
double l2_norm(const DiskGrid& g, const ScalarField& f);
double l2_norm(const DiskGrid& g, const VecField& f);
double integral(const DiskGrid& g, const ScalarField& f);

double max_abs(const ScalarField& f);

}  // namespace polyfsi
