#include "polyfsi/circle_boundary.hpp"

#include <cmath>
#include <numbers>

#include "polyfsi/fourier.hpp"

namespace polyfsi {

std::vector<double> spectral_diff_matrix(int n, double period) {
  std::vector<double> d(static_cast<size_t>(n) * n, 0.0);
  const double h = period / n;
  const double scale = 2.0 * std::numbers::pi / period;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int m = j - k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double arg = 0.5 * m * h * scale;
      d[static_cast<size_t>(j) * n + k] =
          scale * ((n % 2 == 0) ? 0.5 * sign / std::tan(arg) : 0.5 * sign / std::sin(arg));
    }
  }
  return d;
}

std::vector<double> apply_dense(const std::vector<double>& m, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> y(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += m[static_cast<size_t>(j) * n + k] * x[k];
    y[j] = s;
  }
  return y;
}

CircleBoundary::CircleBoundary(int n, double period) : n_(n), period_(period) {
  if (n < 4) throw ConfigError("CircleBoundary needs at least 4 nodes");
  dy_ = period / n;
  dmat_ = spectral_diff_matrix(n, period);
}

std::vector<double> CircleBoundary::derivative(const std::vector<double>& f) const {
  if (static_cast<int>(f.size()) != n_) throw ShapeMismatch("boundary field size");
  return apply_dense(dmat_, f);
}

std::vector<double> CircleBoundary::second_difference(const std::vector<double>& f) const {
  std::vector<double> out(n_);
  const double h2 = dy_ * dy_;
  for (int j = 0; j < n_; ++j)
    out[j] = (f[jm(j)] - 2.0 * f[j] + f[jp(j)]) / h2;
  return out;
}

std::vector<double> CircleBoundary::fourth_difference(const std::vector<double>& f) const {
  std::vector<double> out(n_);
  const double h4 = dy_ * dy_ * dy_ * dy_;
  for (int j = 0; j < n_; ++j) {
    const int j1 = jp(j), j2 = jp(j1), k1 = jm(j), k2 = jm(k1);
    out[j] = (f[k2] - 4.0 * f[k1] + 6.0 * f[j] - 4.0 * f[j1] + f[j2]) / h4;
  }
  return out;
}

double CircleBoundary::max_abs(const std::vector<double>& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::fabs(v));
  return m;
}

double CircleBoundary::l2_norm(const std::vector<double>& f) const {
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s * dy_);
}

double CircleBoundary::integral(const std::vector<double>& f) const {
  double s = 0.0;
  for (double v : f) s += v;
  return s * dy_;
}

}  // namespace polyfsi
