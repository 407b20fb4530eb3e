#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace polyfsi {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2 operator/(double a) const { return {x / a, y / a}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
};

inline Vec2 operator*(double a, const Vec2& v) { return v * a; }

// 2x2 matrix, row-major: m(i,j) = entry i-th row, j-th column.
struct Mat2 {
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};

  Mat2() = default;
  Mat2(double a00, double a01, double a10, double a11) : a{a00, a01, a10, a11} {}

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 outer(const Vec2& u, const Vec2& v) {
    return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
  }

  double& operator()(int i, int j) { return a[2 * i + j]; }
  double operator()(int i, int j) const { return a[2 * i + j]; }

  Mat2 operator+(const Mat2& o) const {
    return {a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3]};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3]};
  }
  Mat2 operator*(double s) const { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
  Mat2 operator*(const Mat2& o) const {
    return {a[0] * o.a[0] + a[1] * o.a[2], a[0] * o.a[1] + a[1] * o.a[3],
            a[2] * o.a[0] + a[3] * o.a[2], a[2] * o.a[1] + a[3] * o.a[3]};
  }
  Vec2 operator*(const Vec2& v) const {
    return {a[0] * v.x + a[1] * v.y, a[2] * v.x + a[3] * v.y};
  }
  Mat2 transpose() const { return {a[0], a[2], a[1], a[3]}; }
  double det() const { return a[0] * a[3] - a[1] * a[2]; }
  double trace() const { return a[0] + a[3]; }
  Mat2 inverse() const {
    double d = det();
    return {a[3] / d, -a[1] / d, -a[2] / d, a[0] / d};
  }
  double frobenius() const {
    return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]);
  }
  // A:B = sum_ij A_ij B_ij
  double ddot(const Mat2& o) const {
    return a[0] * o.a[0] + a[1] * o.a[1] + a[2] * o.a[2] + a[3] * o.a[3];
  }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Error taxonomy. Every named failure mode maps to one subclass so callers
// can catch by kind; what() carries the diagnostic payload.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

#define POLYFSI_ERROR(Name)                                       \
  class Name : public SolverError {                               \
   public:                                                        \
    explicit Name(const std::string& w) : SolverError(#Name ": " + w) {} \
  }

POLYFSI_ERROR(OutsideTube);
POLYFSI_ERROR(AmbiguousProjection);
POLYFSI_ERROR(DegenerateMap);
POLYFSI_ERROR(DegenerateBoundary);
POLYFSI_ERROR(InadmissibleDisplacement);
POLYFSI_ERROR(DomainError);
POLYFSI_ERROR(CflViolation);
POLYFSI_ERROR(DegenerateGeometry);
POLYFSI_ERROR(SolverDivergence);
POLYFSI_ERROR(NoContraction);
POLYFSI_ERROR(ShapeMismatch);
POLYFSI_ERROR(ConfigError);
POLYFSI_ERROR(IoError);

#undef POLYFSI_ERROR

}  // namespace polyfsi
