#pragma once

#include <cmath>

namespace finsler {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double norm2(const Vec2& v) { return v.x * v.x + v.y * v.y; }

// 2x2 matrix, row major
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [a b; c d]

  Vec2 col(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }
  Vec2 row(int i) const { return i == 0 ? Vec2{a, b} : Vec2{c, d}; }
  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  double det() const { return a * d - b * c; }
};

inline Mat2 from_columns(const Vec2& c0, const Vec2& c1) {
  return {c0.x, c1.x, c0.y, c1.y};
}

inline Mat2 inverse(const Mat2& m) {
  const double det = m.det();
  return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

inline Mat2 outer(const Vec2& u, const Vec2& v) {
  return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
}

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c, -s, s, c};
}

// eigenvalues of a symmetric 2x2 (a, b; b, d), ascending
inline void sym_eigenvalues(double a, double b, double d, double& lo, double& hi) {
  const double tr = a + d;
  const double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) / 4.0 + b * b));
  lo = tr / 2.0 - disc;
  hi = tr / 2.0 + disc;
}

inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

// signed difference a-b wrapped into (-pi, pi]
inline double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2.0 * M_PI);
  if (d > M_PI) d -= 2.0 * M_PI;
  if (d <= -M_PI) d += 2.0 * M_PI;
  return d;
}

}  // namespace finsler
