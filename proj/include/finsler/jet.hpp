#pragma once

#include <cmath>
#include <type_traits>

namespace finsler {

// First-order dual number over an arbitrary scalar T. Nesting Jet<Jet<double>>
// gives exact mixed second derivatives of composite expressions.
template <class T>
struct Jet {
  T a{};  // value
  T b{};  // derivative

  Jet() = default;
  Jet(const T& value) : a(value), b(T{}) {}
  Jet(const T& value, const T& deriv) : a(value), b(deriv) {}
  // lift a plain scalar through arbitrarily nested jets
  template <class S, class = std::enable_if_t<std::is_arithmetic_v<S> && !std::is_same_v<S, T>>>
  Jet(S value) : a(static_cast<double>(value)), b(T{}) {}
};

template <class T> Jet<T> operator+(const Jet<T>& u, const Jet<T>& v) { return {u.a + v.a, u.b + v.b}; }
template <class T> Jet<T> operator-(const Jet<T>& u, const Jet<T>& v) { return {u.a - v.a, u.b - v.b}; }
template <class T> Jet<T> operator-(const Jet<T>& u) { return {-u.a, -u.b}; }
template <class T> Jet<T> operator*(const Jet<T>& u, const Jet<T>& v) { return {u.a * v.a, u.a * v.b + u.b * v.a}; }
template <class T> Jet<T> operator/(const Jet<T>& u, const Jet<T>& v) {
  T inv = T(1.0) / v.a;
  T q = u.a * inv;
  return {q, (u.b - q * v.b) * inv};
}

template <class T> Jet<T> operator+(const Jet<T>& u, double s) { return {u.a + T(s), u.b}; }
template <class T> Jet<T> operator+(double s, const Jet<T>& u) { return u + s; }
template <class T> Jet<T> operator-(const Jet<T>& u, double s) { return {u.a - T(s), u.b}; }
template <class T> Jet<T> operator-(double s, const Jet<T>& u) { return {T(s) - u.a, -u.b}; }
template <class T> Jet<T> operator*(const Jet<T>& u, double s) { return {u.a * T(s), u.b * T(s)}; }
template <class T> Jet<T> operator*(double s, const Jet<T>& u) { return u * s; }
template <class T> Jet<T> operator/(const Jet<T>& u, double s) { return {u.a / T(s), u.b / T(s)}; }
template <class T> Jet<T> operator/(double s, const Jet<T>& u) { return Jet<T>(T(s)) / u; }

using std::acosh;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <class T> Jet<T> sqrt(const Jet<T>& u) {
  T r = sqrt(u.a);
  return {r, u.b / (2.0 * r)};
}
template <class T> Jet<T> exp(const Jet<T>& u) {
  T e = exp(u.a);
  return {e, u.b * e};
}
template <class T> Jet<T> log(const Jet<T>& u) { return {log(u.a), u.b / u.a}; }
template <class T> Jet<T> sin(const Jet<T>& u) { return {sin(u.a), u.b * cos(u.a)}; }
template <class T> Jet<T> cos(const Jet<T>& u) { return {cos(u.a), -u.b * sin(u.a)}; }
template <class T> Jet<T> acosh(const Jet<T>& u) {
  return {acosh(u.a), u.b / sqrt(u.a * u.a - 1.0)};
}

using Jet2 = Jet<Jet<double>>;  // carries d/dt, d/ds and d2/dtds

}  // namespace finsler
