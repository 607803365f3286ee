#pragma once

#include <cmath>
#include <type_traits>

// Forward-mode dual number with a single derivative slot. Nesting the type
// (Dual<Dual<double>>) yields exact second derivatives; all differentiation
// in the library is built from directional sweeps of this type.

namespace omav {

// Value-part helpers shared by plain doubles and (nested) duals.
inline double value_of(double x) { return x; }
inline double magnitude(double x) { return std::fabs(x); }

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the seeded direction

  Dual() : v(0), d(0) {}
  Dual(T value) : v(value), d(0) {}  // NOLINT: implicit from value is intended
  Dual(T value, T deriv) : v(value), d(deriv) {}
  Dual(double value) requires(!std::is_same_v<T, double>) : v(value), d(0) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v = v * o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v = v / o.v;
    return *this;
  }
};

template <class T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T>
Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) { return Dual<T>(a) * b; }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) { return a * Dual<T>(b); }
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) { return a / Dual<T>(b); }

template <class T>
Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {sin(x.v), x.d * cos(x.v)};
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {cos(x.v), -x.d * sin(x.v)};
}
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  const T r = sqrt(x.v);
  return {r, x.d / (2.0 * r)};
}

template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class T>
double magnitude(const Dual<T>& x) {
  return magnitude(x.v);
}

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

}  // namespace omav
