#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "omav/dual.hpp"

// Small fixed-capacity dense vectors/matrices used by the dynamics core.
// Templated on the scalar type so derivative-carrying scalars can be pushed
// through every code path, including the linear solves.

namespace omav {

inline constexpr int kMaxCoords = 11;  // platform pose (3) + up to 8 joints

template <class T, int Cap = kMaxCoords>
struct SVec {
  int n = 0;
  std::array<T, Cap> v{};

  SVec() = default;
  explicit SVec(int size) : n(size) {
    if (size < 0 || size > Cap) throw std::invalid_argument("SVec: bad size");
    for (int i = 0; i < n; ++i) v[i] = T(0);
  }
  T& operator[](int i) { return v[i]; }
  const T& operator[](int i) const { return v[i]; }
  int size() const { return n; }

  SVec& operator+=(const SVec& o) {
    for (int i = 0; i < n; ++i) v[i] += o.v[i];
    return *this;
  }
  SVec& operator-=(const SVec& o) {
    for (int i = 0; i < n; ++i) v[i] -= o.v[i];
    return *this;
  }
};

template <class T, int Cap = kMaxCoords>
struct SMat {
  int rows = 0, cols = 0;
  std::array<T, Cap * Cap> v{};

  SMat() = default;
  SMat(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0 || r > Cap || c > Cap)
      throw std::invalid_argument("SMat: bad shape");
    for (int i = 0; i < r * c; ++i) v[i] = T(0);
  }
  T& operator()(int i, int j) { return v[i * cols + j]; }
  const T& operator()(int i, int j) const { return v[i * cols + j]; }
};

template <class T, int Cap>
SVec<T, Cap> operator*(const SMat<T, Cap>& A, const SVec<T, Cap>& x) {
  SVec<T, Cap> y(A.rows);
  for (int i = 0; i < A.rows; ++i) {
    T acc(0);
    for (int j = 0; j < A.cols; ++j) acc += A(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

// Solves A x = b in place via partial-pivot LU. A must be square and
// nonsingular; pivots are chosen on value-part magnitude so the factorization
// stays valid for derivative-carrying scalars.
template <class T, int Cap>
SVec<T, Cap> lu_solve(SMat<T, Cap> A, SVec<T, Cap> b) {
  const int n = A.rows;
  if (A.cols != n || b.n != n) throw std::invalid_argument("lu_solve: shape");
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = magnitude(A(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double m = magnitude(A(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best == 0.0) throw std::runtime_error("lu_solve: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const T f = A(i, k) / A(k, k);
      A(i, k) = f;
      for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
      b[i] -= f * b[k];
    }
  }
  SVec<T, Cap> x(n);
  for (int i = n - 1; i >= 0; --i) {
    T acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= A(i, j) * x[j];
    x[i] = acc / A(i, i);
  }
  return x;
}

}  // namespace omav
