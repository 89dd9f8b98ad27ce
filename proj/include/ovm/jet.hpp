#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace ovm {

// Second-order forward-mode jet over the three base coordinates (u, y1, y2):
// value, gradient and Hessian propagated together. Used to differentiate the
// lattice sums and their tail corrections exactly, without finite differences.
template <typename Scalar>
struct Jet {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  using Mat = Eigen::Matrix<Scalar, 3, 3>;

  Scalar v{0};
  Vec g = Vec::Zero();
  Mat h = Mat::Zero();

  Jet() = default;
  Jet(Scalar value) : v(value) {}  // NOLINT: implicit constants are convenient in kernels
  Jet(Scalar value, const Vec& grad, const Mat& hess) : v(value), g(grad), h(hess) {}

  static Jet variable(Scalar value, int index) {
    Jet j(value);
    j.g[index] = Scalar(1);
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(Scalar s) {
    v *= s;
    g *= s;
    h *= s;
    return *this;
  }
};

// Apply a scalar function with first and second derivatives d1, d2 at x.v.
template <typename Scalar>
Jet<Scalar> chain(const Jet<Scalar>& x, Scalar f, Scalar d1, Scalar d2) {
  return {f, d1 * x.g, d1 * x.h + d2 * x.g * x.g.transpose()};
}

template <typename Scalar>
Jet<Scalar> operator+(Jet<Scalar> a, const Jet<Scalar>& b) { return a += b; }
template <typename Scalar>
Jet<Scalar> operator-(Jet<Scalar> a, const Jet<Scalar>& b) { return a -= b; }
template <typename Scalar>
Jet<Scalar> operator-(const Jet<Scalar>& a) { return {-a.v, -a.g, -a.h}; }
template <typename Scalar>
Jet<Scalar> operator+(Jet<Scalar> a, Scalar s) { a.v += s; return a; }
template <typename Scalar>
Jet<Scalar> operator+(Scalar s, Jet<Scalar> a) { a.v += s; return a; }
template <typename Scalar>
Jet<Scalar> operator-(Jet<Scalar> a, Scalar s) { a.v -= s; return a; }
template <typename Scalar>
Jet<Scalar> operator-(Scalar s, const Jet<Scalar>& a) { return {s - a.v, -a.g, -a.h}; }
template <typename Scalar>
Jet<Scalar> operator*(Jet<Scalar> a, Scalar s) { return a *= s; }
template <typename Scalar>
Jet<Scalar> operator*(Scalar s, Jet<Scalar> a) { return a *= s; }
template <typename Scalar>
Jet<Scalar> operator/(Jet<Scalar> a, Scalar s) { return a *= Scalar(1) / s; }

template <typename Scalar>
Jet<Scalar> operator*(const Jet<Scalar>& a, const Jet<Scalar>& b) {
  const auto cross = (a.g * b.g.transpose()).eval();
  return {a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.h + b.v * a.h + cross + cross.transpose()};
}

template <typename Scalar>
Jet<Scalar> reciprocal(const Jet<Scalar>& x) {
  const Scalar inv = Scalar(1) / x.v;
  return chain(x, inv, -inv * inv, Scalar(2) * inv * inv * inv);
}

template <typename Scalar>
Jet<Scalar> operator/(const Jet<Scalar>& a, const Jet<Scalar>& b) { return a * reciprocal(b); }
template <typename Scalar>
Jet<Scalar> operator/(Scalar s, const Jet<Scalar>& b) { return s * reciprocal(b); }

template <typename Scalar>
Jet<Scalar> sqrt(const Jet<Scalar>& x) {
  using std::sqrt;
  const Scalar r = sqrt(x.v);
  return chain(x, r, Scalar(0.5) / r, Scalar(-0.25) / (r * x.v));
}

// x^{-1/2}, the kernel of every Coulomb term.
template <typename Scalar>
Jet<Scalar> rsqrt(const Jet<Scalar>& x) {
  using std::sqrt;
  const Scalar r = Scalar(1) / sqrt(x.v);
  const Scalar inv = Scalar(1) / x.v;
  return chain(x, r, Scalar(-0.5) * r * inv, Scalar(0.75) * r * inv * inv);
}

template <typename Scalar>
Jet<Scalar> log(const Jet<Scalar>& x) {
  using std::log;
  const Scalar inv = Scalar(1) / x.v;
  return chain(x, log(x.v), inv, -inv * inv);
}

// Plain-scalar overloads so kernels can be instantiated with double.
inline double rsqrt(double x) { return 1.0 / std::sqrt(x); }
inline double reciprocal(double x) { return 1.0 / x; }

template <typename T>
inline T value_of(const T& x) { return x; }
template <typename Scalar>
inline Scalar value_of(const Jet<Scalar>& x) { return x.v; }

}  // namespace ovm
