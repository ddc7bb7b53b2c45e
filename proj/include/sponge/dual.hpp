#ifndef SPONGE_DUAL_HPP
#define SPONGE_DUAL_HPP

#include <array>
#include <cmath>

namespace sponge {

/// Forward-mode dual number carrying N directional derivatives. Used to get
/// exact element Jacobians from the element residual code.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit from constants

  static Dual variable(double value, int slot) {
    Dual out(value);
    out.d[slot] = 1.0;
    return out;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (int i = 0; i < N; ++i) d[i] *= s;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
};

template <int N> Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N> Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N> Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N> Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <int N> Dual<N> operator+(Dual<N> a, double b) { a.v += b; return a; }
template <int N> Dual<N> operator+(double b, Dual<N> a) { a.v += b; return a; }
template <int N> Dual<N> operator-(Dual<N> a, double b) { a.v -= b; return a; }
template <int N> Dual<N> operator-(double b, const Dual<N>& a) { return Dual<N>(b) - a; }
template <int N> Dual<N> operator*(Dual<N> a, double s) { return a *= s; }
template <int N> Dual<N> operator*(double s, Dual<N> a) { return a *= s; }
template <int N> Dual<N> operator/(Dual<N> a, double s) { return a *= (1.0 / s); }
template <int N> Dual<N> operator/(double s, const Dual<N>& a) { return Dual<N>(s) / a; }
template <int N> Dual<N> operator-(Dual<N> a) { return a *= -1.0; }

template <int N>
Dual<N> sqrt(const Dual<N>& a) {
  Dual<N> out(std::sqrt(a.v));
  const double scale = 0.5 / out.v;
  for (int i = 0; i < N; ++i) out.d[i] = a.d[i] * scale;
  return out;
}

inline double value_of(double x) { return x; }
template <int N> double value_of(const Dual<N>& x) { return x.v; }

}  // namespace sponge

#endif  // SPONGE_DUAL_HPP
