#pragma once

#include <array>
#include <cstddef>

namespace oupop {

template <std::size_t N> using Vec = std::array<double, N>;

template <std::size_t N>
inline Vec<N> axpy(const Vec<N> &x, double h, const Vec<N> &k) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = x[i] + h * k[i];
  return out;
}

/// One classical fourth-order Runge-Kutta step of dx/dt = f(t, x).
template <std::size_t N, class F>
Vec<N> rk4_step(F &&f, double t, const Vec<N> &x, double h) {
  const Vec<N> k1 = f(t, x);
  const Vec<N> k2 = f(t + 0.5 * h, axpy(x, 0.5 * h, k1));
  const Vec<N> k3 = f(t + 0.5 * h, axpy(x, 0.5 * h, k2));
  const Vec<N> k4 = f(t + h, axpy(x, h, k3));
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

} // namespace oupop
