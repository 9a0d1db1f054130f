#pragma once

#include "kpd/types.hpp"

namespace kpd {

// Central complex-step stencils, Richardson-extrapolated once (fourth order).
// T is any vector-space type over Complex (Complex, CVec, CMat); F maps a
// Complex offset to T.

namespace fd_detail {

template <typename T, typename F>
T dz_base(const F& f, double h) {
  const Complex i(0, 1);
  T a = f(Complex(h, 0));
  T b = f(Complex(-h, 0));
  T c = f(Complex(0, h));
  T d = f(Complex(0, -h));
  T out = ((a - b) - i * (c - d)) / (4.0 * h);
  return out;
}

template <typename T, typename F>
T dzbar_base(const F& f, double h) {
  const Complex i(0, 1);
  T a = f(Complex(h, 0));
  T b = f(Complex(-h, 0));
  T c = f(Complex(0, h));
  T d = f(Complex(0, -h));
  T out = ((a - b) + i * (c - d)) / (4.0 * h);
  return out;
}

template <typename F>
double mixed_base(const F& f, double h) {
  return (f(Complex(h, 0)) + f(Complex(-h, 0)) + f(Complex(0, h)) +
          f(Complex(0, -h)) - 4.0 * f(Complex(0, 0))) /
         (4.0 * h * h);
}

}  // namespace fd_detail

/// d/dz of f at offset 0.
template <typename T, typename F>
T fd_dz(const F& f, double h) {
  T d1 = fd_detail::dz_base<T>(f, h);
  T d2 = fd_detail::dz_base<T>(f, h / 2);
  T out = (4.0 * d2 - d1) / 3.0;
  return out;
}

/// d/dzbar of f at offset 0.
template <typename T, typename F>
T fd_dzbar(const F& f, double h) {
  T d1 = fd_detail::dzbar_base<T>(f, h);
  T d2 = fd_detail::dzbar_base<T>(f, h / 2);
  T out = (4.0 * d2 - d1) / 3.0;
  return out;
}

/// d^2/(dz dzbar) of a real-valued f at offset 0.
template <typename F>
double fd_mixed(const F& f, double h) {
  double d1 = fd_detail::mixed_base(f, h);
  double d2 = fd_detail::mixed_base(f, h / 2);
  return (4.0 * d2 - d1) / 3.0;
}

/// Hermitian matrix B with B(j,k) = d^2/(dw_j dwbar_k) F at 0, where F is a
/// real function of a C^m offset, assembled by sesquilinear polarization of
/// the diagonal map A(u) = d_t d_tbar F(t u).
template <typename F>
CMat fd_hermitian_hessian(const F& f, int m, double h) {
  auto along = [&](const CVec& u) {
    return fd_mixed([&](Complex t) { return f(CVec(t * u)); }, h);
  };
  const Complex i(0, 1);
  CMat b(m, m);
  for (int j = 0; j < m; ++j) {
    CVec ej = CVec::Zero(m);
    ej[j] = 1.0;
    b(j, j) = along(ej);
    for (int k = 0; k < j; ++k) {
      CVec ek = CVec::Zero(m);
      ek[k] = 1.0;
      Complex val = 0.25 * (along(ej + ek) - along(ej - ek)) +
                    0.25 * i * (along(ej + i * ek) - along(ej - i * ek));
      b(j, k) = val;
      b(k, j) = std::conj(val);
    }
  }
  return b;
}

}  // namespace kpd
