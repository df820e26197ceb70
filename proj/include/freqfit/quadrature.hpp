#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "freqfit/errors.hpp"

namespace freqfit {
namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK constants).
inline constexpr double gk_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double gk_kronrod_w[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
// Gauss weights attach to nodes 1, 3, 5, 7 of the table above.
inline constexpr double gk_gauss_w[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
void gauss_kronrod_panel(const F& f, double a, double b, double& kronrod,
                         double& gauss) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double k = gk_kronrod_w[7] * f(mid);
  double g = gk_gauss_w[3] * f(mid);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * gk_nodes[i];
    const double fsum = f(mid - dx) + f(mid + dx);
    k += gk_kronrod_w[i] * fsum;
    if (i % 2 == 1) g += gk_gauss_w[i / 2] * fsum;
  }
  kronrod = k * half;
  gauss = g * half;
}

template <typename F>
double adaptive_gk(const F& f, double a, double b, double tol, int depth,
                   std::size_t& panels) {
  if (++panels > 2000000)
    throw numeric_error("quadrature: panel budget exhausted");
  double k, g;
  gauss_kronrod_panel(f, a, b, k, g);
  const double err = std::fabs(k - g);
  if (err <= tol || depth >= 60) {
    if (depth >= 60 && err > 64.0 * tol)
      throw numeric_error("quadrature: failed to converge");
    return k;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_gk(f, a, mid, 0.5 * tol, depth + 1, panels) +
         adaptive_gk(f, mid, b, 0.5 * tol, depth + 1, panels);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integral of f over the finite interval [a, b].
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10) {
  if (!(b > a)) return 0.0;
  std::size_t panels = 0;
  return detail::adaptive_gk(f, a, b, abs_tol, 0, panels);
}

// Integral over [a, inf) via x = a + t/(1-t), t in [0,1).
template <typename F>
double integrate_upper(const F& f, double a, double abs_tol = 1e-10) {
  auto mapped = [&](double t) {
    const double onemt = 1.0 - t;
    const double x = a + t / onemt;
    const double v = f(x);
    if (v == 0.0) return 0.0;
    return v / (onemt * onemt);
  };
  std::size_t panels = 0;
  return detail::adaptive_gk(mapped, 0.0, 1.0, abs_tol, 0, panels);
}

// Integral over the whole real line, split at zero.
template <typename F>
double integrate_real_line(const F& f, double abs_tol = 1e-10) {
  auto reflected = [&](double x) { return f(-x); };
  return integrate_upper(f, 0.0, 0.5 * abs_tol) +
         integrate_upper(reflected, 0.0, 0.5 * abs_tol);
}

}  // namespace freqfit
