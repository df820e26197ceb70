#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "freqfit/errors.hpp"

namespace freqfit {

// A probability value, kept in [0,1] by construction.
class Probability {
 public:
  Probability() = default;
  explicit Probability(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("Probability outside [0,1]");
  }
  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

namespace detail {

inline void require_positive_finite(double x, const char* who) {
  if (!std::isfinite(x) || x <= 0.0)
    throw std::domain_error(std::string(who) + ": argument must be positive and finite");
}

}  // namespace detail

// ln Gamma(x) for x > 0 by the Lanczos approximation (g = 7, 9 coefficients).
inline double log_gamma(double x) {
  detail::require_positive_finite(x, "log_gamma");
  static constexpr double coef[9] = {
      0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
      771.32342877765313,     -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
  double series = coef[0];
  for (int i = 1; i < 9; ++i) series += coef[i] / (x - 1.0 + i);
  const double t = x + 6.5;
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return half_log_two_pi + (x - 0.5) * std::log(t) - t + std::log(series);
}

// psi(x) = d/dx ln Gamma(x).  Recurrence up to x >= 10, then the Bernoulli
// asymptotic series; the truncated tail is below machine epsilon there.
inline double digamma(double x) {
  detail::require_positive_finite(x, "digamma");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double u = 1.0 / (x * x);
  const double tail =
      u * (1.0 / 12.0 -
           u * (1.0 / 120.0 -
                u * (1.0 / 252.0 -
                     u * (1.0 / 240.0 -
                          u * (1.0 / 132.0 -
                               u * (691.0 / 32760.0 - u * (1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 / x - tail;
}

// psi'(x), same recurrence/asymptotic split as digamma.
inline double trigamma(double x) {
  detail::require_positive_finite(x, "trigamma");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double u = inv * inv;
  const double tail =
      u * inv *
      (1.0 / 6.0 -
       u * (1.0 / 30.0 -
            u * (1.0 / 42.0 -
                 u * (1.0 / 30.0 -
                      u * (5.0 / 66.0 -
                           u * (691.0 / 2730.0 - u * (7.0 / 6.0)))))));
  return result + inv + 0.5 * u + tail;
}

namespace detail {

inline constexpr int incomplete_gamma_max_iter = 1000000;

// Lower regularized incomplete gamma by its power series; use for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < incomplete_gamma_max_iter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17)
      return sum * std::exp(a * std::log(x) - x - log_gamma(a));
  }
  throw numeric_error("regularized incomplete gamma: series did not converge");
}

// Upper regularized incomplete gamma by continued fraction (modified Lentz);
// use for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < incomplete_gamma_max_iter; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      return h * std::exp(a * std::log(x) - x - log_gamma(a));
  }
  throw numeric_error("regularized incomplete gamma: continued fraction did not converge");
}

}  // namespace detail

// Lower regularized incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  detail::require_positive_finite(a, "regularized_gamma_p");
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::domain_error("regularized_gamma_p: x must be nonnegative and finite");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  detail::require_positive_finite(a, "regularized_gamma_q");
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::domain_error("regularized_gamma_q: x must be nonnegative and finite");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

// Upper tail probability of the chi-square distribution: Q(df/2, x/2).
inline Probability chi_square_sf(double x, double df) {
  detail::require_positive_finite(df, "chi_square_sf");
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::domain_error("chi_square_sf: x must be nonnegative and finite");
  double q = regularized_gamma_q(0.5 * df, 0.5 * x);
  if (q < 0.0) q = 0.0;
  if (q > 1.0) q = 1.0;
  return Probability(q);
}

inline Probability chi_square_cdf(double x, double df) {
  detail::require_positive_finite(df, "chi_square_cdf");
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::domain_error("chi_square_cdf: x must be nonnegative and finite");
  double p = regularized_gamma_p(0.5 * df, 0.5 * x);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return Probability(p);
}

inline double chi_square_pdf(double x, double df) {
  detail::require_positive_finite(df, "chi_square_pdf");
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (df < 2.0) return std::numeric_limits<double>::infinity();
    return df == 2.0 ? 0.5 : 0.0;
  }
  const double half = 0.5 * df;
  constexpr double ln2 = 0.69314718055994530942;
  return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * ln2 -
                  log_gamma(half));
}

// Inverse of the chi-square upper tail: the x with sf(x, df) = 1 - p.
// Bracketing bisection followed by a Newton polish on the tail function.
inline double chi_square_quantile(Probability p, double df) {
  detail::require_positive_finite(df, "chi_square_quantile");
  const double pv = p.value();
  if (!(pv > 0.0 && pv < 1.0))
    throw std::domain_error("chi_square_quantile: p must lie strictly inside (0,1)");
  const double q = 1.0 - pv;  // target upper-tail mass

  double lo = 0.0;
  double hi = std::fmax(df, 1.0);
  int grow = 0;
  while (chi_square_sf(hi, df).value() > q) {
    hi *= 2.0;
    if (++grow > 400)
      throw numeric_error("chi_square_quantile: failed to bracket the root");
  }
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_square_sf(mid, df).value() > q)
      lo = mid;
    else
      hi = mid;
  }

  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double f = chi_square_sf(x, df).value() - q;
    const double d = chi_square_pdf(x, df);
    if (d <= 0.0 || !std::isfinite(d)) break;
    double step = f / d;  // sf' = -pdf, so the Newton step is +f/pdf
    double next = x + step;
    if (next <= lo || next >= hi) break;  // keep the bisection bracket
    if (std::fabs(step) < 1e-15 * (1.0 + x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace freqfit
