#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "freqfit/matrix.hpp"
#include "freqfit/special_functions.hpp"

namespace freqfit {

// Location/scale constants of the normal frequency curve.
struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const {
    if (!std::isfinite(mu)) throw std::domain_error("NormalParams: mu must be finite");
    if (!std::isfinite(sigma) || sigma <= 0.0)
      throw std::domain_error("NormalParams: sigma must be positive");
  }
};

// Gamma (Pearson Type III with origin fixed at zero), shape/rate.
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;

  void validate() const {
    if (!std::isfinite(shape) || shape <= 0.0)
      throw std::domain_error("GammaParams: shape must be positive");
    if (!std::isfinite(rate) || rate <= 0.0)
      throw std::domain_error("GammaParams: rate must be positive");
  }
};

inline constexpr double log_two_pi = 1.8378770664093454836;

inline double normal_log_density(double x, const NormalParams& p) {
  p.validate();
  const double z = (x - p.mu) / p.sigma;
  return -0.5 * log_two_pi - std::log(p.sigma) - 0.5 * z * z;
}

// d log f / d(mu, sigma)
inline std::array<double, 2> normal_log_density_gradient(double x, const NormalParams& p) {
  p.validate();
  const double s2 = p.sigma * p.sigma;
  const double d = x - p.mu;
  return {d / s2, -1.0 / p.sigma + d * d / (s2 * p.sigma)};
}

inline SymMatrix normal_log_density_hessian(double x, const NormalParams& p) {
  p.validate();
  const double s2 = p.sigma * p.sigma;
  const double d = x - p.mu;
  SymMatrix h(2);
  h(0, 0) = -1.0 / s2;
  h(0, 1) = h(1, 0) = -2.0 * d / (s2 * p.sigma);
  h(1, 1) = 1.0 / s2 - 3.0 * d * d / (s2 * s2);
  return h;
}

inline double gamma_log_density(double x, const GammaParams& p) {
  p.validate();
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("gamma_log_density: x must be positive");
  return p.shape * std::log(p.rate) - log_gamma(p.shape) +
         (p.shape - 1.0) * std::log(x) - p.rate * x;
}

// d log f / d(shape, rate)
inline std::array<double, 2> gamma_log_density_gradient(double x, const GammaParams& p) {
  p.validate();
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("gamma_log_density_gradient: x must be positive");
  return {std::log(p.rate) - digamma(p.shape) + std::log(x),
          p.shape / p.rate - x};
}

inline SymMatrix gamma_log_density_hessian(double x, const GammaParams& p) {
  p.validate();
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("gamma_log_density_hessian: x must be positive");
  SymMatrix h(2);
  h(0, 0) = -trigamma(p.shape);
  h(0, 1) = h(1, 0) = 1.0 / p.rate;
  h(1, 1) = -p.shape / (p.rate * p.rate);
  return h;
}

// Mean and central moments of the Gamma family, up to order 4:
// [mean, mu2, mu3, mu4] truncated to the requested order.
inline std::vector<double> gamma_central_moments(const GammaParams& p, int order) {
  p.validate();
  if (order < 1 || order > 4)
    throw std::domain_error("gamma_central_moments: order must be in 1..4");
  const double a = p.shape;
  const double r = p.rate;
  std::vector<double> m{a / r, a / (r * r), 2.0 * a / (r * r * r),
                        3.0 * a * (a + 2.0) / (r * r * r * r)};
  m.resize(static_cast<std::size_t>(order));
  return m;
}

}  // namespace freqfit
