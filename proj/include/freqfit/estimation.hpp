#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "freqfit/distributions.hpp"
#include "freqfit/errors.hpp"
#include "freqfit/matrix.hpp"
#include "freqfit/quadrature.hpp"
#include "freqfit/special_functions.hpp"

namespace freqfit {

// Historical probable-error constant, exactly as the era used it (the fuller
// value is 0.674489750196...; the difference is below the error of any of the
// procedures reproduced here).
inline constexpr double probable_error_factor = 0.6745;

enum class FitMethod { moments, maximum_likelihood, minimum_chi_square };

inline const char* fit_method_name(FitMethod m) {
  switch (m) {
    case FitMethod::moments: return "moments";
    case FitMethod::maximum_likelihood: return "maximum_likelihood";
    case FitMethod::minimum_chi_square: return "minimum_chi_square";
  }
  return "unknown";
}

struct FitResult {
  std::vector<double> params;  // normal: (mu, sigma); gamma: (shape, rate); cell model: (theta)
  FitMethod method = FitMethod::moments;
  std::size_t sample_size = 0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

struct SampleMoments {
  double mean;
  double variance;  // 1/n central second moment
  std::size_t n;
};

inline SampleMoments central_moments(const std::vector<double>& sample, const char* who) {
  if (sample.size() < 2)
    throw std::domain_error(std::string(who) + ": need at least two observations");
  double mean = 0.0;
  for (double x : sample) {
    if (!std::isfinite(x))
      throw std::domain_error(std::string(who) + ": sample contains a non-finite value");
    mean += x;
  }
  mean /= static_cast<double>(sample.size());
  double var = 0.0;
  for (double x : sample) var += (x - mean) * (x - mean);
  var /= static_cast<double>(sample.size());
  return {mean, var, sample.size()};
}

}  // namespace detail

// Normal fit; the moment and likelihood solutions coincide for this family.
inline FitResult fit_normal(const std::vector<double>& sample) {
  const auto m = detail::central_moments(sample, "fit_normal");
  if (!(m.variance > 0.0))
    throw std::domain_error("fit_normal: sample is constant");
  return {{m.mean, std::sqrt(m.variance)}, FitMethod::moments, m.n, 0, true};
}

inline FitResult fit_gamma_moments(const std::vector<double>& sample) {
  for (double x : sample)
    if (!(x > 0.0))
      throw std::domain_error("fit_gamma_moments: sample values must be positive");
  const auto m = detail::central_moments(sample, "fit_gamma_moments");
  if (!(m.variance > 0.0))
    throw std::domain_error("fit_gamma_moments: sample is constant");
  const double shape = m.mean * m.mean / m.variance;
  const double rate = m.mean / m.variance;
  return {{shape, rate}, FitMethod::moments, m.n, 0, true};
}

// Gamma maximum likelihood: the shape solves
//   log(k) - psi(k) = log(mean) - mean(log x),
// a strictly decreasing equation in k; Newton from the moments start with a
// bisection fallback keeps the iterate inside a maintained bracket.
inline FitResult fit_gamma_mle(const std::vector<double>& sample) {
  double log_sum = 0.0;
  for (double x : sample) {
    if (!(x > 0.0))
      throw std::domain_error("fit_gamma_mle: sample values must be positive");
    log_sum += std::log(x);
  }
  const auto m = detail::central_moments(sample, "fit_gamma_mle");
  if (!(m.variance > 0.0))
    throw std::domain_error("fit_gamma_mle: sample is constant");
  const double s = std::log(m.mean) - log_sum / static_cast<double>(m.n);
  if (!(s > 0.0))
    throw std::domain_error("fit_gamma_mle: sample is numerically constant");

  auto g = [&](double k) { return std::log(k) - digamma(k) - s; };

  double k = m.mean * m.mean / m.variance;  // moments start
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  double gk = g(k);
  int iter = 0;
  for (; iter < 100; ++iter) {
    if (std::fabs(gk) < 1e-12) break;
    if (gk > 0.0) lo = k; else hi = k;
    const double slope = 1.0 / k - trigamma(k);  // < 0 on (0, inf)
    double next = k - gk / slope;
    if (!(next > lo) || !(next < hi))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * k;
    k = next;
    gk = g(k);
  }
  if (std::fabs(gk) >= 1e-12)
    throw fit_error("fit_gamma_mle: no convergence in 100 iterations", k);
  return {{k, k / m.mean}, FitMethod::maximum_likelihood, m.n, iter, true};
}

// Per-observation expected information, with the evaluation point recorded.
struct InformationMatrix {
  SymMatrix matrix;
  std::vector<double> eval_point;

  InformationMatrix(SymMatrix m, std::vector<double> at)
      : matrix(std::move(m)), eval_point(std::move(at)) {
    if (matrix.max_asymmetry() > 1e-12)
      throw numeric_error("InformationMatrix: matrix is not symmetric");
    matrix.symmetrize();
    if (!matrix.is_positive_definite())
      throw numeric_error("InformationMatrix: matrix is not positive definite");
  }
};

inline InformationMatrix information_normal(const NormalParams& p) {
  p.validate();
  const double s2 = p.sigma * p.sigma;
  return {SymMatrix::from_rows({{1.0 / s2, 0.0}, {0.0, 2.0 / s2}}), {p.mu, p.sigma}};
}

inline InformationMatrix information_gamma(const GammaParams& p) {
  p.validate();
  return {SymMatrix::from_rows({{trigamma(p.shape), -1.0 / p.rate},
                                {-1.0 / p.rate, p.shape / (p.rate * p.rate)}}),
          {p.shape, p.rate}};
}

// A univariate density with parameter derivatives, for the numeric route.
struct ScalarFamily {
  std::size_t param_count;
  double support_lo;
  double support_hi;
  std::function<double(double, const std::vector<double>&)> log_density;
  std::function<std::vector<double>(double, const std::vector<double>&)> gradient;
  std::function<SymMatrix(double, const std::vector<double>&)> hessian;
};

inline ScalarFamily normal_family() {
  ScalarFamily f;
  f.param_count = 2;
  f.support_lo = -std::numeric_limits<double>::infinity();
  f.support_hi = std::numeric_limits<double>::infinity();
  f.log_density = [](double x, const std::vector<double>& p) {
    return normal_log_density(x, {p[0], p[1]});
  };
  f.gradient = [](double x, const std::vector<double>& p) {
    const auto g = normal_log_density_gradient(x, {p[0], p[1]});
    return std::vector<double>{g[0], g[1]};
  };
  f.hessian = [](double x, const std::vector<double>& p) {
    return normal_log_density_hessian(x, {p[0], p[1]});
  };
  return f;
}

inline ScalarFamily gamma_family() {
  ScalarFamily f;
  f.param_count = 2;
  f.support_lo = 0.0;
  f.support_hi = std::numeric_limits<double>::infinity();
  f.log_density = [](double x, const std::vector<double>& p) {
    return gamma_log_density(x, {p[0], p[1]});
  };
  f.gradient = [](double x, const std::vector<double>& p) {
    const auto g = gamma_log_density_gradient(x, {p[0], p[1]});
    return std::vector<double>{g[0], g[1]};
  };
  f.hessian = [](double x, const std::vector<double>& p) {
    return gamma_log_density_hessian(x, {p[0], p[1]});
  };
  return f;
}

namespace detail {

template <typename F>
double integrate_over_support(const F& f, double lo, double hi, double tol) {
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) return integrate_real_line(f, tol);
  if (hi_inf) return integrate_upper(f, lo, tol);
  return integrate(f, lo, hi, tol);
}

}  // namespace detail

// -E[Hessian log f], evaluated by adaptive quadrature over the support.
inline InformationMatrix information_numeric(const ScalarFamily& family,
                                             const std::vector<double>& params,
                                             double tol = 1e-10) {
  const std::size_t p = family.param_count;
  if (params.size() != p)
    throw std::domain_error("information_numeric: parameter count mismatch");
  SymMatrix info(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      auto integrand = [&](double x) {
        const double density = std::exp(family.log_density(x, params));
        if (density == 0.0) return 0.0;
        return density * family.hessian(x, params)(i, j);
      };
      const double v =
          -detail::integrate_over_support(integrand, family.support_lo, family.support_hi, tol);
      info(i, j) = v;
      info(j, i) = v;
    }
  }
  if (info.max_asymmetry() > 1e-8)
    throw numeric_error("information_numeric: result is not symmetric");
  info.symmetrize();
  return {info, params};
}

// E[gradient log f] by quadrature; identically zero when the density and the
// evaluation point agree.
inline std::vector<double> expected_score_numeric(const ScalarFamily& family,
                                                  const std::vector<double>& params,
                                                  double tol = 1e-10) {
  std::vector<double> score(family.param_count, 0.0);
  for (std::size_t i = 0; i < family.param_count; ++i) {
    auto integrand = [&](double x) {
      const double density = std::exp(family.log_density(x, params));
      if (density == 0.0) return 0.0;
      return density * family.gradient(x, params)[i];
    };
    score[i] = detail::integrate_over_support(integrand, family.support_lo,
                                              family.support_hi, tol);
  }
  return score;
}

// The 1898 recipe: probable errors read off the inverse information at the
// plugged-in estimate, with no reference to how the estimate was produced.
// Correct for efficient estimates only; it understates the error of others.
inline std::vector<double> pearson_filon_probable_errors(const InformationMatrix& info,
                                                         std::size_t n) {
  if (n < 1) throw std::domain_error("pearson_filon_probable_errors: n must be >= 1");
  const SymMatrix inv = info.matrix.inverse();
  std::vector<double> pe(info.matrix.size());
  for (std::size_t i = 0; i < pe.size(); ++i)
    pe[i] = probable_error_factor * std::sqrt(inv(i, i) / static_cast<double>(n));
  return pe;
}

namespace detail {

inline double quadratic_logratio(const InformationMatrix& info,
                                 const std::vector<double>& delta, std::size_t n) {
  return -0.5 * static_cast<double>(n) * info.matrix.quadratic_form(delta);
}

}  // namespace detail

// Quadratic approximation to log(P_delta / P_0) about the plugged-in estimate.
inline double pearson_filon_quadratic_logratio(const NormalParams& estimate,
                                               const std::array<double, 2>& delta,
                                               std::size_t n) {
  estimate.validate();
  NormalParams shifted{estimate.mu + delta[0], estimate.sigma + delta[1]};
  shifted.validate();
  return detail::quadratic_logratio(information_normal(estimate), {delta[0], delta[1]}, n);
}

inline double pearson_filon_quadratic_logratio(const GammaParams& estimate,
                                               const std::array<double, 2>& delta,
                                               std::size_t n) {
  estimate.validate();
  GammaParams shifted{estimate.shape + delta[0], estimate.rate + delta[1]};
  shifted.validate();
  return detail::quadratic_logratio(information_gamma(estimate), {delta[0], delta[1]}, n);
}

namespace detail {

// Delta method: V = J * Cov(mean, variance) * J^T, per observation, where the
// moment covariance is assembled from central moments up to order four.
inline SymMatrix delta_method_covariance(const std::array<std::array<double, 2>, 2>& jac,
                                         double mu2, double mu3, double mu4) {
  const double cov[2][2] = {{mu2, mu3}, {mu3, mu4 - mu2 * mu2}};
  SymMatrix v(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s += jac[i][k] * cov[k][l] * jac[j][l];
      v(i, j) = s;
    }
  v.symmetrize();
  return v;
}

}  // namespace detail

// Asymptotic per-observation covariance of the Gamma moment estimators
// (shape, rate) = (mean^2/var, mean/var) as functions of the sample moments.
inline SymMatrix corrected_moments_variance_gamma(const GammaParams& p) {
  p.validate();
  const auto m = gamma_central_moments(p, 4);
  const double mean = m[0], mu2 = m[1], mu3 = m[2], mu4 = m[3];
  const std::array<std::array<double, 2>, 2> jac = {{
      {2.0 * mean / mu2, -mean * mean / (mu2 * mu2)},  // d shape / d(mean, var)
      {1.0 / mu2, -mean / (mu2 * mu2)},                // d rate  / d(mean, var)
  }};
  return detail::delta_method_covariance(jac, mu2, mu3, mu4);
}

// Same construction for the normal moment estimators (mu, sigma); this route
// lands exactly on the inverse information, which is the point of the
// normal-family agreement check.
inline SymMatrix corrected_moments_variance_normal(const NormalParams& p) {
  p.validate();
  const double s2 = p.sigma * p.sigma;
  const double mu2 = s2, mu3 = 0.0, mu4 = 3.0 * s2 * s2;
  const std::array<std::array<double, 2>, 2> jac = {{
      {1.0, 0.0},
      {0.0, 1.0 / (2.0 * p.sigma)},
  }};
  return detail::delta_method_covariance(jac, mu2, mu3, mu4);
}

// Probable errors by the 1898 procedure and by the method-aware corrected
// asymptotics, with per-parameter efficiencies.
struct AsymptoticReport {
  std::vector<double> pf_probable_errors;
  std::vector<double> corrected_probable_errors;
  std::vector<double> efficiency;
  std::size_t sample_size = 0;
};

namespace detail {

inline AsymptoticReport build_report(const InformationMatrix& info,
                                     const SymMatrix& corrected_cov, std::size_t n) {
  AsymptoticReport rep;
  rep.sample_size = n;
  rep.pf_probable_errors = pearson_filon_probable_errors(info, n);
  const SymMatrix inv = info.matrix.inverse();
  for (std::size_t i = 0; i < corrected_cov.size(); ++i) {
    rep.corrected_probable_errors.push_back(
        probable_error_factor * std::sqrt(corrected_cov(i, i) / static_cast<double>(n)));
    rep.efficiency.push_back(std::fmin(1.0, inv(i, i) / corrected_cov(i, i)));
  }
  return rep;
}

}  // namespace detail

inline AsymptoticReport asymptotic_report(const GammaParams& p, FitMethod method,
                                          std::size_t n) {
  const auto info = information_gamma(p);
  if (method == FitMethod::moments)
    return detail::build_report(info, corrected_moments_variance_gamma(p), n);
  if (method == FitMethod::maximum_likelihood)
    return detail::build_report(info, info.matrix.inverse(), n);
  throw std::domain_error("asymptotic_report: unsupported method for a continuous sample");
}

inline AsymptoticReport asymptotic_report(const NormalParams& p, FitMethod method,
                                          std::size_t n) {
  const auto info = information_normal(p);
  if (method == FitMethod::moments)
    return detail::build_report(info, corrected_moments_variance_normal(p), n);
  if (method == FitMethod::maximum_likelihood)
    return detail::build_report(info, info.matrix.inverse(), n);
  throw std::domain_error("asymptotic_report: unsupported method for a continuous sample");
}

struct EfficiencyRow {
  double shape;
  double efficiency;  // (inverse information) / (moment estimator variance), shape entry
  double pe_ratio;    // claimed / true probable error = sqrt(efficiency)
};

// Efficiency of the moment shape estimator along a shape grid.  Both variance
// entries are rate-free, so the rate drops out of the ratio.
inline std::vector<EfficiencyRow> shape_efficiency_curve(const std::vector<double>& shapes) {
  std::vector<EfficiencyRow> rows;
  rows.reserve(shapes.size());
  for (double a : shapes) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::domain_error("shape_efficiency_curve: shapes must be positive");
    const GammaParams p{a, 1.0};
    const SymMatrix inv = information_gamma(p).matrix.inverse();
    const SymMatrix v = corrected_moments_variance_gamma(p);
    const double eff = std::fmin(1.0, inv(0, 0) / v(0, 0));
    rows.push_back({a, eff, std::sqrt(eff)});
  }
  return rows;
}

}  // namespace freqfit
