#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "freqfit/distributions.hpp"
#include "freqfit/quadrature.hpp"
#include "freqfit/special_functions.hpp"

namespace freqfit {

// One-parameter multinomial cell model: theta -> expected counts m_s(theta)
// summing to the fixed total N, with first and second theta-derivatives.
// The derivative vectors sum to zero because the total does not move.
class ParametricCellModel {
 public:
  virtual ~ParametricCellModel() = default;

  virtual std::size_t cell_count() const = 0;
  virtual double total() const = 0;
  virtual double theta_min() const = 0;
  virtual double theta_max() const = 0;

  virtual std::vector<double> expected_counts(double theta) const = 0;
  virtual std::vector<double> expected_counts_d1(double theta) const = 0;
  virtual std::vector<double> expected_counts_d2(double theta) const = 0;

  std::vector<double> cell_probabilities(double theta) const {
    auto m = expected_counts(theta);
    const double n = total();
    for (auto& v : m) v /= n;
    return m;
  }

 protected:
  void require_in_range(double theta) const {
    if (!std::isfinite(theta) || theta <= theta_min() || theta >= theta_max())
      throw std::domain_error("ParametricCellModel: theta outside the admissible range");
  }
};

// Three cells with probabilities (theta, 2*theta, 1 - 3*theta), theta in (0, 1/3).
class LinearProbeModel final : public ParametricCellModel {
 public:
  explicit LinearProbeModel(double total) : total_(total) {
    if (!(total > 0.0) || !std::isfinite(total))
      throw std::domain_error("LinearProbeModel: total must be positive");
  }

  std::size_t cell_count() const override { return 3; }
  double total() const override { return total_; }
  double theta_min() const override { return 0.0; }
  double theta_max() const override { return 1.0 / 3.0; }

  std::vector<double> expected_counts(double theta) const override {
    require_in_range(theta);
    return {total_ * theta, total_ * 2.0 * theta, total_ * (1.0 - 3.0 * theta)};
  }
  std::vector<double> expected_counts_d1(double theta) const override {
    require_in_range(theta);
    return {total_, 2.0 * total_, -3.0 * total_};
  }
  std::vector<double> expected_counts_d2(double theta) const override {
    require_in_range(theta);
    return {0.0, 0.0, 0.0};
  }

 private:
  double total_;
};

// Gamma observations grouped into fixed bins; theta is the shape, the rate is
// held fixed.  Cell expectations are CDF differences; their theta-derivatives
// are evaluated by quadrature of the differentiated integrand
//   d/da g(t) = g(t) * (log(rate*t) - psi(a)),
// so the derivative path is independent of finite differencing.  The last
// (open) cell absorbs the remainder, which keeps the counts summing to N and
// the derivative vectors summing to zero exactly.
class GroupedGammaModel final : public ParametricCellModel {
 public:
  GroupedGammaModel(double total, double rate, std::vector<double> interior_edges,
                    double shape_min = 0.2, double shape_max = 100.0)
      : total_(total),
        rate_(rate),
        edges_(std::move(interior_edges)),
        shape_min_(shape_min),
        shape_max_(shape_max) {
    if (!(total > 0.0)) throw std::domain_error("GroupedGammaModel: total must be positive");
    if (!(rate > 0.0)) throw std::domain_error("GroupedGammaModel: rate must be positive");
    if (edges_.size() < 2)
      throw std::domain_error("GroupedGammaModel: need at least two interior edges");
    double prev = 0.0;
    for (double e : edges_) {
      if (!(e > prev)) throw std::domain_error("GroupedGammaModel: edges must be positive and increasing");
      prev = e;
    }
    if (!(shape_min_ > 0.0 && shape_max_ > shape_min_))
      throw std::domain_error("GroupedGammaModel: invalid shape range");
  }

  std::size_t cell_count() const override { return edges_.size() + 1; }
  double total() const override { return total_; }
  double theta_min() const override { return shape_min_; }
  double theta_max() const override { return shape_max_; }

  std::vector<double> expected_counts(double theta) const override {
    require_in_range(theta);
    std::vector<double> m(cell_count());
    double prev_cdf = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const double cdf = regularized_gamma_p(theta, rate_ * edges_[i]);
      m[i] = total_ * (cdf - prev_cdf);
      acc += m[i];
      prev_cdf = cdf;
    }
    m.back() = total_ - acc;
    return m;
  }

  std::vector<double> expected_counts_d1(double theta) const override {
    return derivative_counts(theta, 1);
  }
  std::vector<double> expected_counts_d2(double theta) const override {
    return derivative_counts(theta, 2);
  }

 private:
  std::vector<double> derivative_counts(double a, int order) const {
    require_in_range(a);
    const double psi_a = digamma(a);
    const double psi1_a = trigamma(a);
    const double log_norm = a * std::log(rate_) - log_gamma(a);
    auto integrand = [&](double t) {
      const double g = std::exp(log_norm + (a - 1.0) * std::log(t) - rate_ * t);
      const double s = std::log(rate_ * t) - psi_a;
      return order == 1 ? g * s : g * (s * s - psi1_a);
    };
    const double tol = 1e-11 * total_;
    std::vector<double> d(cell_count(), 0.0);
    // First cell starts at the origin where the integrand carries a
    // t^(a-1) * log(t) singularity; t = u^6 renders it smooth for a > 1/6.
    auto first_cell = [&](double u) {
      const double t = u * u * u * u * u * u;
      if (t == 0.0) return 0.0;
      return integrand(t) * 6.0 * u * u * u * u * u;
    };
    d[0] = total_ * integrate(first_cell, 0.0, std::pow(edges_[0], 1.0 / 6.0), tol);
    double acc = d[0];
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      d[i] = total_ * integrate(integrand, edges_[i - 1], edges_[i], tol);
      acc += d[i];
    }
    d.back() = -acc;
    return d;
  }

  double total_;
  double rate_;
  std::vector<double> edges_;
  double shape_min_;
  double shape_max_;
};

}  // namespace freqfit
