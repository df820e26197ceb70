#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "freqfit/cell_models.hpp"
#include "freqfit/errors.hpp"
#include "freqfit/estimation.hpp"
#include "freqfit/special_functions.hpp"

namespace freqfit {

// Pearson's chi-square against fixed expectations.  Expected cells below one
// are rejected outright; callers that care about the 1-to-5 gray zone can ask
// has_low_expected_cells and surface a warning.
inline double chi_square_stat(const std::vector<double>& observed,
                              const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::domain_error("chi_square_stat: length mismatch");
  double total_obs = 0.0, total_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(observed[i] >= 0.0) || !std::isfinite(observed[i]))
      throw std::domain_error("chi_square_stat: observed counts must be nonnegative");
    if (!(expected[i] >= 1.0) || !std::isfinite(expected[i]))
      throw std::domain_error("chi_square_stat: expected cell below 1 or not finite");
    total_obs += observed[i];
    total_exp += expected[i];
  }
  if (std::fabs(total_obs - total_exp) > 1e-6 * std::fmax(1.0, total_exp))
    throw std::domain_error("chi_square_stat: observed and expected totals disagree");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

inline bool has_low_expected_cells(const std::vector<double>& expected) {
  for (double e : expected)
    if (e < 5.0) return true;
  return false;
}

// Observed counts m', theoretical expectations m, and expectations m_s
// estimated from the data; all three share the same total N.
struct CellData {
  std::vector<double> observed;     // m'
  std::vector<double> theoretical;  // m
  std::vector<double> estimated;    // m_s

  CellData(std::vector<double> obs, std::vector<double> theo, std::vector<double> est)
      : observed(std::move(obs)), theoretical(std::move(theo)), estimated(std::move(est)) {
    if (observed.size() < 2 || observed.size() != theoretical.size() ||
        observed.size() != estimated.size())
      throw std::domain_error("CellData: need >= 2 groups with matching lengths");
    double so = 0.0, st = 0.0, se = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      if (!(observed[i] >= 0.0) || !std::isfinite(observed[i]))
        throw std::domain_error("CellData: observed counts must be finite and nonnegative");
      if (!(theoretical[i] > 0.0) || !std::isfinite(theoretical[i]))
        throw std::domain_error("CellData: theoretical cell must be positive and finite");
      if (!(estimated[i] > 0.0) || !std::isfinite(estimated[i]))
        throw std::domain_error("CellData: estimated cell must be positive and finite");
      so += observed[i];
      st += theoretical[i];
      se += estimated[i];
    }
    const double tol = 1e-9 * std::fmax(1.0, so);
    if (std::fabs(so - st) > tol || std::fabs(so - se) > tol)
      throw std::domain_error("CellData: totals of m', m, m_s must agree");
  }

  double total() const {
    double n = 0.0;
    for (double v : observed) n += v;
    return n;
  }
};

// Term-by-term content of the expansion of chi^2 - chi_s^2 about the
// estimated expectations, carrying both the raw first term and the variant
// whose extra -m_s^2 cancels once summed (Sum mu = 0).  The remainder is the
// exact residual of the two retained terms, not an analytic third-order term.
struct ChiSquareDecomposition {
  double chi2 = 0.0;
  double chi2_s = 0.0;
  double term1_with_superfluous = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double remainder = 0.0;
};

inline ChiSquareDecomposition decompose_difference(const CellData& c) {
  ChiSquareDecomposition d;
  for (std::size_t i = 0; i < c.observed.size(); ++i) {
    const double o = c.observed[i];
    const double m = c.theoretical[i];
    const double ms = c.estimated[i];
    const double mu = m - ms;
    const double rel = mu / ms;
    d.chi2 += (o - m) * (o - m) / m;
    d.chi2_s += (o - ms) * (o - ms) / ms;
    d.term1_with_superfluous -= rel * (o * o - ms * ms) / ms;
    d.term1 -= rel * o * o / ms;
    d.term2 += rel * rel * o * o / ms;
  }
  d.remainder = (d.chi2 - d.chi2_s) - (d.term1 + d.term2);
  return d;
}

// Two-way table of counts with cached margins.
class ContingencyTable {
 public:
  explicit ContingencyTable(std::vector<std::vector<long long>> counts)
      : counts_(std::move(counts)) {
    if (counts_.size() < 2) throw std::domain_error("ContingencyTable: need r >= 2");
    cols_ = counts_.front().size();
    if (cols_ < 2) throw std::domain_error("ContingencyTable: need c >= 2");
    row_totals_.assign(counts_.size(), 0);
    col_totals_.assign(cols_, 0);
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i].size() != cols_)
        throw std::domain_error("ContingencyTable: ragged rows");
      for (std::size_t j = 0; j < cols_; ++j) {
        if (counts_[i][j] < 0)
          throw std::domain_error("ContingencyTable: negative count");
        row_totals_[i] += counts_[i][j];
        col_totals_[j] += counts_[i][j];
        total_ += counts_[i][j];
      }
    }
    if (total_ < 1) throw std::domain_error("ContingencyTable: empty table");
  }

  std::size_t rows() const noexcept { return counts_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  long long at(std::size_t i, std::size_t j) const { return counts_[i][j]; }
  long long row_total(std::size_t i) const { return row_totals_[i]; }
  long long col_total(std::size_t j) const { return col_totals_[j]; }
  long long total() const noexcept { return total_; }

  std::vector<double> flattened() const {
    std::vector<double> flat;
    flat.reserve(rows() * cols());
    for (const auto& row : counts_)
      for (long long v : row) flat.push_back(static_cast<double>(v));
    return flat;
  }

 private:
  std::vector<std::vector<long long>> counts_;
  std::size_t cols_ = 0;
  std::vector<long long> row_totals_;
  std::vector<long long> col_totals_;
  long long total_ = 0;
};

// Independence expectations (row_i * col_j / N), flattened row-major; the
// output margins reproduce the table margins by construction.
inline std::vector<double> expected_counts_independence(const ContingencyTable& t) {
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (t.row_total(i) == 0) throw std::domain_error("expected_counts_independence: zero row margin");
  for (std::size_t j = 0; j < t.cols(); ++j)
    if (t.col_total(j) == 0) throw std::domain_error("expected_counts_independence: zero column margin");
  std::vector<double> exp;
  exp.reserve(t.rows() * t.cols());
  const double n = static_cast<double>(t.total());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j)
      exp.push_back(static_cast<double>(t.row_total(i)) *
                    static_cast<double>(t.col_total(j)) / n);
  return exp;
}

// The 1900 rule never deducts for estimated constants; Fisher's does.
enum class DfPolicy { pearson1900, fisher };

inline const char* df_policy_name(DfPolicy p) {
  return p == DfPolicy::pearson1900 ? "pearson1900" : "fisher";
}

inline int degrees_of_freedom(DfPolicy policy, int groups, int params_estimated) {
  if (groups < 2) throw std::domain_error("degrees_of_freedom: need >= 2 groups");
  if (params_estimated < 0)
    throw std::domain_error("degrees_of_freedom: negative parameter count");
  if (policy == DfPolicy::pearson1900) return groups - 1;
  const int df = groups - 1 - params_estimated;
  if (df <= 0) throw std::domain_error("degrees_of_freedom: model saturates (df <= 0)");
  return df;
}

inline int degrees_of_freedom_table(DfPolicy policy, int r, int c) {
  if (r < 2 || c < 2) throw std::domain_error("degrees_of_freedom_table: need r, c >= 2");
  return policy == DfPolicy::pearson1900 ? r * c - 1 : (r - 1) * (c - 1);
}

struct TestReport {
  double statistic = 0.0;
  int df = 0;
  Probability p_value;
  DfPolicy policy = DfPolicy::fisher;
  bool low_expected_warning = false;
};

inline TestReport test_independence(const ContingencyTable& t, DfPolicy policy) {
  const auto expected = expected_counts_independence(t);
  const double stat = chi_square_stat(t.flattened(), expected);
  const int df = degrees_of_freedom_table(policy, static_cast<int>(t.rows()),
                                          static_cast<int>(t.cols()));
  return {stat, df, chi_square_sf(stat, df), policy, has_low_expected_cells(expected)};
}

namespace detail {

// The minimum chi-square objective Sum (m' - m_s(theta))^2 / m_s(theta);
// equals Sum m'^2/m_s - N because the model total is fixed.
inline double cell_chi2_objective(const ParametricCellModel& model,
                                  const std::vector<double>& observed, double theta) {
  const auto m = model.expected_counts(theta);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double d = observed[i] - m[i];
    s += d * d / m[i];
  }
  return s;
}

inline double cell_chi2_derivative(const ParametricCellModel& model,
                                   const std::vector<double>& observed, double theta) {
  const auto m = model.expected_counts(theta);
  const auto d1 = model.expected_counts_d1(theta);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    s -= observed[i] * observed[i] / (m[i] * m[i]) * d1[i];
  return s;
}

inline double cell_loglik(const ParametricCellModel& model,
                          const std::vector<double>& observed, double theta) {
  const auto m = model.expected_counts(theta);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (observed[i] > 0.0) s += observed[i] * std::log(m[i]);
  return s;
}

inline double cell_score(const ParametricCellModel& model,
                         const std::vector<double>& observed, double theta) {
  const auto m = model.expected_counts(theta);
  const auto d1 = model.expected_counts_d1(theta);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += observed[i] * d1[i] / m[i];
  return s;
}

inline void check_observed_for_model(const ParametricCellModel& model,
                                     const std::vector<double>& observed) {
  if (observed.size() != model.cell_count())
    throw std::domain_error("cell model fit: observed length does not match the model");
  double total = 0.0;
  for (double o : observed) {
    if (!(o >= 0.0) || !std::isfinite(o))
      throw std::domain_error("cell model fit: observed counts must be nonnegative");
    total += o;
  }
  if (std::fabs(total - model.total()) > 1e-6 * std::fmax(1.0, model.total()))
    throw std::domain_error("cell model fit: observed total does not match the model total");
}

// Shared 1-d minimizer: leftmost grid minimum, golden-section shrink, then
// bisection on the derivative inside the final bracket.
template <typename Obj, typename Deriv>
double minimize_scalar(double lo, double hi, const Obj& f, const Deriv& df,
                       int& iterations) {
  constexpr int grid_points = 512;
  const double margin = 1e-6 * (hi - lo);
  const double a0 = lo + margin, b0 = hi - margin;
  const double step = (b0 - a0) / (grid_points - 1);

  int best = 0;
  double best_val = f(a0);
  iterations = 1;
  for (int i = 1; i < grid_points; ++i) {
    const double v = f(a0 + i * step);
    ++iterations;
    if (v < best_val) {  // strict: ties keep the leftmost grid point
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best == grid_points - 1)
    throw numeric_error("cell model fit: no interior minimum in the admissible range");

  const double ga = a0 + (best - 1) * step;
  const double gb = a0 + (best + 1) * step;
  double a = ga;
  double b = gb;
  constexpr double golden = 0.61803398874989485;
  double x1 = b - golden * (b - a);
  double x2 = a + golden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  iterations += 2;
  while (b - a > 1e-10 * (1.0 + std::fabs(a))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = f(x2);
    }
    ++iterations;
  }

  double da = df(a), db = df(b);
  while (!(da < 0.0 && db > 0.0) && (a > ga || b < gb)) {
    const double w = b - a;
    a = std::fmax(ga, a - 4.0 * w);
    b = std::fmin(gb, b + 4.0 * w);
    da = df(a);
    db = df(b);
    iterations += 2;
  }
  if (!(da < 0.0 && db > 0.0)) return 0.5 * (a + b);
  while (b - a > 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(a))) {
    const double mid = 0.5 * (a + b);
    const double dm = df(mid);
    ++iterations;
    if (dm == 0.0) return mid;
    if (dm < 0.0) a = mid; else b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Minimum chi-square estimate of the model's single frequency constant.
inline FitResult min_chi_square_fit(const ParametricCellModel& model,
                                    const std::vector<double>& observed) {
  detail::check_observed_for_model(model, observed);
  int iterations = 0;
  const double theta = detail::minimize_scalar(
      model.theta_min(), model.theta_max(),
      [&](double t) { return detail::cell_chi2_objective(model, observed, t); },
      [&](double t) { return detail::cell_chi2_derivative(model, observed, t); },
      iterations);
  FitResult r;
  r.params = {theta};
  r.method = FitMethod::minimum_chi_square;
  r.sample_size = static_cast<std::size_t>(std::llround(model.total()));
  r.iterations = iterations;
  r.converged = true;
  return r;
}

// Grouped maximum likelihood: maximizes Sum m' log m_s(theta).
inline FitResult grouped_mle_fit(const ParametricCellModel& model,
                                 const std::vector<double>& observed) {
  detail::check_observed_for_model(model, observed);
  int iterations = 0;
  const double theta = detail::minimize_scalar(
      model.theta_min(), model.theta_max(),
      [&](double t) { return -detail::cell_loglik(model, observed, t); },
      [&](double t) { return -detail::cell_score(model, observed, t); },
      iterations);
  FitResult r;
  r.params = {theta};
  r.method = FitMethod::maximum_likelihood;
  r.sample_size = static_cast<std::size_t>(std::llround(model.total()));
  r.iterations = iterations;
  r.converged = true;
  return r;
}

// (theta_hat - theta)^2 * Sum (1/m_s) (dm_s/dtheta)^2 at theta_hat: the
// quadratic form whose summation estimates the reciprocal variance of an
// efficient estimate.
inline double fisher_quadratic_form(const ParametricCellModel& model, double theta_hat,
                                    double theta_true) {
  const auto m = model.expected_counts(theta_hat);
  const auto d1 = model.expected_counts_d1(theta_hat);
  model.expected_counts(theta_true);  // range check for the second argument
  double info = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) info += d1[i] * d1[i] / m[i];
  const double d = theta_hat - theta_true;
  return d * d * info;
}

}  // namespace freqfit
