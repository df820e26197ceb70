#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "freqfit/cell_models.hpp"
#include "freqfit/distributions.hpp"
#include "freqfit/errors.hpp"
#include "freqfit/estimation.hpp"
#include "freqfit/goodness_of_fit.hpp"
#include "freqfit/random.hpp"
#include "freqfit/special_functions.hpp"
#include "freqfit/version.hpp"

namespace freqfit {

using ordered_json = nlohmann::ordered_json;

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

inline double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) throw std::domain_error("quantile_of: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

inline double median_of(const std::vector<double>& v) { return quantile_of(v, 0.5); }

inline double pearson_correlation(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::domain_error("pearson_correlation: need two equal-length samples");
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0)
    throw std::domain_error("pearson_correlation: constant sample");
  return sab / std::sqrt(saa * sbb);
}

// Kolmogorov-Smirnov distance between the empirical distribution of the
// samples and the chi-square law with the given degrees of freedom.
inline double ks_distance(const std::vector<double>& samples, double df) {
  if (samples.empty()) throw std::domain_error("ks_distance: empty sample");
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = std::fmax(0.0, s[i]);
    const double cdf = 1.0 - chi_square_sf(x, df).value();
    d = std::fmax(d, std::fabs(static_cast<double>(i + 1) / n - cdf));
    d = std::fmax(d, std::fabs(cdf - static_cast<double>(i) / n));
  }
  return d;
}

inline double rejection_rate(const std::vector<double>& samples, double critical) {
  if (samples.empty()) throw std::domain_error("rejection_rate: empty sample");
  std::size_t hits = 0;
  for (double x : samples)
    if (x > critical) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

// Uniform container for experiment output: the config echo, per-replicate
// statistic columns in a fixed order, and summaries recomputable from the
// columns.  Replicate i always consumes RandomStream(seed, i), so reported
// content does not depend on execution order.
struct ExperimentResult {
  std::string name;
  ordered_json config;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  ordered_json summaries;
  long long failed_replicates = 0;

  const std::vector<double>& column(const std::string& key) const {
    for (const auto& [k, v] : columns)
      if (k == key) return v;
    throw std::domain_error("ExperimentResult: no column named " + key);
  }

  ordered_json to_json(bool include_samples = false) const {
    ordered_json j;
    j["schema_version"] = 1;
    j["tool"] = "freqfit";
    j["version"] = version_string;
    j["name"] = name;
    j["config"] = config;
    j["failed_replicates"] = failed_replicates;
    j["summaries"] = summaries;
    if (include_samples) {
      ordered_json cols;
      for (const auto& [k, v] : columns) cols[k] = v;
      j["samples"] = cols;
    }
    return j;
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += columns[c].first;
    }
    out += '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().second.size();
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        std::snprintf(buf, sizeof buf, "%.17g", columns[c].second[r]);
        out += buf;
      }
      out += '\n';
    }
    return out;
  }
};

namespace detail {

inline ordered_json summary_block(const std::vector<double>& v) {
  ordered_json j;
  j["mean"] = mean_of(v);
  j["variance"] = variance_of(v);
  j["q05"] = quantile_of(v, 0.05);
  j["q25"] = quantile_of(v, 0.25);
  j["q50"] = quantile_of(v, 0.50);
  j["q75"] = quantile_of(v, 0.75);
  j["q95"] = quantile_of(v, 0.95);
  return j;
}

inline void enforce_failure_cap(long long failed, long long replicates) {
  if (failed * 100 > replicates)
    throw numeric_error("experiment: more than 1% of replicates failed");
}

inline void validate_probability_vector(const std::vector<double>& p, const char* who) {
  if (p.empty()) throw std::domain_error(std::string(who) + ": empty probability vector");
  double s = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::domain_error(std::string(who) + ": probabilities must be positive");
    s += v;
  }
  if (std::fabs(s - 1.0) > 1e-12)
    throw std::domain_error(std::string(who) + ": probabilities must sum to 1");
}

}  // namespace detail

// --------------------------------------------------------------------------
// Null calibration of the independence chi-square over r x c tables.

struct TableNullConfig {
  std::vector<double> row_probs;
  std::vector<double> col_probs;
  long long table_total = 400;
  int replicates = 10000;
  std::uint64_t seed = 0;
};

inline ExperimentResult run_table_null_experiment(const TableNullConfig& cfg) {
  detail::validate_probability_vector(cfg.row_probs, "run_table_null_experiment");
  detail::validate_probability_vector(cfg.col_probs, "run_table_null_experiment");
  if (cfg.replicates < 1) throw std::domain_error("run_table_null_experiment: replicates >= 1");
  const std::size_t r = cfg.row_probs.size(), c = cfg.col_probs.size();
  if (r < 2 || c < 2) throw std::domain_error("run_table_null_experiment: need r, c >= 2");

  std::vector<double> joint;
  joint.reserve(r * c);
  double min_p = 1.0;
  for (double pi : cfg.row_probs)
    for (double qj : cfg.col_probs) {
      joint.push_back(pi * qj);
      min_p = std::fmin(min_p, pi * qj);
    }
  if (static_cast<double>(cfg.table_total) * min_p < 20.0)
    throw std::domain_error("run_table_null_experiment: design floor N * min cell prob >= 20 violated");

  std::vector<double> chi2s;
  chi2s.reserve(cfg.replicates);
  long long failed = 0;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    RandomStream stream(cfg.seed, static_cast<std::uint64_t>(rep));
    const auto counts = sample_multinomial(joint, cfg.table_total, stream);
    std::vector<std::vector<long long>> rows(r, std::vector<long long>(c));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) rows[i][j] = counts[i * c + j];
    try {
      const ContingencyTable table(std::move(rows));
      const auto expected = expected_counts_independence(table);
      chi2s.push_back(chi_square_stat(table.flattened(), expected));
    } catch (const std::exception&) {
      ++failed;  // zero margin or degenerate expectations; excluded with a tally
    }
  }
  detail::enforce_failure_cap(failed, cfg.replicates);

  const int df_fisher = degrees_of_freedom_table(DfPolicy::fisher, static_cast<int>(r),
                                                 static_cast<int>(c));
  const int df_pearson = degrees_of_freedom_table(DfPolicy::pearson1900, static_cast<int>(r),
                                                  static_cast<int>(c));
  const double crit_fisher = chi_square_quantile(Probability(0.95), df_fisher);
  const double crit_pearson = chi_square_quantile(Probability(0.95), df_pearson);

  ExperimentResult out;
  out.name = "table-null";
  out.config = {{"rows", r},
                {"cols", c},
                {"row_probs", cfg.row_probs},
                {"col_probs", cfg.col_probs},
                {"table_total", cfg.table_total},
                {"replicates", cfg.replicates},
                {"seed", cfg.seed}};
  out.failed_replicates = failed;
  out.columns.emplace_back("chi2_s", std::move(chi2s));
  const auto& samples = out.columns.front().second;
  out.summaries["chi2_s"] = detail::summary_block(samples);
  out.summaries["ks"] = {{"df_fisher", df_fisher},
                         {"distance_fisher_df", ks_distance(samples, df_fisher)},
                         {"df_pearson1900", df_pearson},
                         {"distance_pearson1900_df", ks_distance(samples, df_pearson)}};
  out.summaries["rejection_rate_at_0.05"] = {
      {"fisher_critical", crit_fisher},
      {"fisher", rejection_rate(samples, crit_fisher)},
      {"pearson1900_critical", crit_pearson},
      {"pearson1900", rejection_rate(samples, crit_pearson)}};
  return out;
}

// --------------------------------------------------------------------------
// The 1924 identity: chi^2 - chi_s^2 against the quadratic form in theta.

enum class CellEstimator { minimum_chi_square, grouped_mle };

inline const char* cell_estimator_name(CellEstimator e) {
  return e == CellEstimator::minimum_chi_square ? "min_chi_square" : "grouped_mle";
}

struct Fisher1924Config {
  double theta0 = 0.2;
  int replicates = 4000;
  CellEstimator estimator = CellEstimator::minimum_chi_square;
  std::uint64_t seed = 0;
};

inline ExperimentResult run_fisher1924_experiment(const ParametricCellModel& model,
                                                  const Fisher1924Config& cfg) {
  if (cfg.replicates < 1) throw std::domain_error("run_fisher1924_experiment: replicates >= 1");
  const auto probs = model.cell_probabilities(cfg.theta0);
  const auto m0 = model.expected_counts(cfg.theta0);
  const long long total = std::llround(model.total());

  std::vector<double> chi2, chi2_s, diff, qform, term1, remainder, theta_hat;
  long long failed = 0;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    RandomStream stream(cfg.seed, static_cast<std::uint64_t>(rep));
    const auto counts = sample_multinomial(probs, total, stream);
    std::vector<double> obs(counts.begin(), counts.end());
    try {
      const FitResult fit = cfg.estimator == CellEstimator::minimum_chi_square
                                ? min_chi_square_fit(model, obs)
                                : grouped_mle_fit(model, obs);
      const double th = fit.params[0];
      const auto ms = model.expected_counts(th);
      const auto d = decompose_difference(CellData(obs, m0, ms));
      chi2.push_back(d.chi2);
      chi2_s.push_back(d.chi2_s);
      diff.push_back(d.chi2 - d.chi2_s);
      qform.push_back(fisher_quadratic_form(model, th, cfg.theta0));
      term1.push_back(d.term1);
      remainder.push_back(d.remainder);
      theta_hat.push_back(th);
    } catch (const std::exception&) {
      ++failed;
    }
  }
  detail::enforce_failure_cap(failed, cfg.replicates);

  ExperimentResult out;
  out.name = "fisher1924";
  out.config = {{"theta0", cfg.theta0},
                {"cells", model.cell_count()},
                {"table_total", total},
                {"replicates", cfg.replicates},
                {"estimator", cell_estimator_name(cfg.estimator)},
                {"seed", cfg.seed}};
  out.failed_replicates = failed;
  out.columns.emplace_back("chi2", std::move(chi2));
  out.columns.emplace_back("chi2_s", std::move(chi2_s));
  out.columns.emplace_back("diff", std::move(diff));
  out.columns.emplace_back("quadratic_form", std::move(qform));
  out.columns.emplace_back("term1", std::move(term1));
  out.columns.emplace_back("remainder", std::move(remainder));
  out.columns.emplace_back("theta_hat", std::move(theta_hat));

  const auto& dcol = out.column("diff");
  std::vector<double> abs_term1;
  abs_term1.reserve(dcol.size());
  for (double t : out.column("term1")) abs_term1.push_back(std::fabs(t));
  out.summaries["diff"] = detail::summary_block(dcol);
  out.summaries["ks_diff_vs_df1"] = ks_distance(dcol, 1.0);
  out.summaries["correlation_diff_quadratic_form"] =
      pearson_correlation(dcol, out.column("quadratic_form"));
  out.summaries["median_abs_term1"] = median_of(abs_term1);
  out.summaries["median_abs_remainder"] = median_of([&] {
    std::vector<double> a;
    for (double v : out.column("remainder")) a.push_back(std::fabs(v));
    return a;
  }());
  return out;
}

// --------------------------------------------------------------------------
// Probable errors for the Gamma shape under moment and likelihood fitting.

struct GammaPeConfig {
  double shape = 2.0;
  double rate = 1.0;
  int sample_size = 5000;
  int replicates = 2000;
  std::uint64_t seed = 0;
};

inline ExperimentResult run_gamma_pe_experiment(const GammaPeConfig& cfg) {
  const GammaParams truth{cfg.shape, cfg.rate};
  truth.validate();
  if (cfg.sample_size < 100)
    throw std::domain_error("run_gamma_pe_experiment: sample size must be >= 100");
  if (cfg.replicates < 1) throw std::domain_error("run_gamma_pe_experiment: replicates >= 1");

  std::vector<double> shape_mm, rate_mm, shape_ml, rate_ml;
  long long failed = 0;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    RandomStream stream(cfg.seed, static_cast<std::uint64_t>(rep));
    const auto sample = sample_gamma(truth, static_cast<std::size_t>(cfg.sample_size), stream);
    try {
      const FitResult mm = fit_gamma_moments(sample);
      const FitResult ml = fit_gamma_mle(sample);
      shape_mm.push_back(mm.params[0]);
      rate_mm.push_back(mm.params[1]);
      shape_ml.push_back(ml.params[0]);
      rate_ml.push_back(ml.params[1]);
    } catch (const std::exception&) {
      ++failed;
    }
  }
  detail::enforce_failure_cap(failed, cfg.replicates);

  auto abs_errors = [&](const std::vector<double>& v) {
    std::vector<double> e;
    e.reserve(v.size());
    for (double x : v) e.push_back(std::fabs(x - cfg.shape));
    return e;
  };
  const double actual_pe_mm = median_of(abs_errors(shape_mm));
  const double actual_pe_ml = median_of(abs_errors(shape_ml));
  const double claimed_pe =
      pearson_filon_probable_errors(information_gamma(truth),
                                    static_cast<std::size_t>(cfg.sample_size))[0];

  ExperimentResult out;
  out.name = "gamma-pe";
  out.config = {{"shape", cfg.shape},
                {"rate", cfg.rate},
                {"sample_size", cfg.sample_size},
                {"replicates", cfg.replicates},
                {"seed", cfg.seed}};
  out.failed_replicates = failed;
  out.columns.emplace_back("shape_moments", std::move(shape_mm));
  out.columns.emplace_back("rate_moments", std::move(rate_mm));
  out.columns.emplace_back("shape_mle", std::move(shape_ml));
  out.columns.emplace_back("rate_mle", std::move(rate_ml));

  // Median-error probable errors (the literal definition) next to the
  // 0.6745-sigma convention, for comparison.
  out.summaries["claimed_pf_probable_error_shape"] = claimed_pe;
  out.summaries["actual_probable_error_shape_moments"] = actual_pe_mm;
  out.summaries["actual_probable_error_shape_mle"] = actual_pe_ml;
  out.summaries["sd_based_probable_error_shape_moments"] =
      probable_error_factor * std::sqrt(variance_of(out.column("shape_moments")));
  out.summaries["sd_based_probable_error_shape_mle"] =
      probable_error_factor * std::sqrt(variance_of(out.column("shape_mle")));
  out.summaries["ratio_claimed_to_actual_moments"] = claimed_pe / actual_pe_mm;
  out.summaries["ratio_claimed_to_actual_mle"] = claimed_pe / actual_pe_ml;
  return out;
}

// --------------------------------------------------------------------------
// The dropped remainder of the decomposition, measured along a grid of N.

using CellModelFactory = std::function<std::unique_ptr<ParametricCellModel>(double total)>;

inline CellModelFactory linear_probe_factory() {
  return [](double total) { return std::make_unique<LinearProbeModel>(total); };
}

struct RemainderScalingConfig {
  double theta0 = 0.2;
  std::vector<long long> total_grid = {100, 1000, 10000, 100000};
  int replicates = 400;
  CellEstimator estimator = CellEstimator::minimum_chi_square;
  std::uint64_t seed = 0;
};

inline ExperimentResult run_remainder_scaling_experiment(const CellModelFactory& factory,
                                                         const RemainderScalingConfig& cfg) {
  if (cfg.total_grid.size() < 3)
    throw std::domain_error("run_remainder_scaling_experiment: need >= 3 grid points");
  for (std::size_t i = 1; i < cfg.total_grid.size(); ++i)
    if (cfg.total_grid[i] <= cfg.total_grid[i - 1])
      throw std::domain_error("run_remainder_scaling_experiment: grid must be strictly increasing");
  if (cfg.replicates < 1)
    throw std::domain_error("run_remainder_scaling_experiment: replicates >= 1");

  std::vector<double> col_total, col_absrem;
  std::vector<double> medians;
  long long failed = 0;
  for (std::size_t gi = 0; gi < cfg.total_grid.size(); ++gi) {
    const long long total = cfg.total_grid[gi];
    const auto model = factory(static_cast<double>(total));
    const auto probs = model->cell_probabilities(cfg.theta0);
    const auto m0 = model->expected_counts(cfg.theta0);
    std::vector<double> absrem;
    absrem.reserve(cfg.replicates);
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      RandomStream stream(cfg.seed,
                          static_cast<std::uint64_t>(gi) * cfg.replicates + rep);
      const auto counts = sample_multinomial(probs, total, stream);
      std::vector<double> obs(counts.begin(), counts.end());
      try {
        const FitResult fit = cfg.estimator == CellEstimator::minimum_chi_square
                                  ? min_chi_square_fit(*model, obs)
                                  : grouped_mle_fit(*model, obs);
        const auto ms = model->expected_counts(fit.params[0]);
        const auto d = decompose_difference(CellData(obs, m0, ms));
        absrem.push_back(std::fabs(d.remainder));
        col_total.push_back(static_cast<double>(total));
        col_absrem.push_back(std::fabs(d.remainder));
      } catch (const std::exception&) {
        ++failed;
      }
    }
    if (absrem.empty())
      throw numeric_error("run_remainder_scaling_experiment: all replicates failed at a grid point");
    medians.push_back(median_of(absrem));
  }
  detail::enforce_failure_cap(failed,
                              static_cast<long long>(cfg.replicates) *
                                  static_cast<long long>(cfg.total_grid.size()));

  // Least-squares slope of log(median |remainder|) against log(N).
  const std::size_t k = cfg.total_grid.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = std::log(static_cast<double>(cfg.total_grid[i]));
    const double y = std::log(medians[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double kk = static_cast<double>(k);
  const double slope = (kk * sxy - sx * sy) / (kk * sxx - sx * sx);

  ExperimentResult out;
  out.name = "remainder-scaling";
  out.config = {{"theta0", cfg.theta0},
                {"total_grid", cfg.total_grid},
                {"replicates", cfg.replicates},
                {"estimator", cell_estimator_name(cfg.estimator)},
                {"seed", cfg.seed}};
  out.failed_replicates = failed;
  out.columns.emplace_back("table_total", std::move(col_total));
  out.columns.emplace_back("abs_remainder", std::move(col_absrem));
  out.summaries["median_abs_remainder_per_total"] = medians;
  out.summaries["loglog_slope"] = slope;
  return out;
}

}  // namespace freqfit
