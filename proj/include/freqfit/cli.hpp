#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "freqfit/binomial.hpp"
#include "freqfit/csv.hpp"
#include "freqfit/estimation.hpp"
#include "freqfit/goodness_of_fit.hpp"
#include "freqfit/montecarlo.hpp"
#include "freqfit/version.hpp"

namespace freqfit::cli {

class usage_error : public std::runtime_error {
 public:
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when --help is requested; carries the text to print.
class help_requested {
 public:
  explicit help_requested(std::string text) : text_(std::move(text)) {}
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

struct CommandSpec {
  std::string subcommand;

  // identity
  std::string identity_target = "binomial";
  int n_max = 60;

  // shared inputs/outputs
  std::string input;
  std::string output;  // empty: stdout

  // fit / probable-error
  std::string family = "gamma";
  std::string method = "moments";
  double shape = 2.0;
  double rate = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
  long long n = 1000;

  // test
  std::string policy = "fisher";
  bool both_policies = false;

  // efficiency
  double shape_min = 0.05;
  double shape_max = 50.0;
  int points = 40;

  // simulate
  std::string experiment;
  int table_rows = 2;
  int table_cols = 2;
  std::vector<double> row_probs;
  std::vector<double> col_probs;
  long long total = 400;
  int replicates = 10000;
  std::uint64_t seed = 0;
  double theta0 = 0.2;
  std::string estimator = "min-chi-square";
  std::string model = "linear-probe";
  double model_rate = 1.0;
  std::vector<double> edges = {0.5, 1.0, 2.0, 4.0};
  std::vector<long long> total_grid = {100, 1000, 10000, 100000};
  int sample_size = 5000;
  bool include_samples = false;
  std::string csv_out;
};

inline CommandSpec parse_args(const std::vector<std::string>& argv) {
  CommandSpec spec;
  CLI::App app{"freqfit: goodness-of-fit statistics and probable errors for frequency curves"};
  app.set_version_flag("--version", std::string("freqfit ") + version_string);
  app.require_subcommand(1);

  auto* identity = app.add_subcommand("identity", "verify an exact distribution identity");
  identity->add_option("target", spec.identity_target, "identity to check")
      ->required()
      ->check(CLI::IsMember({"binomial"}));
  identity->add_option("--n-max", spec.n_max, "largest trial count to sweep")
      ->check(CLI::Range(1, 1000));
  identity->add_option("--output", spec.output, "write the JSON report here");

  auto* fit = app.add_subcommand("fit", "fit a frequency family to a one-column CSV sample");
  fit->add_option("--input", spec.input, "sample CSV, one value per line")->required();
  fit->add_option("--family", spec.family)->check(CLI::IsMember({"normal", "gamma"}));
  fit->add_option("--method", spec.method)->check(CLI::IsMember({"moments", "mle"}));
  fit->add_option("--output", spec.output);

  auto* pe = app.add_subcommand("probable-error",
                                "probable errors by the 1898 procedure and corrected");
  pe->add_option("--family", spec.family)->check(CLI::IsMember({"normal", "gamma"}));
  pe->add_option("--method", spec.method)->check(CLI::IsMember({"moments", "mle"}));
  pe->add_option("--shape", spec.shape)->check(CLI::PositiveNumber);
  pe->add_option("--rate", spec.rate)->check(CLI::PositiveNumber);
  pe->add_option("--mu", spec.mu);
  pe->add_option("--sigma", spec.sigma)->check(CLI::PositiveNumber);
  pe->add_option("--n", spec.n, "sample size")->required()->check(CLI::PositiveNumber);
  pe->add_option("--output", spec.output);

  auto* test = app.add_subcommand("test", "chi-square independence test on a table CSV");
  test->add_option("--input", spec.input, "table CSV")->required();
  auto* policy_opt =
      test->add_option("--policy", spec.policy)->check(CLI::IsMember({"pearson1900", "fisher"}));
  test->add_flag("--both", spec.both_policies, "report both df policies")->excludes(policy_opt);
  test->add_option("--output", spec.output);

  auto* dec = app.add_subcommand("decompose",
                                 "decompose chi2 - chi2_s from observed/theoretical/estimated");
  dec->add_option("--input", spec.input, "CSV with three columns")->required();
  dec->add_option("--output", spec.output);

  auto* eff = app.add_subcommand("efficiency", "moment-estimator efficiency curve CSV");
  eff->add_option("--shape-min", spec.shape_min)->check(CLI::PositiveNumber);
  eff->add_option("--shape-max", spec.shape_max)->check(CLI::PositiveNumber);
  eff->add_option("--points", spec.points)->check(CLI::Range(2, 10000));
  eff->add_option("--output", spec.output);

  auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo experiments");
  sim->add_option("experiment", spec.experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember({"table-null", "fisher1924", "gamma-pe", "remainder-scaling"}));
  sim->add_option("--seed", spec.seed, "random seed (required: no wall-clock seeding)")
      ->required();
  sim->add_option("--reps", spec.replicates)->check(CLI::PositiveNumber);
  sim->add_option("--r", spec.table_rows)->check(CLI::Range(2, 64));
  sim->add_option("--c", spec.table_cols)->check(CLI::Range(2, 64));
  sim->add_option("--row-probs", spec.row_probs)->delimiter(',');
  sim->add_option("--col-probs", spec.col_probs)->delimiter(',');
  sim->add_option("--n", spec.total, "table total / sample size")->check(CLI::PositiveNumber);
  sim->add_option("--theta0", spec.theta0);
  sim->add_option("--estimator", spec.estimator)
      ->check(CLI::IsMember({"min-chi-square", "grouped-mle"}));
  sim->add_option("--model", spec.model)
      ->check(CLI::IsMember({"linear-probe", "grouped-gamma"}));
  sim->add_option("--model-rate", spec.model_rate)->check(CLI::PositiveNumber);
  sim->add_option("--edges", spec.edges)->delimiter(',');
  sim->add_option("--n-grid", spec.total_grid)->delimiter(',');
  sim->add_option("--shape", spec.shape)->check(CLI::PositiveNumber);
  sim->add_option("--rate", spec.rate)->check(CLI::PositiveNumber);
  sim->add_flag("--include-samples", spec.include_samples,
                "embed per-replicate samples in the JSON report");
  sim->add_option("--csv", spec.csv_out, "also write per-replicate statistics CSV here");
  sim->add_option("--output", spec.output);

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::string text = app.help();
    for (auto* sub : app.get_subcommands()) text = sub->help();
    throw help_requested(text);
  } catch (const CLI::CallForVersion&) {
    throw help_requested(std::string("freqfit ") + version_string + "\n");
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  spec.subcommand = app.get_subcommands().front()->get_name();
  if (spec.subcommand == "simulate") {
    if (spec.row_probs.empty())
      spec.row_probs.assign(spec.table_rows, 1.0 / spec.table_rows);
    if (spec.col_probs.empty())
      spec.col_probs.assign(spec.table_cols, 1.0 / spec.table_cols);
  }
  return spec;
}

namespace detail {

inline ordered_json report_envelope(const CommandSpec& spec, ordered_json config) {
  ordered_json j;
  j["schema_version"] = 1;
  j["tool"] = "freqfit";
  j["version"] = version_string;
  j["command"] = spec.subcommand;
  j["config"] = std::move(config);
  return j;
}

inline void write_text(const CommandSpec& spec, std::ostream& fallback,
                       const std::string& text) {
  if (spec.output.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(spec.output);
  if (!out) throw io_error("cannot open output file: " + spec.output);
  out << text;
}

inline void write_json(const CommandSpec& spec, std::ostream& fallback,
                       const ordered_json& j) {
  write_text(spec, fallback, j.dump(2) + "\n");
}

inline ordered_json fit_result_json(const FitResult& fit, const std::string& family) {
  ordered_json j;
  j["family"] = family;
  if (family == "normal")
    j["params"] = {{"mu", fit.params[0]}, {"sigma", fit.params[1]}};
  else
    j["params"] = {{"shape", fit.params[0]}, {"rate", fit.params[1]}};
  j["method"] = fit_method_name(fit.method);
  j["sample_size"] = fit.sample_size;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

inline int run_identity(const CommandSpec& spec, std::ostream& out) {
  long long cases = 0;
  long long nonzero = 0;
  ordered_json failures = ordered_json::array();
  for (int n = 1; n <= spec.n_max; ++n) {
    for (int k = 0; k < n; ++k) {
      ++cases;
      if (binomial_difference_identity_residual(n, k) != 0) {
        ++nonzero;
        if (failures.size() < 32) failures.push_back({{"n", n}, {"k", k}});
      }
    }
  }
  ordered_json j = report_envelope(
      spec, {{"target", spec.identity_target}, {"n_max", spec.n_max}});
  j["cases"] = cases;
  j["nonzero_residuals"] = nonzero;
  j["all_zero"] = (nonzero == 0);
  if (nonzero > 0) j["failures"] = failures;
  write_json(spec, out, j);
  return nonzero == 0 ? 0 : 3;
}

inline int run_fit(const CommandSpec& spec, std::ostream& out) {
  auto in = open_input(spec.input);
  const auto sample = parse_sample_csv(in);
  FitResult fit;
  if (spec.family == "normal") {
    fit = fit_normal(sample);
    if (spec.method == "mle") fit.method = FitMethod::maximum_likelihood;
  } else {
    fit = spec.method == "mle" ? fit_gamma_mle(sample) : fit_gamma_moments(sample);
  }
  ordered_json j = report_envelope(spec, {{"input", spec.input},
                                          {"family", spec.family},
                                          {"method", spec.method}});
  j["fit"] = fit_result_json(fit, spec.family);
  write_json(spec, out, j);
  return 0;
}

inline int run_probable_error(const CommandSpec& spec, std::ostream& out) {
  const FitMethod method =
      spec.method == "mle" ? FitMethod::maximum_likelihood : FitMethod::moments;
  AsymptoticReport rep;
  ordered_json params;
  std::vector<std::string> names;
  if (spec.family == "normal") {
    rep = asymptotic_report(NormalParams{spec.mu, spec.sigma}, method,
                            static_cast<std::size_t>(spec.n));
    params = {{"mu", spec.mu}, {"sigma", spec.sigma}};
    names = {"mu", "sigma"};
  } else {
    rep = asymptotic_report(GammaParams{spec.shape, spec.rate}, method,
                            static_cast<std::size_t>(spec.n));
    params = {{"shape", spec.shape}, {"rate", spec.rate}};
    names = {"shape", "rate"};
  }
  ordered_json j = report_envelope(spec, {{"family", spec.family},
                                          {"method", spec.method},
                                          {"params", params},
                                          {"n", spec.n}});
  ordered_json pf, corrected, eff;
  for (std::size_t i = 0; i < names.size(); ++i) {
    pf[names[i]] = rep.pf_probable_errors[i];
    corrected[names[i]] = rep.corrected_probable_errors[i];
    eff[names[i]] = rep.efficiency[i];
  }
  j["pf_probable_errors"] = pf;
  j["corrected_probable_errors"] = corrected;
  j["efficiency"] = eff;
  j["sample_size"] = rep.sample_size;
  write_json(spec, out, j);
  return 0;
}

inline ordered_json test_report_json(const TestReport& rep) {
  return {{"policy", df_policy_name(rep.policy)},
          {"df", rep.df},
          {"p_value", rep.p_value.value()}};
}

inline int run_test(const CommandSpec& spec, std::ostream& out) {
  auto in = open_input(spec.input);
  const auto table = parse_table_csv(in);
  ordered_json j = report_envelope(spec, {{"input", spec.input},
                                          {"policy", spec.both_policies ? "both" : spec.policy},
                                          {"rows", table.rows()},
                                          {"cols", table.cols()},
                                          {"total", table.total()}});
  std::vector<DfPolicy> policies;
  if (spec.both_policies)
    policies = {DfPolicy::pearson1900, DfPolicy::fisher};
  else
    policies = {spec.policy == "pearson1900" ? DfPolicy::pearson1900 : DfPolicy::fisher};

  ordered_json reports = ordered_json::array();
  double statistic = 0.0;
  bool warn = false;
  for (DfPolicy p : policies) {
    const auto rep = test_independence(table, p);
    statistic = rep.statistic;
    warn = rep.low_expected_warning;
    reports.push_back(test_report_json(rep));
  }
  j["statistic"] = statistic;
  j["low_expected_warning"] = warn;
  j["reports"] = reports;
  write_json(spec, out, j);
  return 0;
}

inline int run_decompose(const CommandSpec& spec, std::ostream& out) {
  auto in = open_input(spec.input);
  const auto cols = parse_columns_csv(in);
  ChiSquareDecomposition d;
  try {
    d = decompose_difference(CellData(cols.observed, cols.theoretical, cols.estimated));
  } catch (const std::domain_error& e) {
    throw data_error(e.what());
  }
  ordered_json j = report_envelope(
      spec, {{"input", spec.input}, {"groups", cols.observed.size()}});
  j["chi2"] = d.chi2;
  j["chi2_s"] = d.chi2_s;
  j["term1_with_superfluous"] = d.term1_with_superfluous;
  j["term1"] = d.term1;
  j["term2"] = d.term2;
  j["remainder"] = d.remainder;
  write_json(spec, out, j);
  return 0;
}

inline int run_efficiency(const CommandSpec& spec, std::ostream& out) {
  if (!(spec.shape_max > spec.shape_min))
    throw usage_error("--shape-max must exceed --shape-min");
  std::vector<double> shapes;
  const double lmin = std::log(spec.shape_min), lmax = std::log(spec.shape_max);
  for (int i = 0; i < spec.points; ++i)
    shapes.push_back(std::exp(lmin + (lmax - lmin) * i / (spec.points - 1)));
  const auto rows = shape_efficiency_curve(shapes);
  std::string csv = "shape,efficiency,pe_ratio\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.shape, r.efficiency,
                  r.pe_ratio);
    csv += buf;
  }
  write_text(spec, out, csv);
  return 0;
}

inline std::unique_ptr<ParametricCellModel> make_model(const CommandSpec& spec,
                                                       double total) {
  if (spec.model == "linear-probe")
    return std::make_unique<LinearProbeModel>(total);
  return std::make_unique<GroupedGammaModel>(total, spec.model_rate, spec.edges);
}

inline int run_simulate(const CommandSpec& spec, std::ostream& out) {
  const CellEstimator estimator = spec.estimator == "grouped-mle"
                                      ? CellEstimator::grouped_mle
                                      : CellEstimator::minimum_chi_square;
  ExperimentResult result;
  if (spec.experiment == "table-null") {
    TableNullConfig cfg;
    cfg.row_probs = spec.row_probs;
    cfg.col_probs = spec.col_probs;
    cfg.table_total = spec.total;
    cfg.replicates = spec.replicates;
    cfg.seed = spec.seed;
    result = run_table_null_experiment(cfg);
  } else if (spec.experiment == "fisher1924") {
    Fisher1924Config cfg;
    cfg.theta0 = spec.theta0;
    cfg.replicates = spec.replicates;
    cfg.estimator = estimator;
    cfg.seed = spec.seed;
    const auto model = make_model(spec, static_cast<double>(spec.total));
    result = run_fisher1924_experiment(*model, cfg);
  } else if (spec.experiment == "gamma-pe") {
    GammaPeConfig cfg;
    cfg.shape = spec.shape;
    cfg.rate = spec.rate;
    cfg.sample_size = static_cast<int>(spec.total);
    cfg.replicates = spec.replicates;
    cfg.seed = spec.seed;
    result = run_gamma_pe_experiment(cfg);
  } else {
    RemainderScalingConfig cfg;
    cfg.theta0 = spec.theta0;
    cfg.total_grid = spec.total_grid;
    cfg.replicates = spec.replicates;
    cfg.estimator = estimator;
    cfg.seed = spec.seed;
    CellModelFactory factory = [&spec](double total) { return make_model(spec, total); };
    result = run_remainder_scaling_experiment(factory, cfg);
  }

  ordered_json j = result.to_json(spec.include_samples);
  j["command"] = "simulate";
  if (!spec.csv_out.empty()) {
    std::ofstream csv(spec.csv_out);
    if (!csv) throw io_error("cannot open output file: " + spec.csv_out);
    csv << result.to_csv();
  }
  write_json(spec, out, j);
  return 0;
}

}  // namespace detail

inline int run(const CommandSpec& spec, std::ostream& out) {
  if (spec.subcommand == "identity") return detail::run_identity(spec, out);
  if (spec.subcommand == "fit") return detail::run_fit(spec, out);
  if (spec.subcommand == "probable-error") return detail::run_probable_error(spec, out);
  if (spec.subcommand == "test") return detail::run_test(spec, out);
  if (spec.subcommand == "decompose") return detail::run_decompose(spec, out);
  if (spec.subcommand == "efficiency") return detail::run_efficiency(spec, out);
  if (spec.subcommand == "simulate") return detail::run_simulate(spec, out);
  throw usage_error("unknown subcommand: " + spec.subcommand);
}

// Exit codes: 0 ok, 1 usage, 2 data/input, 3 numeric failure.
inline int main_entry(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  CommandSpec spec;
  try {
    spec = parse_args(args);
  } catch (const help_requested& h) {
    std::cout << h.text();
    return 0;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  }
  try {
    return run(spec, std::cout);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const io_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace freqfit::cli
