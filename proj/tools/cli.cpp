#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "siminfer/siminfer.hpp"

#ifndef SIMINFER_FIXTURE_DIR
#define SIMINFER_FIXTURE_DIR "fixtures"
#endif

namespace siminfer::cli {
namespace {

struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedData {
  TwoGroupSample sample;
  std::optional<DatasetManifest> manifest;
};

/// Reads the manifest (if any) and the CSV, then gates on the manifest.
LoadedData load_data(const RunConfig& c) {
  try {
    std::optional<DatasetManifest> manifest;
    if (!c.manifest_path.empty()) manifest = parse_manifest(read_file(c.manifest_path));
    if (c.data_path.empty()) throw ConfigError("no data file given (use --data or --fixture)");
    auto pick = [&](const std::string& flag, std::string DatasetManifest::*field, const char* name) {
      if (!flag.empty()) return flag;
      if (manifest && !((*manifest).*field).empty()) return (*manifest).*field;
      throw ConfigError(std::string("missing --") + name);
    };
    const auto outcome = pick(c.outcome_column, &DatasetManifest::outcome_column, "outcome");
    const auto group = pick(c.group_column, &DatasetManifest::group_column, "group");
    const auto treated = pick(c.treated_label, &DatasetManifest::treated_label, "treated");
    auto sample = load_two_group_sample(read_file(c.data_path), outcome, group, treated);
    if (manifest) {
      const auto check = validate_manifest(sample, *manifest);
      if (!check) {
        std::string msg = "data does not match manifest '" + manifest->name + "':";
        for (const auto& m : check.mismatches) msg += " [" + m + "]";
        throw DataError(msg);
      }
    }
    return {std::move(sample), std::move(manifest)};
  } catch (const ConfigError&) {
    throw;
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(e.what());
  }
}

std::string fixed(double x, int decimals) { return fmt::format("{:.{}f}", x, decimals); }

std::string null_label(const RunConfig& c) {
  switch (c.null_spec) {
    case NullSpec::sharp:
      return "sharp";
    case NullSpec::shift:
      return fmt::format("shift(a={})", c.a);
    case NullSpec::equal_means:
      return fmt::format("equal-means(b={})", c.b);
    case NullSpec::none:
      return "none";
  }
  return "?";
}

SimulationPlan plan_from(const RunConfig& c) {
  SimulationPlan plan;
  if (c.method == "reallocate")
    plan.method = Method::reallocate;
  else if (c.method == "resample-pooled")
    plan.method = Method::resample_pooled;
  else if (c.method == "resample-within")
    plan.method = Method::resample_within;
  else
    throw ConfigError("unknown test method '" + c.method + "'");
  switch (c.null_spec) {
    case NullSpec::sharp:
      plan.hypothesis = SharpNull{};
      break;
    case NullSpec::shift:
      plan.hypothesis = AdditiveShift{c.a};
      break;
    case NullSpec::equal_means:
      plan.hypothesis = EqualMeans{c.b};
      break;
    case NullSpec::none:
      plan.hypothesis = std::nullopt;
      break;
  }
  plan.replicates = c.replicates;
  plan.seed = c.seed;
  plan.exact_threshold = c.exact_threshold;
  try {
    validate_plan(plan);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return plan;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("--level must lie in (0, 1)");
}

nlohmann::json summary_json(const DistributionSummary& s) {
  nlohmann::json j;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["std_error"] = s.std_error;
  j["skewness"] = s.higher_moments_defined ? nlohmann::json(s.skewness) : nlohmann::json(nullptr);
  j["excess_kurtosis"] = s.higher_moments_defined ? nlohmann::json(s.excess_kurtosis) : nlohmann::json(nullptr);
  j["replicates"] = s.replicate_count;
  j["method"] = s.method_tag;
  j["seed"] = s.seed ? nlohmann::json(*s.seed) : nlohmann::json("exact");
  return j;
}

std::string seed_text(const std::optional<std::uint64_t>& seed) {
  return seed ? std::to_string(*seed) : std::string("exact");
}

}  // namespace

int run_test(const RunConfig& c, std::ostream& out) {
  const auto plan = plan_from(c);
  const auto data = load_data(c);
  const auto& sample = data.sample;
  const double tau = diff_in_means(sample);
  const auto dist = simulate(sample, plan, {c.workers});

  if (!c.draws_path.empty()) {
    std::ofstream f(c.draws_path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + c.draws_path + "'");
    write_draws_binary(f, dist.draws);
  }

  auto report = p_value(dist.draws, tau, c.tail, c.convention);
  report.method = dist.summary.method_tag;
  report.seed = dist.summary.seed;
  report.std_error = dist.summary.std_error;
  const auto& s = dist.summary;

  switch (c.format) {
    case OutputFormat::json: {
      nlohmann::json j = report;
      j["null"] = null_label(c);
      j["summary"] = summary_json(s);
      out << j.dump() << '\n';
      break;
    }
    case OutputFormat::csv:
      out << "method,null,observed,std_error,p_value,tail,convention,replicates,seed\n";
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", report.method, null_label(c), tau, s.std_error, report.p,
                         to_string(c.tail), to_string(c.convention), report.replicates, seed_text(report.seed));
      break;
    case OutputFormat::text:
      out << "method:          " << report.method << (dist.exact ? " (exact enumeration)" : " (monte carlo)") << '\n';
      out << "null:            " << null_label(c) << '\n';
      out << "observed:        " << fixed(tau, 6) << '\n';
      out << "std error:       " << fixed(s.std_error, 6) << '\n';
      out << "mean:            " << fixed(s.mean, 6) << '\n';
      if (s.higher_moments_defined) {
        out << "skewness:        " << fixed(s.skewness, 4) << '\n';
        out << "excess kurtosis: " << fixed(s.excess_kurtosis, 4) << '\n';
      } else {
        out << "skewness:        undefined (zero variance)\n";
        out << "excess kurtosis: undefined (zero variance)\n";
      }
      out << "p-value:         " << fmt::format("{:.6g}", report.p) << " (" << to_string(c.tail) << " tail, "
          << to_string(c.convention) << ")\n";
      out << "replicates:      " << report.replicates << '\n';
      out << "seed:            " << seed_text(report.seed) << '\n';
      break;
  }
  return kOk;
}

int run_interval(const RunConfig& c, std::ostream& out) {
  check_level(c.level);
  static const char* kMethods[] = {"invert-reallocation", "bootstrap-t", "bootstrap-percentile",
                                   "reallocation-sharp-se"};
  if (std::find(std::begin(kMethods), std::end(kMethods), c.method) == std::end(kMethods))
    throw ConfigError("unknown interval method '" + c.method + "'");
  if (c.method == "bootstrap-percentile" && static_cast<double>(c.replicates) < 2.0 / (1.0 - c.level))
    throw ConfigError("too few replicates for a percentile interval at this level");
  const auto data = load_data(c);
  const auto& sample = data.sample;
  const ExecutionOptions opts{c.workers};

  InferenceReport r;
  if (c.method == "invert-reallocation")
    r = ci_invert_reallocation(sample, c.level, c.replicates, c.seed, opts);
  else if (c.method == "bootstrap-t")
    r = ci_bootstrap_t(sample, c.level, c.replicates, c.seed, opts);
  else if (c.method == "bootstrap-percentile")
    r = ci_bootstrap_percentile(sample, c.level, c.replicates, c.seed, opts);
  else
    r = ci_reallocation_sharp_se(sample, c.level, c.replicates, c.seed, opts);

  switch (c.format) {
    case OutputFormat::json:
      out << nlohmann::json(r).dump() << '\n';
      break;
    case OutputFormat::csv:
      out << "method,lower,upper,level,recommended,replicates,seed\n";
      out << fmt::format("{},{},{},{},{},{},{}\n", r.method, r.lower, r.upper, *r.level, r.recommended,
                         r.replicates, seed_text(r.seed));
      break;
    case OutputFormat::text:
      out << "method:      " << r.method << '\n';
      out << "interval:    (" << fixed(r.lower, 2) << ", " << fixed(r.upper, 2) << ")\n";
      out << "level:       " << *r.level << '\n';
      if (r.std_error) out << "std error:   " << fixed(*r.std_error, 6) << '\n';
      out << "replicates:  " << r.replicates << '\n';
      out << "seed:        " << seed_text(r.seed) << '\n';
      out << "recommended: " << (r.recommended ? "yes" : "no") << '\n';
      if (!r.recommended)
        out << "warning: the sharp-null SE fixes the hypothesized effect at 0; prefer invert-reallocation or "
               "bootstrap-t\n";
      break;
  }
  return kOk;
}

int run_theory(const RunConfig& c, std::ostream& out) {
  const auto data = load_data(c);
  const auto& sample = data.sample;
  const auto in = theory::VarianceInputs::from_sample(sample);
  using theory::Context;
  using theory::DataMechanism;
  auto se = [&](DataMechanism m, Context ctx) { return std::sqrt(theory::variance({m, ctx}, in)); };

  struct Line {
    const char* key;
    double value;
  };
  const std::vector<Line> lines = {
      {"n1", static_cast<double>(sample.n1())},
      {"n0", static_cast<double>(sample.n0())},
      {"tau_hat", *in.tau_hat},
      {"s", std::sqrt(*in.s2)},
      {"s1", std::sqrt(*in.s1_2)},
      {"s0", std::sqrt(*in.s0_2)},
      {"se_reallocate_sharp", se(DataMechanism::reallocate, Context::sharp_null())},
      {"se_resample_pooled_sharp", se(DataMechanism::resample_pooled, Context::sharp_null())},
      {"se_resample_within", se(DataMechanism::resample_within, Context::estimation())},
      {"se_reallocate_additive_at_tau_hat", se(DataMechanism::reallocate, Context::additive(*in.tau_hat))},
  };
  switch (c.format) {
    case OutputFormat::json: {
      nlohmann::json j;
      for (const auto& l : lines) j[l.key] = l.value;
      out << j.dump() << '\n';
      break;
    }
    case OutputFormat::csv:
      out << "quantity,value\n";
      for (const auto& l : lines) out << l.key << ',' << fmt::format("{}", l.value) << '\n';
      break;
    case OutputFormat::text:
      for (const auto& l : lines) out << fmt::format("{:<36}{:.3f}\n", l.key, l.value);
      break;
  }
  return kOk;
}

std::string render_curve_svg(const std::vector<double>& a, const std::vector<double>& variance, double reference) {
  constexpr double W = 640, H = 400, M = 40;
  const double a_lo = a.front(), a_hi = a.back();
  double v_lo = std::min(reference, *std::min_element(variance.begin(), variance.end()));
  double v_hi = std::max(reference, *std::max_element(variance.begin(), variance.end()));
  if (v_hi - v_lo <= 0.0) v_hi = v_lo + 1.0;
  const double a_span = a_hi - a_lo > 0.0 ? a_hi - a_lo : 1.0;
  auto x = [&](double v) { return M + (v - a_lo) / a_span * (W - 2 * M); };
  auto y = [&](double v) { return H - M - (v - v_lo) / (v_hi - v_lo) * (H - 2 * M); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n", W, H);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", M, H - M, W - M);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", M, M, H - M);
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"blue\" stroke-dasharray=\"2,4\"/>\n", M,
      y(reference), W - M);
  svg += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < a.size(); ++i) svg += fmt::format("{:.2f},{:.2f} ", x(a[i]), y(variance[i]));
  svg += "\"/>\n";
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">a</text>\n", W / 2, H - 10);
  svg += fmt::format("<text x=\"10\" y=\"{}\" font-size=\"12\">var</text>\n", M - 10);
  svg += "</svg>\n";
  return svg;
}

int run_curve(const RunConfig& c, std::ostream& out) {
  if (c.steps < 3) throw ConfigError("--steps must be at least 3");
  const auto data = load_data(c);
  const auto& sample = data.sample;
  const double tau = diff_in_means(sample);
  const double s2 = grand_variance(sample);
  const double reference = theory::var_sharp_reallocate(s2, sample.n1(), sample.n0());

  // default range: 1.5 |tau| plus three sharp-null SEs either side of tau, which
  // shows the vertex and both crossings of the sharp-null level
  const double half = 1.5 * std::abs(tau) + 3.0 * std::sqrt(reference);
  const double lo = c.a_min.value_or(tau - half);
  const double hi = c.a_max.value_or(tau + half);

  std::vector<double> as, vs;
  if (!c.a_min && !c.a_max && half == 0.0) {
    // constant outcomes: the default range collapses onto tau
    as.assign(c.steps, tau);
    vs.assign(c.steps, 0.0);
  } else {
    if (!(lo < hi)) throw ConfigError("--a-min must be below --a-max");
    for (const auto& p : theory::variance_curve(sample, lo, hi, c.steps)) {
      as.push_back(p.a);
      vs.push_back(p.variance);
    }
  }

  std::vector<theory::CurvePoint> points;
  for (std::size_t i = 0; i < as.size(); ++i) points.push_back({as[i], vs[i]});
  const std::string csv_text = theory::curve_to_csv(points);
  if (c.out_path.empty()) {
    out << csv_text;
  } else {
    std::ofstream f(c.out_path);
    if (!f) throw DataError("cannot write '" + c.out_path + "'");
    f << csv_text;
    out << "wrote " << points.size() << " points to " << c.out_path << '\n';
  }
  if (!c.svg_path.empty()) {
    std::ofstream f(c.svg_path);
    if (!f) throw DataError("cannot write '" + c.svg_path + "'");
    f << render_curve_svg(as, vs, reference);
  }
  return kOk;
}

namespace {

struct ReproRow {
  std::string label;
  std::optional<double> se;
  std::optional<double> se_ref;
  bool se_is_analytic = false;
  std::optional<double> p;
  std::string p_ref;
  std::optional<std::pair<double, double>> ci;
  std::optional<std::pair<double, double>> ci_ref;
  bool pass = true;
  std::string note;
};

}  // namespace

int run_reproduce(const RunConfig& c, std::ostream& out) {
  const bool t1 = c.table == "table1";
  if (!t1 && c.table != "table2") throw ConfigError("reproduce expects 'table1' or 'table2'");
  RunConfig dc = c;
  const std::string dir = c.fixtures_dir.empty() ? SIMINFER_FIXTURE_DIR : c.fixtures_dir;
  const std::string stem = t1 ? "sleep_caffeine" : "acs_income";
  if (dc.data_path.empty()) dc.data_path = dir + "/" + stem + ".csv";
  if (dc.manifest_path.empty()) dc.manifest_path = dir + "/" + stem + ".manifest.json";
  const auto data = load_data(dc);
  const auto& sample = data.sample;
  const double tau = diff_in_means(sample);
  const ExecutionOptions opts{c.workers};
  const std::size_t reps = c.replicates;
  auto row_seed = [&](std::uint64_t i) { return derive_seed(c.seed, i); };
  const double ci_tol = t1 ? 0.05 : 0.10;

  auto check_se = [](ReproRow& r) {
    const double tol = r.se_is_analytic ? 0.01 : 0.005 * *r.se_ref;
    if (std::abs(*r.se - *r.se_ref) > tol) r.pass = false;
  };
  auto check_ci = [&](ReproRow& r) {
    if (std::abs(r.ci->first - r.ci_ref->first) > ci_tol || std::abs(r.ci->second - r.ci_ref->second) > ci_tol)
      r.pass = false;
  };

  std::vector<ReproRow> rows;
  const double s2 = grand_variance(sample);
  if (t1) {
    ReproRow truth;
    truth.label = "Truth: random allocation (sharp null)";
    truth.se = std::sqrt(theory::var_sharp_reallocate(s2, sample.n1(), sample.n0()));
    truth.se_ref = 1.505;
    truth.se_is_analytic = true;
    check_se(truth);
    rows.push_back(truth);
  }

  struct TestRow {
    const char* label;
    double se_ref;
    const char* p_ref;
    std::function<std::vector<double>(std::uint64_t)> draw;
  };
  const std::vector<TestRow> tests = {
      {"Reallocating (sharp null)", t1 ? 1.505 : 5.034, t1 ? "0.025" : "2e-5",
       [&](std::uint64_t s) { return reallocate_mc(sample, 0.0, reps, s, opts); }},
      {"Resampling (sharp null)", t1 ? 1.473 : 5.028, t1 ? "0.022" : "1.5e-4",
       [&](std::uint64_t s) { return resample_pooled(sample, reps, s, opts); }},
      {"Resampling (equal means)", t1 ? 1.340 : 4.962, t1 ? "0.013" : "2.6e-4",
       [&](std::uint64_t s) { return resample_equal_means(sample, 0.0, reps, s, opts); }},
  };
  std::vector<double> test_p;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto& t = tests[i];
    const auto draws = t.draw(row_seed(i + 1));
    ReproRow r;
    r.label = t.label;
    r.se = summarize(draws, t.label, row_seed(i + 1)).std_error;
    r.se_ref = t.se_ref;
    check_se(r);
    r.p = p_value(draws, tau, Tail::right).p;
    r.p_ref = t.p_ref;
    test_p.push_back(*r.p);
    rows.push_back(r);
  }
  // p-value rules: small-sample values within 0.002; large-sample values at
  // the resolution floor are checked by order of magnitude and ordering
  const std::size_t first = t1 ? 1 : 0;
  if (t1) {
    const double refs[] = {0.025, 0.022, 0.013};
    for (std::size_t i = 0; i < 3; ++i)
      if (std::abs(test_p[i] - refs[i]) > 0.002) rows[first + i].pass = false;
  } else {
    if (!(test_p[0] < 1e-4)) rows[first].pass = false;
    if (!(test_p[1] < 1e-3 && test_p[1] > test_p[0])) rows[first + 1].pass = false;
    if (std::abs(test_p[2] - 2.6e-4) > 1e-4) rows[first + 2].pass = false;
  }

  {
    ReproRow r;
    r.label = "Reallocating (inverting test)";
    const auto ci = ci_invert_reallocation(sample, 0.95, reps, row_seed(4), opts);
    r.ci = {ci.lower, ci.upper};
    r.ci_ref = t1 ? std::pair{0.00, 6.00} : std::pair{9.13, 28.46};
    check_ci(r);
    rows.push_back(r);
  }
  {
    ReproRow r;
    r.label = "Reallocate (sharp null SE)";
    const auto ci = ci_reallocation_sharp_se(sample, 0.95, reps, row_seed(5), opts);
    r.se = *ci.std_error;
    r.se_ref = t1 ? 1.505 : 5.034;
    check_se(r);
    r.ci = {ci.lower, ci.upper};
    r.ci_ref = t1 ? std::pair{-0.31, 6.31} : std::pair{8.89, 28.72};
    check_ci(r);
    r.note = "not recommended";
    rows.push_back(r);
  }
  {
    ReproRow r;
    r.label = "Resampling";
    const auto ci = ci_bootstrap_t(sample, 0.95, reps, row_seed(6), opts);
    r.se = *ci.std_error;
    r.se_ref = t1 ? 1.340 : 4.962;
    check_se(r);
    r.ci = {ci.lower, ci.upper};
    r.ci_ref = t1 ? std::pair{0.05, 5.95} : std::pair{9.03, 28.58};
    check_ci(r);
    rows.push_back(r);
  }

  bool all = true;
  for (const auto& r : rows) all = all && r.pass;

  if (c.format == OutputFormat::json) {
    for (const auto& r : rows) {
      nlohmann::json j;
      j["table"] = c.table;
      j["row"] = r.label;
      if (r.se) j["se"] = *r.se;
      if (r.se_ref) j["se_reference"] = *r.se_ref;
      if (r.p) j["p_value"] = *r.p;
      if (!r.p_ref.empty()) j["p_reference"] = r.p_ref;
      if (r.ci) j["interval"] = {r.ci->first, r.ci->second};
      if (r.ci_ref) j["interval_reference"] = {r.ci_ref->first, r.ci_ref->second};
      j["pass"] = r.pass;
      out << j.dump() << '\n';
    }
  } else {
    out << fmt::format("{} ({} replicates per row, seed {})\n", c.table, reps, c.seed);
    out << fmt::format("{:<40}{:>16}{:>34}  {}\n", "row", "SE (ref)", "p-value or 95% CI (ref)", "result");
    for (const auto& r : rows) {
      std::string se = r.se ? fmt::format("{:.3f} ({:.3f})", *r.se, *r.se_ref) : "-";
      std::string stat = "-";
      if (r.p) stat = fmt::format("{:.3g} ({})", *r.p, r.p_ref);
      if (r.ci)
        stat = fmt::format("({:.2f}, {:.2f}) ({:.2f}, {:.2f})", r.ci->first, r.ci->second, r.ci_ref->first,
                           r.ci_ref->second);
      out << fmt::format("{:<40}{:>16}{:>34}  {}{}\n", r.label, se, stat, r.pass ? "pass" : "FAIL",
                         r.note.empty() ? "" : " [" + r.note + "]");
    }
    out << (all ? "all rows pass\n" : "some rows FAIL\n");
  }
  return all ? kOk : kNumericalError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reallocation and resampling inference for two-group studies"};
  app.require_subcommand(1);
  RunConfig c;
  if (const char* env = std::getenv("SIMINFER_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (...) {
      err << "error: SIMINFER_SEED is not an unsigned integer\n";
      return kConfigError;
    }
  }
  c.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string fixture, null_text = "sharp", tail_text = "right", convention_text = "plain", format_text = "text";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--data", c.data_path, "CSV file with one row per unit");
    sub->add_option("--manifest", c.manifest_path, "JSON manifest to validate the data against");
    sub->add_option("--fixture", fixture, "bundled dataset: sleep or acs");
    sub->add_option("--fixtures-dir", c.fixtures_dir, "directory holding the bundled fixtures");
    sub->add_option("--outcome", c.outcome_column, "outcome column name");
    sub->add_option("--group", c.group_column, "group column name");
    sub->add_option("--treated", c.treated_label, "group label coded as W = 1");
    sub->add_option("--format", format_text, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--reps", c.replicates, "Monte Carlo replicates")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "base seed (default 42 or $SIMINFER_SEED)");
    sub->add_option("--workers", c.workers, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
  };

  auto* test = app.add_subcommand("test", "p-value from a simulated null distribution");
  add_common(test);
  add_sim(test);
  test->add_option("--method", c.method, "reallocate, resample-pooled or resample-within")->required();
  test->add_option("--null", null_text, "sharp, shift or equal-means");
  test->add_option("--a", c.a, "additive effect for --null shift");
  test->add_option("--b", c.b, "common level for --null equal-means");
  test->add_option("--tail", tail_text, "right, left or two-sided");
  test->add_option("--convention", convention_text, "plain or add-one");
  test->add_option("--exact-threshold", c.exact_threshold, "enumerate reallocations up to this many allocations");
  test->add_option("--draws-out", c.draws_path, "write draws as little-endian float64");

  auto* interval = app.add_subcommand("interval", "confidence interval");
  add_common(interval);
  add_sim(interval);
  interval->add_option("--method", c.method,
                       "invert-reallocation, bootstrap-t, bootstrap-percentile or reallocation-sharp-se")
      ->required();
  interval->add_option("--level", c.level, "confidence level");

  auto* theory_cmd = app.add_subcommand("theory", "closed-form standard errors for the data");
  add_common(theory_cmd);

  auto* curve = app.add_subcommand("curve", "reallocation variance as a function of the additive effect");
  add_common(curve);
  curve->add_option("--a-min", c.a_min, "left end of the grid");
  curve->add_option("--a-max", c.a_max, "right end of the grid");
  curve->add_option("--steps", c.steps, "grid points");
  curve->add_option("--out", c.out_path, "CSV output path (default stdout)");
  curve->add_option("--svg", c.svg_path, "also write an SVG plot");

  auto* reproduce = app.add_subcommand("reproduce", "rerun every row of a reference results table");
  reproduce->add_option("table", c.table, "table1 (sleep) or table2 (acs)")->required();
  reproduce->add_option("--fixtures-dir", c.fixtures_dir, "directory holding the bundled fixtures");
  reproduce->add_option("--format", format_text, "text or json")->check(CLI::IsMember({"text", "json"}));
  add_sim(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    std::string line = msg.str();
    if (auto nl = line.find('\n'); nl != std::string::npos) line.resize(nl);
    err << line << '\n';
    return kConfigError;
  }

  try {
    if (format_text == "json")
      c.format = OutputFormat::json;
    else if (format_text == "csv")
      c.format = OutputFormat::csv;

    if (null_text == "sharp")
      c.null_spec = NullSpec::sharp;
    else if (null_text == "shift")
      c.null_spec = NullSpec::shift;
    else if (null_text == "equal-means")
      c.null_spec = NullSpec::equal_means;
    else if (null_text == "none")
      c.null_spec = NullSpec::none;
    else
      throw ConfigError("unknown --null '" + null_text + "'");

    if (tail_text == "right")
      c.tail = Tail::right;
    else if (tail_text == "left")
      c.tail = Tail::left;
    else if (tail_text == "two-sided")
      c.tail = Tail::two_sided;
    else
      throw ConfigError("unknown --tail '" + tail_text + "'");

    if (convention_text == "plain")
      c.convention = Convention::plain_proportion;
    else if (convention_text == "add-one")
      c.convention = Convention::add_one;
    else
      throw ConfigError("unknown --convention '" + convention_text + "'");

    if (!fixture.empty()) {
      const std::string dir = c.fixtures_dir.empty() ? SIMINFER_FIXTURE_DIR : c.fixtures_dir;
      std::string stem;
      if (fixture == "sleep")
        stem = "sleep_caffeine";
      else if (fixture == "acs")
        stem = "acs_income";
      else
        throw ConfigError("unknown --fixture '" + fixture + "' (expected sleep or acs)");
      if (c.data_path.empty()) c.data_path = dir + "/" + stem + ".csv";
      if (c.manifest_path.empty()) c.manifest_path = dir + "/" + stem + ".manifest.json";
    }

    if (test->parsed()) {
      c.subcommand = Subcommand::test;
      return run_test(c, out);
    }
    if (interval->parsed()) {
      c.subcommand = Subcommand::interval;
      return run_interval(c, out);
    }
    if (theory_cmd->parsed()) {
      c.subcommand = Subcommand::theory;
      return run_theory(c, out);
    }
    if (curve->parsed()) {
      c.subcommand = Subcommand::curve;
      return run_curve(c, out);
    }
    c.subcommand = Subcommand::reproduce;
    return run_reproduce(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace siminfer::cli
