#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "siminfer/engine.hpp"
#include "siminfer/report.hpp"

namespace siminfer::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

enum class Subcommand { test, interval, theory, curve, reproduce };
enum class OutputFormat { text, json, csv };
enum class NullSpec { sharp, shift, equal_means, none };

/// Everything a run needs. Paths may be filled from a named fixture.
struct RunConfig {
  Subcommand subcommand = Subcommand::test;
  std::string data_path;
  std::string manifest_path;
  std::string outcome_column;
  std::string group_column;
  std::string treated_label;
  std::string method;
  NullSpec null_spec = NullSpec::sharp;
  double a = 0.0;
  double b = 0.0;
  Tail tail = Tail::right;
  Convention convention = Convention::plain_proportion;
  double level = 0.95;
  std::size_t replicates = 1'000'000;
  std::uint64_t seed = 42;
  std::uint64_t exact_threshold = kDefaultExactThreshold;
  unsigned workers = 1;
  OutputFormat format = OutputFormat::text;
  std::optional<double> a_min, a_max;
  std::size_t steps = 201;
  std::string out_path;
  std::string svg_path;
  std::string draws_path;
  std::string table;  // reproduce: table1 | table2
  std::string fixtures_dir;
};

/// Parses argv and dispatches. Never throws; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int run_test(const RunConfig& config, std::ostream& out);
int run_interval(const RunConfig& config, std::ostream& out);
int run_theory(const RunConfig& config, std::ostream& out);
int run_curve(const RunConfig& config, std::ostream& out);
int run_reproduce(const RunConfig& config, std::ostream& out);

/// Minimal SVG line plot of a variance curve with a horizontal reference line.
std::string render_curve_svg(const std::vector<double>& a, const std::vector<double>& variance, double reference);

}  // namespace siminfer::cli
