#pragma once

// Published summary statistics for a fixture, used to gate reproduction runs.

#include <cfenv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "siminfer/errors.hpp"
#include "siminfer/moments.hpp"
#include "siminfer/sample.hpp"

namespace siminfer {

/// A reported value together with the number of decimals it was reported to.
struct ReportedValue {
  double value = 0.0;
  int decimals = 3;

  /// Parses "15.25" as {15.25, 2}; "36.920" keeps 3 decimals.
  static ReportedValue parse(std::string_view text) {
    auto v = detail::parse_real(text);
    if (!v) throw ParseError("manifest value '" + std::string(text) + "' is not a number");
    const auto dot = text.find('.');
    const int decimals = dot == std::string_view::npos ? 0 : static_cast<int>(text.size() - dot - 1);
    return {*v, decimals};
  }
};

/// Round half-to-even at `decimals` places.
inline double round_half_even(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const int old_mode = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x * scale) / scale;
  std::fesetround(old_mode);
  return r;
}

struct DatasetManifest {
  std::string name;
  std::string outcome_column;
  std::string group_column;
  std::string treated_label;
  std::size_t expected_n1 = 0;
  std::size_t expected_n0 = 0;
  ReportedValue expected_mean1;
  ReportedValue expected_mean0;
  ReportedValue expected_sd_grand;
  ReportedValue expected_sd1;
  ReportedValue expected_sd0;
};

inline DatasetManifest parse_manifest(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw SchemaError(std::string("manifest is missing '") + key + "'");
    return j.at(key);
  };
  auto reported = [&](const char* key) {
    const auto& v = field(key);
    if (v.is_string()) return ReportedValue::parse(v.get<std::string>());
    if (v.is_number()) return ReportedValue{v.get<double>(), 3};
    throw SchemaError(std::string("manifest field '") + key + "' must be a number or numeric string");
  };

  DatasetManifest m;
  m.name = j.value("name", "");
  m.outcome_column = j.value("outcome_column", "");
  m.group_column = j.value("group_column", "");
  m.treated_label = j.value("treated_label", "");
  m.expected_n1 = field("expected_n1").get<std::size_t>();
  m.expected_n0 = field("expected_n0").get<std::size_t>();
  m.expected_mean1 = reported("expected_mean1");
  m.expected_mean0 = reported("expected_mean0");
  m.expected_sd_grand = reported("expected_sd_grand");
  m.expected_sd1 = reported("expected_sd1");
  m.expected_sd0 = reported("expected_sd0");
  return m;
}

struct ManifestCheck {
  bool ok = true;
  std::vector<std::string> mismatches;

  explicit operator bool() const noexcept { return ok; }
};

/// Counts must match exactly; each statistic must agree with the manifest
/// after half-even rounding to the precision the manifest reports it at.
inline ManifestCheck validate_manifest(const TwoGroupSample& sample, const DatasetManifest& manifest) {
  ManifestCheck check;
  auto fail = [&](std::string what) {
    check.ok = false;
    check.mismatches.push_back(std::move(what));
  };
  if (sample.n1() != manifest.expected_n1)
    fail("n1: got " + std::to_string(sample.n1()) + ", expected " + std::to_string(manifest.expected_n1));
  if (sample.n0() != manifest.expected_n0)
    fail("n0: got " + std::to_string(sample.n0()) + ", expected " + std::to_string(manifest.expected_n0));

  auto compare = [&](const char* label, double actual, const ReportedValue& expected) {
    const double rounded = round_half_even(actual, expected.decimals);
    const double want = round_half_even(expected.value, expected.decimals);
    if (std::abs(rounded - want) > 0.5 * std::pow(10.0, -expected.decimals - 1))
      fail(std::string(label) + ": got " + std::to_string(actual) + ", expected " + std::to_string(expected.value));
  };
  compare("mean1", group_mean(sample, 1), manifest.expected_mean1);
  compare("mean0", group_mean(sample, 0), manifest.expected_mean0);
  compare("sd", std::sqrt(grand_variance(sample)), manifest.expected_sd_grand);
  compare("sd1", std::sqrt(group_variance(sample, 1)), manifest.expected_sd1);
  compare("sd0", std::sqrt(group_variance(sample, 0)), manifest.expected_sd0);
  return check;
}

}  // namespace siminfer
