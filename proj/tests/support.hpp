#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "siminfer/siminfer.hpp"

namespace siminfer::testing {

inline std::string fixture_path(const std::string& name) { return std::string(SIMINFER_FIXTURE_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DatasetManifest manifest(const std::string& stem) {
  return parse_manifest(slurp(fixture_path(stem + ".manifest.json")));
}

/// Loads a bundled fixture and aborts the test run if it fails its manifest.
inline TwoGroupSample load_fixture(const std::string& stem) {
  const auto m = manifest(stem);
  auto s = load_two_group_sample(slurp(fixture_path(stem + ".csv")), m.outcome_column, m.group_column,
                                 m.treated_label);
  if (!validate_manifest(s, m)) throw ValidationError(stem + " fails its manifest");
  return s;
}

inline TwoGroupSample sleep() { return load_fixture("sleep_caffeine"); }
inline TwoGroupSample acs() { return load_fixture("acs_income"); }

inline TwoGroupSample make(std::vector<double> y, std::vector<std::uint8_t> w) {
  return TwoGroupSample(std::move(y), std::move(w));
}

}  // namespace siminfer::testing
