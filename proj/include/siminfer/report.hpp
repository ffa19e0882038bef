#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "siminfer/errors.hpp"

namespace siminfer {

enum class ReportKind { p_value, interval };
enum class Tail { right, left, two_sided };
enum class Convention { plain_proportion, add_one };

NLOHMANN_JSON_SERIALIZE_ENUM(ReportKind, {{ReportKind::p_value, "p_value"}, {ReportKind::interval, "interval"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Tail, {{Tail::right, "right"}, {Tail::left, "left"}, {Tail::two_sided, "two_sided"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Convention,
                             {{Convention::plain_proportion, "plain_proportion"}, {Convention::add_one, "add_one"}})

inline const char* to_string(Tail t) {
  switch (t) {
    case Tail::right:
      return "right";
    case Tail::left:
      return "left";
    case Tail::two_sided:
      return "two_sided";
  }
  return "?";
}

inline const char* to_string(Convention c) {
  return c == Convention::add_one ? "add_one" : "plain_proportion";
}

/// A p-value or an interval, with the metadata needed to reproduce it.
struct InferenceReport {
  ReportKind kind = ReportKind::p_value;
  double p = std::nan("");  // p_value reports
  double lower = std::nan("");  // interval reports
  double upper = std::nan("");
  Tail tail = Tail::right;
  std::optional<double> level;
  std::string method;
  Convention convention = Convention::plain_proportion;
  std::uint64_t replicates = 0;
  std::optional<std::uint64_t> seed;  // empty for exact enumeration
  bool recommended = true;
  std::optional<double> estimate;
  std::optional<double> std_error;

  friend bool operator==(const InferenceReport& a, const InferenceReport& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.kind == b.kind && same(a.p, b.p) && same(a.lower, b.lower) && same(a.upper, b.upper) &&
           a.tail == b.tail && a.level == b.level && a.method == b.method && a.convention == b.convention &&
           a.replicates == b.replicates && a.seed == b.seed && a.recommended == b.recommended &&
           a.estimate == b.estimate && a.std_error == b.std_error;
  }
};

inline void to_json(nlohmann::json& j, const InferenceReport& r) {
  j = nlohmann::json::object();
  j["kind"] = r.kind;
  if (r.kind == ReportKind::p_value) {
    j["p_value"] = r.p;
  } else {
    j["lower"] = r.lower;
    j["upper"] = r.upper;
  }
  j["tail"] = r.tail;
  j["level"] = r.level ? nlohmann::json(*r.level) : nlohmann::json(nullptr);
  j["method"] = r.method;
  j["convention"] = r.convention;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json("exact");
  j["recommended"] = r.recommended;
  if (r.estimate) j["estimate"] = *r.estimate;
  if (r.std_error) j["std_error"] = *r.std_error;
}

inline void from_json(const nlohmann::json& j, InferenceReport& r) {
  r = InferenceReport{};
  j.at("kind").get_to(r.kind);
  if (r.kind == ReportKind::p_value) {
    r.p = j.at("p_value").get<double>();
  } else {
    r.lower = j.at("lower").get<double>();
    r.upper = j.at("upper").get<double>();
  }
  j.at("tail").get_to(r.tail);
  if (!j.at("level").is_null()) r.level = j.at("level").get<double>();
  j.at("method").get_to(r.method);
  j.at("convention").get_to(r.convention);
  j.at("replicates").get_to(r.replicates);
  if (j.at("seed").is_number_unsigned()) r.seed = j.at("seed").get<std::uint64_t>();
  j.at("recommended").get_to(r.recommended);
  if (j.contains("estimate")) r.estimate = j.at("estimate").get<double>();
  if (j.contains("std_error")) r.std_error = j.at("std_error").get<double>();
}

}  // namespace siminfer
