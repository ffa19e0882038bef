#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "siminfer/csv.hpp"
#include "siminfer/errors.hpp"

namespace siminfer {

/// Observed outcomes with binary group labels. Immutable once built.
///
/// Invariants: n >= 4, at least two units per group, all outcomes finite.
class TwoGroupSample {
 public:
  TwoGroupSample(std::vector<double> outcomes, std::vector<std::uint8_t> assignments)
      : outcomes_(std::move(outcomes)), assignments_(std::move(assignments)) {
    if (outcomes_.size() != assignments_.size())
      throw ValidationError("outcomes and assignments differ in length");
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
      if (!std::isfinite(outcomes_[i]))
        throw ValidationError("outcome " + std::to_string(i + 1) + " is not finite");
      if (assignments_[i] > 1)
        throw ValidationError("assignment " + std::to_string(i + 1) + " is not 0 or 1");
      n1_ += assignments_[i];
    }
    if (outcomes_.size() < 4) throw ValidationError("need at least 4 units");
    if (n1_ < 2 || n0() < 2) throw ValidationError("each group needs at least 2 units");
    for (std::size_t i = 0; i < outcomes_.size(); ++i)
      (assignments_[i] ? treated_ : control_).push_back(outcomes_[i]);
  }

  std::span<const double> outcomes() const noexcept { return outcomes_; }
  std::span<const std::uint8_t> assignments() const noexcept { return assignments_; }
  /// Outcomes of group w in original row order.
  std::span<const double> group(int w) const noexcept { return w ? treated_ : control_; }

  std::size_t n() const noexcept { return outcomes_.size(); }
  std::size_t n1() const noexcept { return n1_; }
  std::size_t n0() const noexcept { return outcomes_.size() - n1_; }
  double p() const noexcept { return static_cast<double>(n1_) / static_cast<double>(n()); }

  friend bool operator==(const TwoGroupSample& a, const TwoGroupSample& b) {
    return a.outcomes_ == b.outcomes_ && a.assignments_ == b.assignments_;
  }

 private:
  std::vector<double> outcomes_;
  std::vector<std::uint8_t> assignments_;
  std::vector<double> treated_;
  std::vector<double> control_;
  std::size_t n1_ = 0;
};

struct SharpNull {
  friend bool operator==(SharpNull, SharpNull) = default;
};
/// H0: Y(1) = Y(0) + a for every unit.
struct AdditiveShift {
  double a = 0.0;
  friend bool operator==(AdditiveShift, AdditiveShift) = default;
};
/// H0: equal group means; b is the common level the groups are shifted to.
struct EqualMeans {
  double b = 0.0;
  friend bool operator==(EqualMeans, EqualMeans) = default;
};

using Hypothesis = std::variant<SharpNull, AdditiveShift, EqualMeans>;

/// The additive effect a hypothesis implies, if any. SharpNull is a = 0.
inline std::optional<double> implied_shift(const Hypothesis& h) {
  if (std::holds_alternative<SharpNull>(h)) return 0.0;
  if (auto* s = std::get_if<AdditiveShift>(&h)) return s->a;
  return std::nullopt;
}

namespace detail {

inline std::optional<double> parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

inline std::size_t column_index(const csv::Row& header, std::string_view name) {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw SchemaError("missing column '" + std::string(name) + "'");
}

}  // namespace detail

/// Builds a sample from CSV text. Rows whose group equals treated_label get
/// W = 1; row order is preserved. Empty outcome cells are rejected.
inline TwoGroupSample load_two_group_sample(std::string_view csv_text, std::string_view outcome_column,
                                            std::string_view group_column, std::string_view treated_label) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw SchemaError("CSV has no header row");
  const auto& header = rows.front();
  const std::size_t yj = detail::column_index(header, outcome_column);
  const std::size_t wj = detail::column_index(header, group_column);

  std::vector<double> outcomes;
  std::vector<std::uint8_t> assignments;
  std::vector<std::string> labels;
  outcomes.reserve(rows.size() - 1);
  assignments.reserve(rows.size() - 1);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw ParseError("row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields, expected " +
                           std::to_string(header.size()),
                       r);
    auto y = detail::parse_real(row[yj]);
    if (!y) throw ParseError("row " + std::to_string(r) + ": outcome '" + row[yj] + "' is not a finite number", r);
    const std::string& label = row[wj];
    if (label.empty()) throw ParseError("row " + std::to_string(r) + ": missing group label", r);
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    outcomes.push_back(*y);
    assignments.push_back(label == treated_label ? 1 : 0);
  }

  if (labels.size() > 2) throw ValidationError("group column has more than two distinct labels");
  if (std::find(labels.begin(), labels.end(), treated_label) == labels.end())
    throw ValidationError("treated label '" + std::string(treated_label) + "' does not occur in the group column");
  if (labels.size() < 2) throw ValidationError("group column has only one distinct label");
  return TwoGroupSample(std::move(outcomes), std::move(assignments));
}

/// Serializes a sample as two-column CSV using the given labels for W = 1 / W = 0.
inline std::string to_csv(const TwoGroupSample& sample, std::string_view outcome_column = "y",
                          std::string_view group_column = "group", std::string_view treated_label = "1",
                          std::string_view control_label = "0") {
  std::vector<csv::Row> rows;
  rows.push_back({std::string(outcome_column), std::string(group_column)});
  char buf[64];
  for (std::size_t i = 0; i < sample.n(); ++i) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, sample.outcomes()[i]);
    rows.push_back({std::string(buf, end),
                    std::string(sample.assignments()[i] ? treated_label : control_label)});
  }
  return csv::write(rows);
}

}  // namespace siminfer
