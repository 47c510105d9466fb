#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyllevy::verify {

enum class Status { kPass, kFail, kFlagged };

std::string_view to_string(Status status);

/// A non-finite number reached a report; carries the label it belongs to.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One measured quantity compared against a bound.
struct Item {
  enum class Bound { kAtMost, kAtLeast };

  std::string label;
  double value = 0.0;
  double tolerance = 0.0;
  double std_error = 0.0;
  Bound bound = Bound::kAtMost;
  bool flagged = false;  // statistically unreliable: listed, never failing

  [[nodiscard]] double margin() const { return bound == Bound::kAtMost ? tolerance - value : value - tolerance; }
  [[nodiscard]] Status status() const;
};

/// value <= tolerance
Item at_most(std::string label, double value, double tolerance, double std_error = 0.0);
/// value >= tolerance
Item at_least(std::string label, double value, double tolerance, double std_error = 0.0);

/// Plot-ready table written to tables/<check>-<name>.csv.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct CheckResult {
  std::string check;
  std::string anchor;
  std::vector<Item> items;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, double>> recorded;  // constants recorded, not asserted

  void add(Item item);
  void record(std::string name, double value);
  [[nodiscard]] Status status() const;
  [[nodiscard]] std::size_t failures() const;
};

struct Report {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;  // UTC, ISO 8601
  double runtime_seconds = 0.0;
  std::string config_json;  // canonical form of the effective configuration
  std::vector<CheckResult> checks;

  [[nodiscard]] std::size_t failures() const;
};

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view text);

/// CSV of the items of one check: label,value,tolerance,margin,std_error,status.
std::string items_csv(const CheckResult& check);
std::string table_csv(const Table& table);

/// One row per (check, config_hash); the latest timestamp wins. Rows are
/// ordered by check name, then config hash.
struct SummaryRow {
  std::string check;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string anchor;
  Status status = Status::kPass;
  std::size_t failed_items = 0;
  std::size_t flagged_items = 0;
  std::string source;
};

std::vector<SummaryRow> merge_reports(const std::vector<std::pair<std::string, Report>>& reports);
std::string summary_json(const std::vector<SummaryRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);

std::string utc_timestamp();

}  // namespace cyllevy::verify
