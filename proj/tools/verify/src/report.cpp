#include "verify/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <sstream>

#include <json.hpp>

#include <cyllevy/error.hpp>
#include <cyllevy/io.hpp>

namespace cyllevy::verify {

using nlohmann::json;

namespace {

Status status_from(std::string_view s) {
  if (s == "pass") return Status::kPass;
  if (s == "fail") return Status::kFail;
  if (s == "flagged") return Status::kFlagged;
  throw FormatError("report: unknown status '" + std::string(s) + "'");
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_row(std::ostringstream& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
  out << '\n';
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("report: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: field '") + key + "': " + e.what());
  }
}

Item make(std::string label, double value, double tolerance, double std_error, Item::Bound bound) {
  if (!std::isfinite(value) || !std::isfinite(tolerance) || !std::isfinite(std_error))
    throw NonFiniteError("non-finite value in '" + label + "'");
  return Item{std::move(label), value, tolerance, std_error, bound, false};
}

}  // namespace

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kPass: return "pass";
    case Status::kFail: return "fail";
    case Status::kFlagged: return "flagged";
  }
  return "fail";
}

Status Item::status() const {
  if (flagged) return Status::kFlagged;
  return margin() >= 0.0 ? Status::kPass : Status::kFail;
}

Item at_most(std::string label, double value, double tolerance, double std_error) {
  return make(std::move(label), value, tolerance, std_error, Item::Bound::kAtMost);
}

Item at_least(std::string label, double value, double tolerance, double std_error) {
  return make(std::move(label), value, tolerance, std_error, Item::Bound::kAtLeast);
}

void CheckResult::add(Item item) { items.push_back(std::move(item)); }

void CheckResult::record(std::string name, double value) {
  if (!std::isfinite(value)) throw NonFiniteError("non-finite recorded value '" + name + "'");
  recorded.emplace_back(std::move(name), value);
}

std::size_t CheckResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const Item& i) { return i.status() == Status::kFail; }));
}

Status CheckResult::status() const {
  if (failures() > 0) return Status::kFail;
  const bool any_flagged =
      std::any_of(items.begin(), items.end(), [](const Item& i) { return i.status() == Status::kFlagged; });
  return any_flagged ? Status::kFlagged : Status::kPass;
}

std::size_t Report::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.failures();
  return n;
}

std::string report_to_json(const Report& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    json items = json::array();
    for (const auto& i : c.items)
      items.push_back({{"label", i.label},
                       {"value", i.value},
                       {"tolerance", i.tolerance},
                       {"bound", i.bound == Item::Bound::kAtMost ? "at_most" : "at_least"},
                       {"margin", i.margin()},
                       {"std_error", i.std_error},
                       {"status", to_string(i.status())}});
    json recorded = json::object();
    for (const auto& [name, value] : c.recorded) recorded[name] = value;
    checks.push_back({{"check", c.check},
                      {"anchor", c.anchor},
                      {"status", to_string(c.status())},
                      {"items", items},
                      {"recorded", recorded}});
  }
  const json j{{"config_hash", report.config_hash},
               {"seed", report.seed},
               {"timestamp", report.timestamp},
               {"runtime_seconds", report.runtime_seconds},
               {"config", json::parse(report.config_json.empty() ? "{}" : report.config_json)},
               {"checks", checks}};
  return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("report: expected an object");
  Report r;
  r.config_hash = get<std::string>(j, "config_hash");
  r.seed = get<std::uint64_t>(j, "seed");
  r.timestamp = get<std::string>(j, "timestamp");
  r.runtime_seconds = get<double>(j, "runtime_seconds");
  if (j.contains("config")) r.config_json = j.at("config").dump();
  const json& checks = j.contains("checks") ? j.at("checks") : json();
  if (!checks.is_array()) throw FormatError("report: checks must be an array");
  for (const json& c : checks) {
    CheckResult out;
    out.check = get<std::string>(c, "check");
    out.anchor = get<std::string>(c, "anchor");
    const json& items = c.contains("items") ? c.at("items") : json();
    if (!items.is_array()) throw FormatError("report: items must be an array");
    for (const json& i : items) {
      Item item;
      item.label = get<std::string>(i, "label");
      item.value = get<double>(i, "value");
      item.tolerance = get<double>(i, "tolerance");
      item.std_error = get<double>(i, "std_error");
      item.bound = get<std::string>(i, "bound") == "at_least" ? Item::Bound::kAtLeast : Item::Bound::kAtMost;
      item.flagged = status_from(get<std::string>(i, "status")) == Status::kFlagged;
      out.items.push_back(std::move(item));
    }
    if (c.contains("recorded"))
      for (const auto& [name, value] : c.at("recorded").items()) out.recorded.emplace_back(name, value.get<double>());
    // The stored status is authoritative for reports written elsewhere.
    const Status stored = status_from(get<std::string>(c, "status"));
    if (stored == Status::kFail && out.failures() == 0) out.items.push_back(Item{"recorded failure", 1.0, 0.0});
    r.checks.push_back(std::move(out));
  }
  return r;
}

std::string items_csv(const CheckResult& check) {
  std::ostringstream out;
  write_row(out, {"label", "value", "tolerance", "margin", "std_error", "status"});
  for (const auto& i : check.items)
    write_row(out, {i.label, format_double(i.value), format_double(i.tolerance), format_double(i.margin()),
                    format_double(i.std_error), std::string(to_string(i.status()))});
  return out.str();
}

std::string table_csv(const Table& table) {
  std::ostringstream out;
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
  return out.str();
}

std::vector<SummaryRow> merge_reports(const std::vector<std::pair<std::string, Report>>& reports) {
  std::map<std::pair<std::string, std::string>, SummaryRow> rows;
  for (const auto& [source, report] : reports) {
    for (const auto& c : report.checks) {
      SummaryRow row{c.check, report.config_hash, report.seed, report.timestamp, c.anchor, c.status(),
                     c.failures(), 0, source};
      row.flagged_items = static_cast<std::size_t>(std::count_if(
          c.items.begin(), c.items.end(), [](const Item& i) { return i.status() == Status::kFlagged; }));
      const auto key = std::make_pair(c.check, report.config_hash);
      const auto it = rows.find(key);
      // ISO 8601 UTC timestamps order lexicographically; ties keep the
      // lexicographically larger source so the merge is order-free.
      if (it == rows.end() || it->second.timestamp < row.timestamp ||
          (it->second.timestamp == row.timestamp && it->second.source < row.source))
        rows[key] = std::move(row);
    }
  }
  std::vector<SummaryRow> out;
  out.reserve(rows.size());
  for (auto& [_, row] : rows) out.push_back(std::move(row));
  return out;
}

std::string summary_json(const std::vector<SummaryRow>& rows) {
  json out = json::array();
  std::size_t failures = 0;
  for (const auto& r : rows) {
    if (r.status == Status::kFail) ++failures;
    out.push_back({{"check", r.check},
                   {"config_hash", r.config_hash},
                   {"seed", r.seed},
                   {"timestamp", r.timestamp},
                   {"anchor", r.anchor},
                   {"status", to_string(r.status)},
                   {"failed_items", r.failed_items},
                   {"flagged_items", r.flagged_items},
                   {"source", r.source}});
  }
  return json{{"rows", out}, {"failures", failures}}.dump(2) + "\n";
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  write_row(out, {"check", "config_hash", "seed", "timestamp", "status", "failed_items", "flagged_items", "anchor",
                  "source"});
  for (const auto& r : rows)
    write_row(out, {r.check, r.config_hash, std::to_string(r.seed), r.timestamp, std::string(to_string(r.status)),
                    std::to_string(r.failed_items), std::to_string(r.flagged_items), r.anchor, r.source});
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() % 1000000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%s.%06lldZ", buf, static_cast<long long>(micros));
  return out;
}

}  // namespace cyllevy::verify
