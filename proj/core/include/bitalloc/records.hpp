#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bitalloc/rounding.hpp"
#include "bitalloc/trace.hpp"

namespace bitalloc {

/// Shortest decimal that parses back to the same double; "nan", "inf",
/// "-inf" for non-finite values.
std::string format_double(double value);

using FieldValue = std::variant<std::int64_t, double, std::string>;

std::string format_field(const FieldValue& value);

/// One output row: named fields in insertion order. Setting an existing
/// name overwrites it in place.
class Record {
 public:
  Record& set(std::string name, FieldValue value);
  const FieldValue* find(std::string_view name) const;
  double number(std::string_view name) const;  // NaN when absent or a string

  const std::vector<std::pair<std::string, FieldValue>>& fields() const noexcept {
    return fields_;
  }

 private:
  std::vector<std::pair<std::string, FieldValue>> fields_;
};

/// Columns whose name contains "seconds" carry wall-clock timings and are
/// the only fields allowed to differ between reruns of the same plan.
bool is_timing_column(std::string_view name);

/// Records sharing one comma-delimited header. The header is the union of
/// field names in first-seen order; missing fields are written empty.
/// Strings containing commas, quotes or newlines are quoted.
class ResultTable {
 public:
  void add(Record record);
  const std::vector<Record>& records() const noexcept { return records_; }
  std::vector<std::string> columns() const;

  void write_csv(std::ostream& out, bool include_timing = true) const;
  std::string to_csv(bool include_timing = true) const;

 private:
  std::vector<Record> records_;
};

/// Writes the table as CSV, creating parent directories as needed.
void save_results(const std::filesystem::path& path, const ResultTable& table);

/// One JSON object per iteration, tagged with the trial index and solver.
void write_trace_jsonl(std::ostream& out, const SolveTrace& trace, int trial,
                       std::string_view solver);

/// Space-separated list of the entries of v, for allocation columns.
std::string format_vector(const Eigen::VectorXd& v);

}  // namespace bitalloc
