#include "bitalloc/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bitalloc/error.hpp"

namespace bitalloc {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error(ErrorCode::kIo, "cannot format double");
  return std::string(buffer, ptr);
}

std::string format_field(const FieldValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
  return std::get<std::string>(value);
}

Record& Record::set(std::string name, FieldValue value) {
  for (auto& [key, existing] : fields_) {
    if (key == name) {
      existing = std::move(value);
      return *this;
    }
  }
  fields_.emplace_back(std::move(name), std::move(value));
  return *this;
}

const FieldValue* Record::find(std::string_view name) const {
  for (const auto& [key, value] : fields_) {
    if (key == name) return &value;
  }
  return nullptr;
}

double Record::number(std::string_view name) const {
  const FieldValue* value = find(name);
  if (value == nullptr) return std::numeric_limits<double>::quiet_NaN();
  if (const auto* i = std::get_if<std::int64_t>(value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(value)) return *d;
  return std::numeric_limits<double>::quiet_NaN();
}

bool is_timing_column(std::string_view name) {
  return name.find("seconds") != std::string_view::npos;
}

void ResultTable::add(Record record) { records_.push_back(std::move(record)); }

std::vector<std::string> ResultTable::columns() const {
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (const Record& record : records_) {
    for (const auto& [key, value] : record.fields()) {
      if (seen.insert(key).second) names.push_back(key);
    }
  }
  return names;
}

namespace {

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void ResultTable::write_csv(std::ostream& out, bool include_timing) const {
  std::vector<std::string> names = columns();
  if (!include_timing) std::erase_if(names, [](const std::string& n) { return is_timing_column(n); });

  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << csv_escape(names[k]);
  out << '\n';
  for (const Record& record : records_) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (k) out << ',';
      if (const FieldValue* value = record.find(names[k])) out << csv_escape(format_field(*value));
    }
    out << '\n';
  }
}

std::string ResultTable::to_csv(bool include_timing) const {
  std::ostringstream out;
  write_csv(out, include_timing);
  return out.str();
}

void save_results(const std::filesystem::path& path, const ResultTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  table.write_csv(out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

namespace {

// JSON has no NaN or infinity; those become null.
nlohmann::json number_or_null(double value) {
  return std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const SolveTrace& trace, int trial,
                       std::string_view solver) {
  for (const IterationRecord& it : trace.iterates) {
    nlohmann::json line = {
        {"trial", trial},
        {"solver", solver},
        {"iteration", it.iteration},
        {"objective", number_or_null(it.objective)},
        {"gap", number_or_null(it.gap)},
        {"step", number_or_null(it.step)},
        {"vertex", it.vertex},
        {"elapsed_seconds", it.elapsed_seconds},
    };
    if (!std::isnan(it.lipschitz_estimate)) line["lipschitz_estimate"] = it.lipschitz_estimate;
    if (!std::isnan(it.barrier_mu)) line["barrier_mu"] = it.barrier_mu;
    out << line.dump() << '\n';
  }
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v(i));
  }
  return out;
}

}  // namespace bitalloc
