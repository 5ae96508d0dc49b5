#include "bitalloc/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bitalloc/error.hpp"
#include "bitalloc/records.hpp"

namespace bitalloc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_failure(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view token, std::size_t line, std::size_t column) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    parse_failure(line, "column " + std::to_string(column) + ": cannot parse '" +
                            std::string(token) + "' as a number");
  }
  return value;
}

long long parse_integer(std::string_view token, std::size_t line, const char* what) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    parse_failure(line, std::string("cannot parse ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    lines.push_back({number++, text.substr(0, end)});
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
  return lines;
}

Eigen::MatrixXd parse_coordinate(std::string_view text) {
  bool symmetric = false;
  const std::vector<Line> lines = split_lines(text);
  std::size_t k = 0;
  for (; k < lines.size(); ++k) {
    const std::string_view line = trim(lines[k].text);
    if (line.starts_with("%%MatrixMarket")) {
      std::string banner(line);
      std::transform(banner.begin(), banner.end(), banner.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (banner.find("coordinate") == std::string::npos) {
        parse_failure(lines[k].number, "only coordinate MatrixMarket files are supported");
      }
      if (banner.find("complex") != std::string::npos || banner.find("pattern") != std::string::npos) {
        parse_failure(lines[k].number, "only real-valued MatrixMarket files are supported");
      }
      symmetric = banner.find("symmetric") != std::string::npos;
      continue;
    }
    if (line.empty() || line.front() == '%') continue;
    break;
  }
  if (k == lines.size()) parse_failure(lines.empty() ? 1 : lines.back().number, "missing size line");

  const auto header = split_whitespace(lines[k].text);
  if (header.size() != 3) parse_failure(lines[k].number, "size line must be 'rows cols nnz'");
  const long long rows = parse_integer(header[0], lines[k].number, "row count");
  const long long cols = parse_integer(header[1], lines[k].number, "column count");
  const long long nnz = parse_integer(header[2], lines[k].number, "entry count");
  if (rows < 1 || cols < 1 || nnz < 0) parse_failure(lines[k].number, "invalid dimensions");

  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(rows, cols);
  long long seen = 0;
  for (++k; k < lines.size(); ++k) {
    const std::string_view line = trim(lines[k].text);
    if (line.empty() || line.front() == '%') continue;
    const auto tokens = split_whitespace(line);
    if (tokens.size() != 3) parse_failure(lines[k].number, "expected 'row col value'");
    const long long r = parse_integer(tokens[0], lines[k].number, "row index");
    const long long c = parse_integer(tokens[1], lines[k].number, "column index");
    if (r < 1 || r > rows || c < 1 || c > cols) {
      parse_failure(lines[k].number, "index (" + std::to_string(r) + ", " + std::to_string(c) +
                                         ") outside " + std::to_string(rows) + "x" +
                                         std::to_string(cols));
    }
    const double value = parse_double(tokens[2], lines[k].number, 3);
    matrix(r - 1, c - 1) += value;
    if (symmetric && r != c) matrix(c - 1, r - 1) += value;
    ++seen;
  }
  if (seen != nnz) {
    throw Error(ErrorCode::kParse, "expected " + std::to_string(nnz) + " entries, found " +
                                       std::to_string(seen));
  }
  return matrix;
}

Eigen::MatrixXd parse_dense(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (const Line& line : split_lines(text)) {
    const std::string_view content = trim(line.text);
    if (content.empty() || content.front() == '#') continue;
    std::vector<double> row;
    std::size_t column = 1;
    std::string_view rest = content;
    while (true) {
      const std::size_t comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), line.number, column++));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_failure(line.number, "row has " + std::to_string(row.size()) + " columns, expected " +
                                     std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kParse, "no matrix rows found");

  Eigen::MatrixXd matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return matrix;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// A banner, or a first data line of three blank-separated fields with no
// comma (a dense row with three columns would need commas).
MatrixFormat detect_format(std::string_view text) {
  for (const Line& line : split_lines(text)) {
    const std::string_view content = trim(line.text);
    if (content.starts_with("%%MatrixMarket")) return MatrixFormat::kCoordinate;
    if (content.empty() || content.front() == '%' || content.front() == '#') continue;
    const bool triple = content.find(',') == std::string_view::npos &&
                        split_whitespace(content).size() == 3;
    return triple ? MatrixFormat::kCoordinate : MatrixFormat::kDense;
  }
  return MatrixFormat::kDense;
}

}  // namespace

Eigen::MatrixXd parse_matrix(std::string_view text, MatrixFormat format) {
  if (format == MatrixFormat::kAuto) format = detect_format(text);
  return format == MatrixFormat::kCoordinate ? parse_coordinate(text) : parse_dense(text);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const MatrixFormat format =
      path.extension() == ".mtx" ? MatrixFormat::kCoordinate : MatrixFormat::kAuto;
  try {
    return parse_matrix(text, format);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Eigen::VectorXd load_vector(const std::filesystem::path& path) {
  const Eigen::MatrixXd matrix = load_matrix(path);
  if (matrix.cols() == 1) return matrix.col(0);
  if (matrix.rows() == 1) return matrix.row(0).transpose();
  throw Error(ErrorCode::kDimensionMismatch, path.string() + ": expected a vector, got " +
                                                 std::to_string(matrix.rows()) + "x" +
                                                 std::to_string(matrix.cols()));
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
  std::string out;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(matrix(i, j));
    }
    out += '\n';
  }
  write_file(path, out);
}

void save_matrix_coordinate(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
  std::string body;
  long long nnz = 0;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
      if (matrix(i, j) == 0.0) continue;
      body += std::to_string(i + 1) + ' ' + std::to_string(j + 1) + ' ' +
              format_double(matrix(i, j)) + '\n';
      ++nnz;
    }
  }
  write_file(path, "%%MatrixMarket matrix coordinate real general\n" +
                       std::to_string(matrix.rows()) + ' ' + std::to_string(matrix.cols()) + ' ' +
                       std::to_string(nnz) + '\n' + body);
}

}  // namespace bitalloc
