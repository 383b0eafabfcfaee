#include "cpce/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cpce {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_record = [&] {
    if (field_started || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw std::invalid_argument("csv: unterminated quoted field");
  end_record();
  return records;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  auto records = split_records(text);
  if (records.empty()) throw std::invalid_argument("csv: missing header");
  CsvTable table{std::move(records.front()), {}};
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.header.size()) {
      throw std::invalid_argument("csv: row " + std::to_string(i) + " has " +
                                  std::to_string(records[i].size()) + " fields, header has " +
                                  std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[i]));
  }
  return table;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += quote_if_needed(row[i]);
    }
    out.push_back('\n');
  };
  append_row(table.header);
  for (const auto& row : table.rows) append_row(row);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string dataset_to_csv(const Dataset& data) {
  validate(data);
  CsvTable table;
  for (std::size_t n = 0; n < data.dim(); ++n) table.header.push_back("x" + std::to_string(n + 1));
  table.header.push_back("y");
  for (std::size_t m = 0; m < data.size(); ++m) {
    std::vector<std::string> row;
    for (double v : data.point(m)) row.push_back(format_double(v));
    row.push_back(format_double(data.outputs[static_cast<Eigen::Index>(m)]));
    table.rows.push_back(std::move(row));
  }
  return to_csv(table);
}

namespace {

void check_x_header(const std::vector<std::string>& header, std::size_t dim) {
  for (std::size_t n = 0; n < dim; ++n) {
    if (header[n] != "x" + std::to_string(n + 1)) {
      throw std::invalid_argument("csv: expected column x" + std::to_string(n + 1) + ", found '" +
                                  header[n] + "'");
    }
  }
}

}  // namespace

Dataset dataset_from_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  if (table.header.size() < 2 || table.header.back() != "y") {
    throw std::invalid_argument("csv: dataset header must be x1,...,xN,y");
  }
  const std::size_t dim = table.header.size() - 1;
  check_x_header(table.header, dim);
  const auto M = static_cast<Eigen::Index>(table.rows.size());
  Dataset data{RowMatrix(M, static_cast<Eigen::Index>(dim)), Eigen::VectorXd(M)};
  for (Eigen::Index m = 0; m < M; ++m) {
    const auto& row = table.rows[static_cast<std::size_t>(m)];
    for (std::size_t n = 0; n < dim; ++n) {
      data.inputs(m, static_cast<Eigen::Index>(n)) = parse_double(row[n]);
    }
    data.outputs[m] = parse_double(row[dim]);
  }
  validate(data);
  return data;
}

RowMatrix points_from_csv(std::string_view text, std::size_t dim) {
  const CsvTable table = parse_csv(text);
  if (table.header.size() < dim) {
    throw std::invalid_argument("csv: expected at least " + std::to_string(dim) + " columns");
  }
  check_x_header(table.header, dim);
  RowMatrix points(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t n = 0; n < dim; ++n) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) =
          parse_double(table.rows[i][n]);
    }
  }
  return points;
}

}  // namespace cpce
