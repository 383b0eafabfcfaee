#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cpce/pce.hpp"

namespace cpce {

/// Shortest decimal that round-trips to the same double; "inf", "-inf",
/// "nan" for non-finite values.
std::string format_double(double value);

/// Parses a full field as a double (accepts inf/-inf/nan). Throws
/// std::invalid_argument on malformed text.
double parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Minimal RFC 4180 reader: comma-separated, optional double-quoted fields,
/// LF or CRLF line ends. Throws std::invalid_argument when a row's field
/// count differs from the header's.
CsvTable parse_csv(std::string_view text);
std::string to_csv(const CsvTable& table);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Dataset as CSV with header x1,...,xN,y.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(std::string_view text);

/// Points with header x1,...,xN; extra trailing columns (e.g. y) are ignored.
RowMatrix points_from_csv(std::string_view text, std::size_t dim);

}  // namespace cpce
