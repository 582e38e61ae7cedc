#pragma once

#include "covtest/fisher.hpp"
#include "covtest/matrix.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace covtest {

inline constexpr std::string_view kVersion = "0.1.0";

/// A delimited text file with one observation per row.
struct DatasetFile {
  std::string path;
  char delimiter = ',';
  bool has_header = false;
};

/// Parses delimited text. Blank lines are ignored; fields may carry
/// surrounding whitespace and use scientific notation. Parse error (with
/// line and column) for ragged rows and non-numeric or non-finite fields,
/// empty-input error when no data row remains.
SampleMatrix parse_matrix(std::string_view text, char delimiter = ',', bool has_header = false,
                          std::string_view source = "<input>");

/// Io error naming the path when the file cannot be opened.
SampleMatrix read_matrix(const DatasetFile& file);

/// Writes with 17 significant digits, so parse_matrix reproduces every
/// value exactly.
void write_matrix(std::ostream& out, const Matrix& m, char delimiter = ',');

enum class OutputFormat { json, text, csv };

/// Config error for anything but "json", "text" or "csv".
OutputFormat parse_output_format(std::string_view text);

std::string write_outcome(const TestOutcome& outcome, OutputFormat format);

/// Inverse of write_outcome(…, OutputFormat::json) for every numeric field.
TestOutcome parse_outcome_json(std::string_view json);

/// Shortest decimal string that reads back as exactly `value`.
std::string format_double(double value);

}  // namespace covtest
