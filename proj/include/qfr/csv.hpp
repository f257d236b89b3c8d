#pragma once

#include <string>
#include <vector>

#include "qfr/types.hpp"

namespace qfr {

/// Reads a comma-separated file ('.' decimal separator, UTF-8, header row
/// required) and assembles a Dataset from the named columns. With
/// log_transform set, the natural log is applied to both inputs and output;
/// nonpositive values then raise DomainError with the offending row.
/// An optional label column carries observation identifiers.
Dataset load_dataset(const std::string& path,
                     const std::vector<std::string>& x_columns,
                     const std::string& y_column,
                     bool log_transform,
                     const std::string& label_column = "");

/// Writes a Dataset back out in the same dialect, one column per input plus
/// the output column (and labels when present). Values use enough digits to
/// round-trip doubles.
void write_dataset(const std::string& path, const Dataset& dataset,
                   const std::vector<std::string>& x_columns,
                   const std::string& y_column);

namespace csv {

/// Splits one CSV line on commas. No quoting rules: the formats this tool
/// reads and writes are plain numeric tables.
std::vector<std::string> split_line(const std::string& line);

/// Strict double parse; the whole token must be consumed.
bool parse_double(const std::string& token, double& out);

} // namespace csv
} // namespace qfr
