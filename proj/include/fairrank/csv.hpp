#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairrank {

/// In-memory CSV table: header row plus string cells. Parsing to typed
/// columns happens at the dataset layer where the schema is known.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws std::runtime_error when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable read_csv(std::istream& in, const std::string& source_name);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Shortest round-trip decimal representation (std::to_chars), so exports
/// are byte-stable across runs.
std::string format_double(double value);

/// Strict double parse of a full cell; throws std::runtime_error on failure.
double parse_double(const std::string& cell, const std::string& context);

}  // namespace fairrank
