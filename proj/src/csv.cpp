#include "fairrank/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fairrank {

namespace {

// Splits one CSV record. Supports RFC 4180 quoting ("" escapes a quote);
// trailing \r from CRLF files is stripped by the caller.
std::vector<std::string> split_record(const std::string& line, const std::string& source,
                                      std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw std::runtime_error(source + ":" + std::to_string(line_no) +
                                 ": unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return fields;
}

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n") != std::string::npos;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw std::runtime_error("missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(std::istream& in, const std::string& source_name) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && line_no > 1) continue;
        auto fields = split_record(line, source_name, line_no);
        if (line_no == 1) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                         ": expected " + std::to_string(table.header.size()) +
                                         " fields, got " + std::to_string(fields.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) {
        throw std::runtime_error(source_name + ": empty file");
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return read_csv(in, path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    const auto emit = [&out](const std::vector<std::string>& record) {
        for (std::size_t i = 0; i < record.size(); ++i) {
            if (i > 0) out << ',';
            if (needs_quoting(record[i])) {
                out << '"';
                for (const char c : record[i]) {
                    if (c == '"') out << "\"\"";
                    else out << c;
                }
                out << '"';
            } else {
                out << record[i];
            }
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
}

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

double parse_double(const std::string& cell, const std::string& context) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    double value = 0.0;
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end || begin == end) {
        throw std::runtime_error(context + ": cannot parse '" + cell + "' as a number");
    }
    return value;
}

}  // namespace fairrank
