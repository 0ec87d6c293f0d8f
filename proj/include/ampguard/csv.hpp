#pragma once

#include <string>
#include <vector>

namespace ampguard {

/// Minimal CSV table: a header row plus string cells. Commas only, no quoting
/// (none of the project's file formats need it).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
    bool has_column(const std::string& name) const { return column(name) >= 0; }
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

/// Throws std::runtime_error naming the missing column and line count issues.
void require_columns(const CsvTable& t, const std::vector<std::string>& names,
                     const std::string& context);

void write_csv(const std::string& path, const CsvTable& t);

/// Writes a file atomically (temp file in the same directory, then rename).
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace ampguard
