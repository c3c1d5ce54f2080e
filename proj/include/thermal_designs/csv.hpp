#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace thermal_designs {

// Numeric CSV with '#' comment lines. Fields are unquoted numbers or empty.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;
    std::vector<std::string> comments;  // comment text without the leading "# "

    // Index of a header column; throws InvalidArgument when absent.
    std::size_t column_index(const std::string& name) const;
};

// Strict reader: every data row must have as many fields as the header and
// every nonempty field must parse completely as a double. Errors name the
// 1-based line number.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_csv(const CsvTable& table);

// Shortest decimal representation that round-trips to the same double.
std::string format_number(double v);

// Writes `content` to `path` in one go; nothing is created when the path
// cannot be opened.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace thermal_designs
