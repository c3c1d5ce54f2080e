#include "thermal_designs/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "thermal_designs/errors.hpp"

namespace thermal_designs {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw InvalidArgument("csv: missing column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body.front() == ' ') body.erase(0, 1);
            table.comments.push_back(std::move(body));
            continue;
        }
        if (line.empty()) throw InvalidArgument("csv: line " + std::to_string(lineno) + ": empty line");
        auto fields = split_fields(line);
        if (!have_header) {
            for (const auto& f : fields)
                if (f.empty() || f.find_first_of("\" ") != std::string::npos)
                    throw InvalidArgument("csv: line " + std::to_string(lineno) + ": malformed header field");
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw InvalidArgument("csv: line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        std::vector<std::optional<double>> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            if (f.empty()) {
                row.emplace_back();
                continue;
            }
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw InvalidArgument("csv: line " + std::to_string(lineno) + ": cannot parse number '" + f + "'");
            row.emplace_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw InvalidArgument("csv: no header line");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("csv: cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw InvalidArgument("csv: number formatting failed");
    return std::string(buf, ptr);
}

std::string format_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (row[i]) out += format_number(*row[i]);
        }
        out += '\n';
    }
    for (const auto& c : table.comments) out += "# " + c + '\n';
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write to '" + path.string() + "' failed");
}

}  // namespace thermal_designs
