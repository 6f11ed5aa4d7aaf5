#include "iai/csv.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "iai/errors.h"

namespace iai::csv {

std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw ParseError("unterminated quoted field in: " + std::string(line));
    fields.push_back(std::move(current));
    return fields;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

Table Table::parse(std::istream& in, const std::string& source_name) {
    Table t;
    t.source_ = source_name;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_record(line);
        if (!have_header) {
            t.header_ = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header_.size()) {
            throw ParseError(source_name + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header_.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        t.rows_.push_back(std::move(fields));
        t.lines_.push_back(lineno);
    }
    if (!have_header) throw ParseError(source_name + ": missing header row");
    return t;
}

Table Table::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return parse(in, path.string());
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
    if (auto idx = find_column(name)) return *idx;
    throw ParseError(source_ + ": missing column '" + std::string(name) + "'");
}

void Table::require_columns(const std::vector<std::string>& names) const {
    for (const auto& n : names) column(n);
}

const std::string& Table::at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

const std::string& Table::at(std::size_t row, std::string_view name) const {
    return at(row, column(name));
}

double Table::number(std::size_t row, std::string_view name) const {
    return parse_double(at(row, name),
                        source_ + ":" + std::to_string(line_of(row)) + " column " + std::string(name));
}

std::optional<double> Table::optional_number(std::size_t row, std::string_view name) const {
    const auto& cell = at(row, name);
    if (cell.empty() || cell == "NA" || cell == "NaN") return std::nullopt;
    return number(row, name);
}

long long Table::integer(std::size_t row, std::string_view name) const {
    return parse_integer(at(row, name),
                         source_ + ":" + std::to_string(line_of(row)) + " column " + std::string(name));
}

double parse_double(std::string_view text, std::string_view context) {
    std::string s(text);
    if (s.empty()) throw ParseError(std::string(context) + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) {
        throw ParseError(std::string(context) + ": not a number: '" + s + "'");
    }
    return v;
}

long long parse_integer(std::string_view text, std::string_view context) {
    std::string s(text);
    if (s.empty()) throw ParseError(std::string(context) + ": empty integer field");
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE) {
        throw ParseError(std::string(context) + ": not an integer: '" + s + "'");
    }
    return v;
}

}  // namespace iai::csv
