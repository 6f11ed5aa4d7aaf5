#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iai::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

// A parsed CSV document with a header row. Lines starting with '#' and blank
// lines are ignored so tool-written files can carry provenance comments.
class Table {
public:
    static Table parse(std::istream& in, const std::string& source_name = "<stream>");
    static Table read(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    // Throws ParseError naming the source when the column is absent.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
    void require_columns(const std::vector<std::string>& names) const;

    const std::string& at(std::size_t row, std::size_t col) const;
    const std::string& at(std::size_t row, std::string_view name) const;
    // 1-based line number in the source, for diagnostics.
    std::size_t line_of(std::size_t row) const { return lines_.at(row); }
    const std::string& source() const { return source_; }

    double number(std::size_t row, std::string_view name) const;
    std::optional<double> optional_number(std::size_t row, std::string_view name) const;
    long long integer(std::size_t row, std::string_view name) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;
};

double parse_double(std::string_view text, std::string_view context);
long long parse_integer(std::string_view text, std::string_view context);

}  // namespace iai::csv
