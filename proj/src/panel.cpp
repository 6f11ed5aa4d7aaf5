#include "iai/panel.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "iai/csv.h"
#include "iai/errors.h"

namespace iai {

namespace {

using Member = std::optional<double> FirmPanelRow::*;

const std::vector<std::pair<std::string, Member>>& members() {
    static const std::vector<std::pair<std::string, Member>> m{
        {"ranking", &FirmPanelRow::ranking}, {"coverage", &FirmPanelRow::coverage},
        {"error", &FirmPanelRow::error},     {"vol", &FirmPanelRow::vol},
        {"baa", &FirmPanelRow::baa},         {"ln_volume", &FirmPanelRow::ln_volume},
        {"ln_size", &FirmPanelRow::ln_size}, {"ff", &FirmPanelRow::ff},
        {"qtobin", &FirmPanelRow::qtobin},   {"pin", &FirmPanelRow::pin},
    };
    return m;
}

std::string format_cell(const std::optional<double>& v) {
    if (!v) return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", *v);
    return buf;
}

}  // namespace

void FirmPanelRow::validate() const {
    auto where = [&] { return "panel row (" + firm_id + ", " + wave + ")"; };
    if (coverage && *coverage < 0) throw ContractViolation(where() + ": coverage < 0");
    if (baa && *baa < 0) throw ContractViolation(where() + ": baa < 0");
    if (ff && (*ff <= 0 || *ff > 100)) throw ContractViolation(where() + ": ff outside (0, 100]");
    if (qtobin && *qtobin <= 0) throw ContractViolation(where() + ": qtobin must be positive");
    if (pin && (*pin <= 0 || *pin >= 1)) throw ContractViolation(where() + ": pin outside (0, 1)");
}

const std::vector<std::string>& panel_variables() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, m] : members()) n.push_back(name);
        return n;
    }();
    return names;
}

std::string canonical_variable(std::string_view name) {
    static const std::map<std::string, std::string, std::less<>> aliases{
        {"lnsize", "ln_size"}, {"lnvolume", "ln_volume"}, {"BaA", "baa"},
        {"Coverage", "coverage"}, {"Vol", "vol"}, {"Error", "error"}, {"PIN", "pin"},
    };
    if (auto it = aliases.find(name); it != aliases.end()) return it->second;
    for (const auto& [n, m] : members()) {
        if (n == name) return n;
    }
    throw DomainError("unknown panel variable '" + std::string(name) + "'");
}

std::optional<double> panel_value(const FirmPanelRow& row, std::string_view name) {
    const std::string canon = canonical_variable(name);
    for (const auto& [n, m] : members()) {
        if (n == canon) return row.*m;
    }
    throw DomainError("unknown panel variable '" + std::string(name) + "'");
}

void write_panel(std::ostream& out, std::span<const FirmPanelRow> rows) {
    out << kPanelHeader << '\n';
    for (const auto& r : rows) {
        std::vector<std::string> fields{r.firm_id, r.wave};
        for (const auto& [n, m] : members()) fields.push_back(format_cell(r.*m));
        out << csv::join(fields) << '\n';
    }
}

std::vector<FirmPanelRow> read_panel(std::istream& in, const std::string& source_name) {
    auto table = csv::Table::parse(in, source_name);
    table.require_columns({"firm_id", "wave"});
    std::vector<FirmPanelRow> rows;
    for (std::size_t r = 0; r < table.size(); ++r) {
        FirmPanelRow row;
        row.firm_id = table.at(r, "firm_id");
        row.wave = table.at(r, "wave");
        for (const auto& [n, m] : members()) {
            if (table.find_column(n)) row.*m = table.optional_number(r, n);
        }
        row.validate();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FirmPanelRow> read_panel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open panel " + path.string());
    return read_panel(in, path.string());
}

}  // namespace iai
