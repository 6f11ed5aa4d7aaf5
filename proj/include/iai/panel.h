#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iai {

// One firm x wave observation. Missing proxies stay nullopt; they are never
// imputed as zero.
struct FirmPanelRow {
    std::string firm_id;
    std::string wave;
    std::optional<double> ranking;
    std::optional<double> coverage;
    std::optional<double> error;
    std::optional<double> vol;
    std::optional<double> baa;
    std::optional<double> ln_volume;
    std::optional<double> ln_size;
    std::optional<double> ff;
    std::optional<double> qtobin;
    std::optional<double> pin;

    // Throws ContractViolation when a present value breaks its range.
    void validate() const;
};

// Numeric variable names in column order, e.g. "ranking", "coverage", ...
const std::vector<std::string>& panel_variables();

// Canonical variable name; also accepts "lnsize", "lnvolume" and "BaA".
std::string canonical_variable(std::string_view name);

// Throws DomainError for an unknown variable name.
std::optional<double> panel_value(const FirmPanelRow& row, std::string_view name);

inline constexpr const char* kPanelHeader =
    "firm_id,wave,ranking,coverage,error,vol,baa,ln_volume,ln_size,ff,qtobin,pin";

void write_panel(std::ostream& out, std::span<const FirmPanelRow> rows);
std::vector<FirmPanelRow> read_panel(std::istream& in, const std::string& source_name = "<stream>");
std::vector<FirmPanelRow> read_panel(const std::filesystem::path& path);

}  // namespace iai
