#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iai/elo.h"
#include "iai/panel.h"

namespace iai::testing {

// Plain normal-equations OLS: forms X'X and X'y with an intercept column and
// solves by Gauss-Jordan elimination with partial pivoting. Returns
// [intercept, b1, ..., bp]. `x` is row-major n x p.
std::vector<double> naive_ols(const std::vector<double>& y, const std::vector<double>& x, std::size_t p);

// 342-row panel (114 firms x 3 waves) shaped like the reference sample:
// regressor means, spreads and cross-correlations follow the reference
// descriptive statistics; `error` is present in 174 rows and `qtobin` missing
// in 3, so the full listwise sample is 173 rows and the error-free one 339.
// The ranking column is constructed so that
//   * the full eight-regressor fit on the 173-row sample reproduces the
//     reference t-statistics (ff, baa, error, ln_volume insignificant), and
//   * the five-regressor fit (coverage, vol, ln_volume, ln_size, qtobin) on
//     the 339-row sample leaves ln_volume insignificant and the rest significant.
std::vector<FirmPanelRow> make_elimination_panel(std::uint64_t seed = 42);

inline const std::vector<std::string> kFullModel{"coverage", "error", "vol", "baa",
                                                 "ln_volume", "ln_size", "ff", "qtobin"};

// Writes a small synthetic market-data set for `firms` covering every wave:
// prices.csv, index.csv, fundamentals.csv, coverage.csv, earnings.csv and
// trades.csv. Weekdays only, starting 400 days before the first cutoff.
void write_market_files(const std::filesystem::path& dir, const std::vector<elo::Firm>& firms,
                        const std::vector<elo::WaveCut>& waves, std::uint64_t seed = 42);

}  // namespace iai::testing
