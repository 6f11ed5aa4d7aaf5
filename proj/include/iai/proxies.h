#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iai/elo.h"
#include "iai/panel.h"
#include "iai/time_util.h"

namespace iai::proxy {

// |actual - forecast| / price five trading days before the announcement.
double compute_error(double actual_eps, double median_forecast, double price_5d_before);

// Daily log returns of a strictly positive price series.
std::vector<double> log_returns(std::span<const double> prices);

// Sample sd of firm returns over sample sd of index returns, x100.
double compute_vol(std::span<const double> firm_returns, std::span<const double> index_returns,
                   std::size_t min_observations = 20);

// Relative spread for one day as a raw fraction. Crossed quotes throw DataQualityError.
double compute_baa(double bid, double ask, double price);

struct Quote {
    Date date{};
    double bid = 0.0;
    double ask = 0.0;
    double price = 0.0;
};

struct SpreadSummary {
    std::optional<double> baa;  // window mean of daily spreads, x100
    std::size_t days_used = 0;
    std::vector<std::string> warnings;
};

// Crossed days are skipped with a warning rather than failing the window.
SpreadSummary window_baa(std::span<const Quote> quotes);

double compute_tobinq(double market_cap, double total_liabilities, double total_assets);

struct RatingSnapshot {
    std::string wave;
    std::vector<elo::RankedFirm> ranking;
};

// Proxy values for one firm in one wave, before log transforms.
struct ProxyInput {
    std::string firm_id;
    std::string wave;
    std::optional<double> coverage;
    std::optional<double> error;
    std::optional<double> vol;
    std::optional<double> baa;
    std::optional<double> mean_volume;
    std::optional<double> total_assets;
    std::optional<double> ff;
    std::optional<double> qtobin;
    std::optional<double> pin;
};

// One row per rated firm per wave. Firms absent from `universe` or duplicate
// (firm, wave) keys throw JoinError.
std::vector<FirmPanelRow> assemble_panel(std::span<const RatingSnapshot> snapshots,
                                         std::span<const ProxyInput> inputs,
                                         std::span<const elo::Firm> universe);

struct PanelSources {
    std::filesystem::path prices;        // firm_id,date,close,bid,ask,volume
    std::filesystem::path index;         // date,close
    std::filesystem::path fundamentals;  // firm_id,wave,market_cap,total_liabilities,total_assets,free_float_pct
    std::filesystem::path coverage;      // firm_id,wave,analyst_count
    std::filesystem::path earnings;      // firm_id,announce_date,actual_eps,median_forecast_eps
    std::optional<std::filesystem::path> trades;  // firm_id,date,buys,sells
};

struct PanelBuildOptions {
    std::size_t window_days = 252;
    std::size_t min_return_observations = 20;
    std::size_t pin_window_days = 60;  // trailing trade days ending at the cutoff
    std::size_t pin_min_days = 20;
};

struct PanelBuild {
    std::vector<FirmPanelRow> rows;
    std::vector<std::string> warnings;
};

// Computes every proxy per firm over the trading-day window ending at each wave
// cutoff and joins them with the wave ratings.
PanelBuild build_panel(const PanelSources& sources, std::span<const elo::WaveCut> waves,
                       std::span<const RatingSnapshot> snapshots, std::span<const elo::Firm> universe,
                       const PanelBuildOptions& options = {});

// Comment lines written above the panel CSV describing units and scaling.
std::vector<std::string> panel_header_notes(const PanelBuildOptions& options);

}  // namespace iai::proxy
