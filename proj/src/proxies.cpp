#include "iai/proxies.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "iai/csv.h"
#include "iai/errors.h"
#include "iai/pin.h"

namespace iai::proxy {

namespace {

double sample_sd(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

using Key = std::pair<std::string, std::string>;

struct PriceRow {
    Date date{};
    double close = 0.0;
    std::optional<double> bid;
    std::optional<double> ask;
    std::optional<double> volume;
};

std::string where(const csv::Table& t, std::size_t row) {
    return t.source() + ":" + std::to_string(t.line_of(row));
}

std::vector<std::pair<Date, double>> read_index(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    t.require_columns({"date", "close"});
    std::vector<std::pair<Date, double>> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const Date d = parse_date(t.at(r, "date"));
        const double close = t.number(r, "close");
        if (close <= 0.0) throw DataQualityError(where(t, r) + ": index close must be positive");
        if (!out.empty() && d <= out.back().first) {
            throw DataQualityError(where(t, r) + ": index dates must be strictly increasing");
        }
        out.emplace_back(d, close);
    }
    return out;
}

std::map<std::string, std::vector<PriceRow>> read_prices(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    t.require_columns({"firm_id", "date", "close", "bid", "ask", "volume"});
    std::map<std::string, std::vector<PriceRow>> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        PriceRow p;
        p.date = parse_date(t.at(r, "date"));
        p.close = t.number(r, "close");
        p.bid = t.optional_number(r, "bid");
        p.ask = t.optional_number(r, "ask");
        p.volume = t.optional_number(r, "volume");
        if (p.close <= 0.0) throw DataQualityError(where(t, r) + ": close must be positive");
        if (p.volume && *p.volume < 0.0) throw DataQualityError(where(t, r) + ": volume must be non-negative");
        auto& series = out[t.at(r, "firm_id")];
        if (!series.empty() && p.date <= series.back().date) {
            throw DataQualityError(where(t, r) + ": dates must be strictly increasing per firm");
        }
        series.push_back(p);
    }
    return out;
}

struct Fundamentals {
    std::optional<double> market_cap;
    std::optional<double> liabilities;
    std::optional<double> assets;
    std::optional<double> ff;
};

std::map<Key, Fundamentals> read_fundamentals(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    t.require_columns({"firm_id", "wave", "market_cap", "total_liabilities", "total_assets", "free_float_pct"});
    std::map<Key, Fundamentals> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        Key key{t.at(r, "firm_id"), t.at(r, "wave")};
        Fundamentals f{t.optional_number(r, "market_cap"), t.optional_number(r, "total_liabilities"),
                       t.optional_number(r, "total_assets"), t.optional_number(r, "free_float_pct")};
        if (!out.emplace(key, f).second) {
            throw JoinError(where(t, r) + ": duplicate fundamentals for " + key.first + " in wave " + key.second);
        }
    }
    return out;
}

std::map<Key, double> read_coverage(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    t.require_columns({"firm_id", "wave", "analyst_count"});
    std::map<Key, double> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        Key key{t.at(r, "firm_id"), t.at(r, "wave")};
        const long long count = t.integer(r, "analyst_count");
        if (count < 0) throw DataQualityError(where(t, r) + ": analyst_count must be non-negative");
        if (!out.emplace(key, static_cast<double>(count)).second) {
            throw JoinError(where(t, r) + ": duplicate coverage for " + key.first + " in wave " + key.second);
        }
    }
    return out;
}

struct Earnings {
    Date announce{};
    std::optional<double> actual;
    std::optional<double> forecast;
};

std::map<std::string, std::vector<Earnings>> read_earnings(const std::filesystem::path& path) {
    auto t = csv::Table::read(path);
    t.require_columns({"firm_id", "announce_date", "actual_eps", "median_forecast_eps"});
    std::map<std::string, std::vector<Earnings>> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        out[t.at(r, "firm_id")].push_back({parse_date(t.at(r, "announce_date")), t.optional_number(r, "actual_eps"),
                                           t.optional_number(r, "median_forecast_eps")});
    }
    for (auto& [id, list] : out) {
        std::sort(list.begin(), list.end(), [](const Earnings& a, const Earnings& b) { return a.announce < b.announce; });
    }
    return out;
}

}  // namespace

double compute_error(double actual_eps, double median_forecast, double price_5d_before) {
    if (!std::isfinite(actual_eps) || !std::isfinite(median_forecast)) {
        throw DomainError("earnings values must be finite");
    }
    if (!(price_5d_before > 0.0)) throw DomainError("price five days before announcement must be positive");
    return std::abs(actual_eps - median_forecast) / price_5d_before;
}

std::vector<double> log_returns(std::span<const double> prices) {
    std::vector<double> out;
    if (prices.size() < 2) return out;
    out.reserve(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) throw DomainError("prices must be positive to take log returns");
        if (i > 0) out.push_back(std::log(prices[i] / prices[i - 1]));
    }
    return out;
}

double compute_vol(std::span<const double> firm_returns, std::span<const double> index_returns,
                   std::size_t min_observations) {
    if (firm_returns.size() != index_returns.size()) {
        throw ContractViolation("firm and index return series must cover the same window");
    }
    if (firm_returns.size() < std::max<std::size_t>(min_observations, 2)) {
        throw ContractViolation("need at least " + std::to_string(min_observations) + " return observations, got " +
                                std::to_string(firm_returns.size()));
    }
    const double index_sd = sample_sd(index_returns);
    if (!(index_sd > 0.0)) throw DegenerateWindow("index returns have zero variance in the window");
    return 100.0 * sample_sd(firm_returns) / index_sd;
}

double compute_baa(double bid, double ask, double price) {
    if (!(bid > 0.0) || !(price > 0.0)) throw DomainError("bid and price must be positive");
    if (ask < bid) throw DataQualityError("crossed quote: ask below bid");
    return (ask - bid) / price;
}

SpreadSummary window_baa(std::span<const Quote> quotes) {
    SpreadSummary out;
    double sum = 0.0;
    for (const auto& q : quotes) {
        try {
            sum += compute_baa(q.bid, q.ask, q.price);
            ++out.days_used;
        } catch (const Error& e) {
            out.warnings.push_back(format_date(q.date) + ": " + e.what() + "; day skipped");
        }
    }
    if (out.days_used > 0) out.baa = 100.0 * sum / static_cast<double>(out.days_used);
    return out;
}

double compute_tobinq(double market_cap, double total_liabilities, double total_assets) {
    if (!(total_assets > 0.0)) throw DomainError("total assets must be positive");
    if (!(market_cap > 0.0)) throw DomainError("market capitalization must be positive");
    if (total_liabilities < 0.0) throw DomainError("total liabilities must be non-negative");
    return (market_cap + total_liabilities) / total_assets;
}

std::vector<FirmPanelRow> assemble_panel(std::span<const RatingSnapshot> snapshots,
                                         std::span<const ProxyInput> inputs,
                                         std::span<const elo::Firm> universe) {
    std::set<std::string> known;
    for (const auto& f : universe) known.insert(f.id);

    std::map<Key, const ProxyInput*> by_key;
    for (const auto& in : inputs) {
        if (!by_key.emplace(Key{in.firm_id, in.wave}, &in).second) {
            throw JoinError("duplicate proxy input for " + in.firm_id + " in wave " + in.wave);
        }
    }

    std::vector<FirmPanelRow> rows;
    std::set<std::string> waves_seen;
    for (const auto& snap : snapshots) {
        if (!waves_seen.insert(snap.wave).second) throw JoinError("duplicate ratings for wave " + snap.wave);
        std::set<std::string> firms_seen;
        for (const auto& r : snap.ranking) {
            if (!known.count(r.firm_id)) {
                throw JoinError("rated firm " + r.firm_id + " is not in the firm universe");
            }
            if (!firms_seen.insert(r.firm_id).second) {
                throw JoinError("duplicate (firm, wave) key: " + r.firm_id + ", " + snap.wave);
            }
            FirmPanelRow row;
            row.firm_id = r.firm_id;
            row.wave = snap.wave;
            row.ranking = r.rating;
            if (auto it = by_key.find(Key{r.firm_id, snap.wave}); it != by_key.end()) {
                const auto& in = *it->second;
                row.coverage = in.coverage;
                row.error = in.error;
                row.vol = in.vol;
                row.baa = in.baa;
                if (in.mean_volume) {
                    if (!(*in.mean_volume > 0.0)) throw DomainError("mean volume must be positive for " + r.firm_id);
                    row.ln_volume = std::log(*in.mean_volume);
                }
                if (in.total_assets) {
                    if (!(*in.total_assets > 0.0)) throw DomainError("total assets must be positive for " + r.firm_id);
                    row.ln_size = std::log(*in.total_assets);
                }
                row.ff = in.ff;
                row.qtobin = in.qtobin;
                row.pin = in.pin;
            }
            row.validate();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

PanelBuild build_panel(const PanelSources& sources, std::span<const elo::WaveCut> waves,
                       std::span<const RatingSnapshot> snapshots, std::span<const elo::Firm> universe,
                       const PanelBuildOptions& options) {
    if (options.window_days < 2) throw ContractViolation("window must span at least two trading days");
    elo::validate_waves(waves);

    const auto index = read_index(sources.index);
    const auto prices = read_prices(sources.prices);
    const auto fundamentals = read_fundamentals(sources.fundamentals);
    const auto coverage = read_coverage(sources.coverage);
    const auto earnings = read_earnings(sources.earnings);
    std::map<std::string, std::vector<pin::TradeDay>> trades;
    if (sources.trades) trades = pin::read_trades(*sources.trades);

    PanelBuild out;
    std::vector<ProxyInput> inputs;
    for (const auto& snap : snapshots) {
        auto wave_it = std::find_if(waves.begin(), waves.end(), [&](const elo::WaveCut& w) { return w.name == snap.wave; });
        if (wave_it == waves.end()) throw JoinError("ratings given for unknown wave " + snap.wave);
        const Date cutoff = std::chrono::floor<std::chrono::days>(wave_it->cutoff);

        auto index_end = std::upper_bound(index.begin(), index.end(), cutoff,
                                          [](Date d, const auto& p) { return d < p.first; });
        const auto available = static_cast<std::size_t>(index_end - index.begin());
        if (available < 2) throw DegenerateWindow("no index history before wave " + snap.wave);
        auto index_begin = index_end - static_cast<std::ptrdiff_t>(std::min(available, options.window_days));
        const Date window_start = index_begin->first;
        std::map<Date, double> index_window(index_begin, index_end);

        for (const auto& ranked : snap.ranking) {
            const std::string& id = ranked.firm_id;
            auto warn = [&](const std::string& msg) { out.warnings.push_back(id + " " + snap.wave + ": " + msg); };
            ProxyInput in;
            in.firm_id = id;
            in.wave = snap.wave;

            if (auto it = coverage.find(Key{id, snap.wave}); it != coverage.end()) in.coverage = it->second;
            if (auto it = fundamentals.find(Key{id, snap.wave}); it != fundamentals.end()) {
                const auto& f = it->second;
                in.total_assets = f.assets;
                in.ff = f.ff;
                if (f.market_cap && f.liabilities && f.assets) {
                    in.qtobin = compute_tobinq(*f.market_cap, *f.liabilities, *f.assets);
                }
            }

            auto price_it = prices.find(id);
            if (price_it == prices.end()) {
                warn("no price history");
            } else {
                const auto& series = price_it->second;
                std::vector<double> firm_closes, index_closes, volumes;
                std::vector<Quote> quotes;
                for (const auto& p : series) {
                    if (p.date < window_start || p.date > cutoff) continue;
                    if (auto ix = index_window.find(p.date); ix != index_window.end()) {
                        firm_closes.push_back(p.close);
                        index_closes.push_back(ix->second);
                    }
                    if (p.bid && p.ask) quotes.push_back({p.date, *p.bid, *p.ask, p.close});
                    if (p.volume) volumes.push_back(*p.volume);
                }
                const auto fr = log_returns(firm_closes);
                const auto ir = log_returns(index_closes);
                try {
                    in.vol = compute_vol(fr, ir, options.min_return_observations);
                } catch (const Error& e) {
                    warn(std::string("VOL missing: ") + e.what());
                }
                auto spread = window_baa(quotes);
                in.baa = spread.baa;
                for (auto& w : spread.warnings) warn(w);
                if (!volumes.empty()) {
                    const double mean = std::accumulate(volumes.begin(), volumes.end(), 0.0) /
                                        static_cast<double>(volumes.size());
                    if (mean > 0.0) in.mean_volume = mean;
                }

                if (auto ev = earnings.find(id); ev != earnings.end()) {
                    const Earnings* latest = nullptr;
                    for (const auto& e : ev->second) {
                        if (e.announce >= window_start && e.announce <= cutoff) latest = &e;
                    }
                    if (latest && latest->actual && latest->forecast) {
                        auto before = std::lower_bound(series.begin(), series.end(), latest->announce,
                                                       [](const PriceRow& p, Date d) { return p.date < d; });
                        const auto n_before = before - series.begin();
                        if (n_before >= 5) {
                            in.error = compute_error(*latest->actual, *latest->forecast, (before - 5)->close);
                        } else {
                            warn("ERROR missing: fewer than five trading days before " +
                                 format_date(latest->announce));
                        }
                    }
                }
            }

            if (auto tr = trades.find(id); tr != trades.end()) {
                const auto window = pin::trailing_window(tr->second, options.pin_window_days, cutoff);
                if (window.size() >= options.pin_min_days) {
                    try {
                        auto fit = pin::estimate_pin(window);
                        in.pin = fit.pin;
                        if (fit.low_confidence) warn("PIN estimate flagged low confidence");
                    } catch (const Error& e) {
                        warn(std::string("PIN missing: ") + e.what());
                    }
                } else {
                    warn("PIN missing: only " + std::to_string(window.size()) + " trade days in window");
                }
            }
            inputs.push_back(std::move(in));
        }
    }
    out.rows = assemble_panel(snapshots, inputs, universe);
    return out;
}

std::vector<std::string> panel_header_notes(const PanelBuildOptions& options) {
    return {
        "window: " + std::to_string(options.window_days) + " trading days ending at each wave cutoff",
        "vol: sd of daily firm log returns / sd of daily index log returns, x100",
        "baa: window mean of (ask - bid) / close, x100",
        "error: |actual eps - median forecast| / close five trading days before the announcement",
        "ln_size: ln(total assets); ln_volume: ln(mean daily volume); qtobin: (market cap + liabilities) / assets",
        "pin: " + std::to_string(options.pin_window_days) + " trailing trade days ending at each wave cutoff",
        "empty cells are missing values",
    };
}

}  // namespace iai::proxy
