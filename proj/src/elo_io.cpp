#include "iai/elo_io.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "iai/csv.h"
#include "iai/errors.h"

namespace iai::elo {

std::string format_rating(double rating) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", rating);
    return buf;
}

std::string format_vote_row(const VoteEvent& e) {
    return csv::join({std::to_string(e.seq), format_timestamp(e.timestamp), e.session_id,
                      e.analyst_id, e.firm_a, e.firm_b, e.winner});
}

VoteEvent parse_vote_row(const std::vector<std::string>& f, const std::string& context) {
    if (f.size() != 7) throw ParseError(context + ": vote row needs 7 fields");
    VoteEvent e;
    long long seq = csv::parse_integer(f[0], context + " seq");
    if (seq <= 0) throw ParseError(context + ": seq must be positive");
    e.seq = static_cast<std::uint64_t>(seq);
    e.timestamp = parse_timestamp(f[1]);
    e.session_id = f[2];
    e.analyst_id = f[3];
    e.firm_a = f[4];
    e.firm_b = f[5];
    e.winner = f[6];
    return e;
}

void write_votes(std::ostream& out, std::span<const VoteEvent> events) {
    out << kVoteLogHeader << '\n';
    for (const auto& e : events) out << format_vote_row(e) << '\n';
}

std::vector<VoteEvent> read_votes(std::istream& in, const std::string& source_name) {
    auto table = csv::Table::parse(in, source_name);
    table.require_columns({"seq", "timestamp_iso8601", "session_id", "analyst_id", "firm_a",
                           "firm_b", "winner"});
    const std::size_t cols[] = {table.column("seq"),        table.column("timestamp_iso8601"),
                                table.column("session_id"), table.column("analyst_id"),
                                table.column("firm_a"),     table.column("firm_b"),
                                table.column("winner")};
    std::vector<VoteEvent> events;
    events.reserve(table.size());
    for (std::size_t r = 0; r < table.size(); ++r) {
        std::vector<std::string> fields;
        for (auto c : cols) fields.push_back(table.at(r, c));
        events.push_back(parse_vote_row(fields, source_name + ":" + std::to_string(table.line_of(r))));
    }
    return events;
}

std::vector<VoteEvent> read_votes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open vote log " + path.string());
    return read_votes(in, path.string());
}

std::vector<Firm> read_firms(std::istream& in, const std::string& source_name) {
    auto table = csv::Table::parse(in, source_name);
    table.require_columns({"firm_id", "ticker", "name"});
    auto from_col = table.find_column("active_from");
    auto to_col = table.find_column("active_to");
    std::vector<Firm> firms;
    for (std::size_t r = 0; r < table.size(); ++r) {
        Firm f;
        f.id = table.at(r, "firm_id");
        f.ticker = table.at(r, "ticker");
        f.name = table.at(r, "name");
        if (from_col) f.active_from = parse_optional_date(table.at(r, *from_col));
        if (to_col) f.active_to = parse_optional_date(table.at(r, *to_col));
        firms.push_back(std::move(f));
    }
    validate_universe(firms);
    return firms;
}

std::vector<Firm> read_firms(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open firm universe " + path.string());
    return read_firms(in, path.string());
}

void write_ranking(std::ostream& out, std::span<const RankedFirm> ranking,
                   std::span<const Firm> firms) {
    std::map<FirmId, const Firm*> by_id;
    for (const auto& f : firms) by_id[f.id] = &f;
    out << kRankingHeader << '\n';
    for (const auto& r : ranking) {
        auto it = by_id.find(r.firm_id);
        const std::string ticker = it == by_id.end() ? std::string{} : it->second->ticker;
        out << csv::join({std::to_string(r.rank), r.firm_id, ticker, format_rating(r.rating)})
            << '\n';
    }
}

std::vector<WaveCut> read_waves(const std::filesystem::path& path) {
    auto table = csv::Table::read(path);
    table.require_columns({"name", "cutoff"});
    std::vector<WaveCut> waves;
    for (std::size_t r = 0; r < table.size(); ++r) {
        waves.push_back({table.at(r, "name"), parse_timestamp(table.at(r, "cutoff"))});
    }
    validate_waves(waves);
    return waves;
}

std::vector<RankingRow> read_ranking(const std::filesystem::path& path) {
    auto table = csv::Table::read(path);
    table.require_columns({"rank", "firm_id", "rating"});
    auto ticker_col = table.find_column("ticker");
    std::vector<RankingRow> rows;
    for (std::size_t r = 0; r < table.size(); ++r) {
        RankingRow row;
        row.rank = static_cast<std::size_t>(table.integer(r, "rank"));
        row.firm_id = table.at(r, "firm_id");
        if (ticker_col) row.ticker = table.at(r, *ticker_col);
        row.rating = table.number(r, "rating");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace iai::elo
