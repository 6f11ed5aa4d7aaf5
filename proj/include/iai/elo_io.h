#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "iai/elo.h"

namespace iai::elo {

inline constexpr const char* kVoteLogHeader =
    "seq,timestamp_iso8601,session_id,analyst_id,firm_a,firm_b,winner";
inline constexpr const char* kRankingHeader = "rank,firm_id,ticker,rating";
inline constexpr const char* kFirmHeader = "firm_id,ticker,name,active_from,active_to";

std::string format_vote_row(const VoteEvent& e);
VoteEvent parse_vote_row(const std::vector<std::string>& fields, const std::string& context);

void write_votes(std::ostream& out, std::span<const VoteEvent> events);
std::vector<VoteEvent> read_votes(std::istream& in, const std::string& source_name = "<stream>");
std::vector<VoteEvent> read_votes(const std::filesystem::path& path);

std::vector<Firm> read_firms(std::istream& in, const std::string& source_name = "<stream>");
std::vector<Firm> read_firms(const std::filesystem::path& path);

// Ratings are written with four decimals. Tickers come from `firms` when
// known, otherwise the column is left empty.
void write_ranking(std::ostream& out, std::span<const RankedFirm> ranking,
                   std::span<const Firm> firms);

// `name,cutoff` rows; validated with validate_waves.
std::vector<WaveCut> read_waves(const std::filesystem::path& path);

struct RankingRow {
    std::size_t rank = 0;
    FirmId firm_id;
    std::string ticker;
    double rating = 0.0;
};
std::vector<RankingRow> read_ranking(const std::filesystem::path& path);

std::string format_rating(double rating);

}  // namespace iai::elo
