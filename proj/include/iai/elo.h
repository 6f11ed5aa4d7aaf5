#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iai/time_util.h"

namespace iai::elo {

using FirmId = std::string;

struct Firm {
    FirmId id;
    std::string ticker;
    std::string name;
    std::optional<Date> active_from;
    std::optional<Date> active_to;

    bool active_on(Date day) const;
};

// Throws ContractViolation on duplicate ids or inverted membership windows.
void validate_universe(std::span<const Firm> firms);

// One analyst choice between two firms: the unit of the append-only log.
struct VoteEvent {
    std::uint64_t seq = 0;
    Timestamp timestamp{};
    std::string session_id;
    std::string analyst_id;
    FirmId firm_a;
    FirmId firm_b;
    FirmId winner;

    const FirmId& loser() const { return winner == firm_a ? firm_b : firm_a; }
    bool operator==(const VoteEvent&) const = default;
};

enum class ExpectationMode { table, logistic };

struct EloConfig {
    double k_factor = 24.0;
    double initial_rating = 1500.0;
    ExpectationMode mode = ExpectationMode::table;

    void validate() const;
};

struct RatingState {
    std::map<FirmId, double> scores;
    std::uint64_t last_applied = 0;

    bool operator==(const RatingState&) const = default;
};

// A named rating snapshot: every vote stamped at or before `cutoff`.
struct WaveCut {
    std::string name;
    Timestamp cutoff{};
};

// Throws ContractViolation unless cutoffs strictly increase and names are unique.
void validate_waves(std::span<const WaveCut> waves);

struct RankedFirm {
    FirmId firm_id;
    double rating = 0.0;
    std::size_t rank = 0;
};

// Win expectation band table for integer rating differences: 51 bands from
// 0.50 at a difference of 0..3 up to 1.00 at 736 and beyond. Values are in
// hundredths so the exchanged amount can be formed without binary round-off.
int table_expectation_hundredths(long long diff);

// Probability that the higher-rated side wins, for a non-negative difference.
// Table mode rounds `diff` to the nearest integer before the band lookup.
double expected_win_probability(double diff, ExpectationMode mode);

// Points the winner gains (and the loser gives up): (1 - p) * k, with p the
// winner's pre-match expectation.
double exchanged_points(double winner_rating, double loser_rating, const EloConfig& config);

void apply_vote_in_place(RatingState& state, const VoteEvent& event, const EloConfig& config);
RatingState apply_vote(RatingState state, const VoteEvent& event, const EloConfig& config);

// Checks pair shape, seq contiguity starting at `first_seq`, and that
// timestamps never go backwards.
void validate_log(std::span<const VoteEvent> log, std::uint64_t first_seq = 1);

// Folds apply_vote over the log prefix whose timestamps are <= cutoff.
RatingState replay(std::span<const VoteEvent> log, const EloConfig& config,
                   std::optional<Timestamp> cutoff = std::nullopt);

// Replays a contiguous slice of a larger log from a fresh state.
RatingState replay_segment(std::span<const VoteEvent> segment, const EloConfig& config);

// Gives every declared firm without a score the initial rating.
void seed_universe(RatingState& state, std::span<const Firm> firms, const EloConfig& config);

// Copies the events accepted by `keep`, renumbering seq from 1 so the result
// is itself a valid log.
template <typename Pred>
std::vector<VoteEvent> filter_votes(std::span<const VoteEvent> log, Pred keep) {
    std::vector<VoteEvent> out;
    for (const auto& e : log) {
        if (!keep(e)) continue;
        out.push_back(e);
        out.back().seq = out.size();
    }
    return out;
}

// Descending by rating, ties by firm id; rank is the 1-based position.
std::vector<RankedFirm> snapshot_ranking(const RatingState& state);

double total_rating(const RatingState& state);

}  // namespace iai::elo
