#include "iai/elo.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "iai/errors.h"

namespace iai::elo {

namespace {

struct Band {
    long long upper;  // inclusive upper bound of the difference band
    int hundredths;
};

// Upper bounds of each band; the last band is open-ended (>= 736).
constexpr std::array<Band, 50> kBands{{
    {3, 50},    {10, 51},   {17, 52},   {25, 53},   {32, 54},   {39, 55},   {46, 56},
    {53, 57},   {61, 58},   {68, 59},   {76, 60},   {83, 61},   {91, 62},   {98, 63},
    {106, 64},  {113, 65},  {121, 66},  {129, 67},  {137, 68},  {145, 69},  {153, 70},
    {162, 71},  {170, 72},  {179, 73},  {188, 74},  {197, 75},  {206, 76},  {215, 77},
    {225, 78},  {235, 79},  {245, 80},  {256, 81},  {267, 82},  {278, 83},  {290, 84},
    {302, 85},  {315, 86},  {328, 87},  {344, 88},  {357, 89},  {374, 90},  {391, 91},
    {411, 92},  {432, 93},  {456, 94},  {484, 95},  {517, 96},  {559, 97},  {619, 98},
    {735, 99},
}};

void check_pair(const VoteEvent& e) {
    if (e.firm_a == e.firm_b) {
        throw ContractViolation("vote " + std::to_string(e.seq) + " pairs firm '" + e.firm_a +
                                "' with itself");
    }
    if (e.winner != e.firm_a && e.winner != e.firm_b) {
        throw ContractViolation("vote " + std::to_string(e.seq) + ": winner '" + e.winner +
                                "' is not one of the pair (" + e.firm_a + ", " + e.firm_b + ")");
    }
}

double& score_of(RatingState& state, const FirmId& id, double initial) {
    auto [it, inserted] = state.scores.try_emplace(id, initial);
    return it->second;
}

void fold(RatingState& state, std::span<const VoteEvent> events, const EloConfig& config,
          std::optional<Timestamp> cutoff) {
    for (const auto& e : events) {
        if (cutoff && e.timestamp > *cutoff) break;
        apply_vote_in_place(state, e, config);
    }
}

}  // namespace

bool Firm::active_on(Date day) const {
    if (active_from && day < *active_from) return false;
    if (active_to && day > *active_to) return false;
    return true;
}

void validate_universe(std::span<const Firm> firms) {
    std::set<FirmId> seen;
    for (const auto& f : firms) {
        if (f.id.empty()) throw ContractViolation("firm with empty id");
        if (!seen.insert(f.id).second) throw ContractViolation("duplicate firm id '" + f.id + "'");
        if (f.active_from && f.active_to && *f.active_from > *f.active_to) {
            throw ContractViolation("firm '" + f.id + "': active_from is after active_to");
        }
    }
}

void validate_waves(std::span<const WaveCut> waves) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < waves.size(); ++i) {
        if (!names.insert(waves[i].name).second) {
            throw ContractViolation("duplicate wave name '" + waves[i].name + "'");
        }
        if (i > 0 && !(waves[i - 1].cutoff < waves[i].cutoff)) {
            throw ContractViolation("wave cutoffs must strictly increase (at '" + waves[i].name + "')");
        }
    }
}

void EloConfig::validate() const {
    if (!(k_factor > 0.0) || !std::isfinite(k_factor)) {
        throw ContractViolation("k_factor must be a positive finite number");
    }
    if (!std::isfinite(initial_rating)) throw ContractViolation("initial_rating must be finite");
}

int table_expectation_hundredths(long long diff) {
    if (diff < 0) throw ContractViolation("rating difference must be non-negative");
    auto it = std::lower_bound(kBands.begin(), kBands.end(), diff,
                               [](const Band& b, long long d) { return b.upper < d; });
    return it == kBands.end() ? 100 : it->hundredths;
}

double expected_win_probability(double diff, ExpectationMode mode) {
    if (!(diff >= 0.0)) throw ContractViolation("rating difference must be non-negative");
    if (mode == ExpectationMode::logistic) {
        return 1.0 / (1.0 + std::pow(10.0, -diff / 400.0));
    }
    if (diff > 1e15) return 1.0;
    return table_expectation_hundredths(std::llround(diff)) / 100.0;
}

double exchanged_points(double winner_rating, double loser_rating, const EloConfig& config) {
    const double lead = winner_rating - loser_rating;
    if (config.mode == ExpectationMode::logistic) {
        const double p = 1.0 / (1.0 + std::pow(10.0, -lead / 400.0));
        return (1.0 - p) * config.k_factor;
    }
    const double diff = std::abs(lead);
    const int favourite = diff > 1e15 ? 100 : table_expectation_hundredths(std::llround(diff));
    // Winner's expectation is the band value when it is the favourite, its
    // complement otherwise.
    const int winner_share = lead >= 0.0 ? favourite : 100 - favourite;
    return config.k_factor * (100 - winner_share) / 100.0;
}

void apply_vote_in_place(RatingState& state, const VoteEvent& event, const EloConfig& config) {
    config.validate();
    if (event.seq != state.last_applied + 1) {
        throw ReplayOrderError("expected vote seq " + std::to_string(state.last_applied + 1) +
                               ", got " + std::to_string(event.seq));
    }
    check_pair(event);
    double& winner = score_of(state, event.winner, config.initial_rating);
    double& loser = score_of(state, event.loser(), config.initial_rating);
    const double points = exchanged_points(winner, loser, config);
    winner += points;
    loser -= points;
    state.last_applied = event.seq;
}

RatingState apply_vote(RatingState state, const VoteEvent& event, const EloConfig& config) {
    apply_vote_in_place(state, event, config);
    return state;
}

void validate_log(std::span<const VoteEvent> log, std::uint64_t first_seq) {
    std::uint64_t expected = first_seq;
    const VoteEvent* prev = nullptr;
    for (const auto& e : log) {
        if (e.seq != expected) {
            throw ReplayOrderError("vote log out of order: expected seq " + std::to_string(expected) +
                                   ", found " + std::to_string(e.seq));
        }
        if (prev && e.timestamp < prev->timestamp) {
            throw ReplayOrderError("vote " + std::to_string(e.seq) +
                                   " has a timestamp earlier than its predecessor");
        }
        check_pair(e);
        prev = &e;
        ++expected;
    }
}

RatingState replay(std::span<const VoteEvent> log, const EloConfig& config,
                   std::optional<Timestamp> cutoff) {
    config.validate();
    validate_log(log, 1);
    RatingState state;
    fold(state, log, config, cutoff);
    return state;
}

RatingState replay_segment(std::span<const VoteEvent> segment, const EloConfig& config) {
    config.validate();
    RatingState state;
    if (segment.empty()) return state;
    validate_log(segment, segment.front().seq);
    state.last_applied = segment.front().seq - 1;
    fold(state, segment, config, std::nullopt);
    return state;
}

void seed_universe(RatingState& state, std::span<const Firm> firms, const EloConfig& config) {
    for (const auto& f : firms) state.scores.try_emplace(f.id, config.initial_rating);
}

std::vector<RankedFirm> snapshot_ranking(const RatingState& state) {
    std::vector<RankedFirm> out;
    out.reserve(state.scores.size());
    for (const auto& [id, rating] : state.scores) out.push_back({id, rating, 0});
    std::stable_sort(out.begin(), out.end(), [](const RankedFirm& a, const RankedFirm& b) {
        if (a.rating != b.rating) return a.rating > b.rating;
        return a.firm_id < b.firm_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

double total_rating(const RatingState& state) {
    double sum = 0.0;
    for (const auto& [id, rating] : state.scores) sum += rating;
    return sum;
}

}  // namespace iai::elo
