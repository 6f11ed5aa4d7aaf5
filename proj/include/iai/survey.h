#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "iai/elo.h"
#include "iai/time_util.h"

namespace iai::survey {

inline constexpr std::size_t kPairsPerSession = 10;
inline constexpr std::size_t kMinActiveFirms = 5;

struct Analyst {
    std::string analyst_id;
    bool certified = false;
    std::string state;
    Timestamp created_at{};
};

using FirmPair = std::pair<elo::FirmId, elo::FirmId>;

struct Session {
    std::string session_id;
    std::string analyst_id;
    std::vector<FirmPair> pairs;
    std::size_t next_index = 0;
    Timestamp created_at{};
};

enum class PairingPolicy { uniform, proximity };

struct SurveyConfig {
    std::filesystem::path data_dir;
    std::vector<elo::Firm> firms;
    elo::EloConfig elo;
    std::uint64_t seed = 42;
    PairingPolicy pairing = PairingPolicy::uniform;
    std::function<Timestamp()> clock = now_utc;
};

struct NextPair {
    bool complete = false;
    std::size_t pair_index = 0;
    elo::FirmId firm_a;
    elo::FirmId firm_b;
};

struct VoteReceipt {
    elo::VoteEvent event;
    bool replayed = false;  // true when an identical earlier submission was returned
};

struct RatingsQuery {
    std::optional<double> k;
    std::optional<Timestamp> cutoff;
    bool certified_only = false;
};

// Durable survey state. The vote log (votes.csv) is the source of truth and is
// fsynced before a vote is acknowledged; analysts and sessions live in JSON
// lines files next to it. Writers are serialized, readers share a lock.
class SurveyStore {
public:
    explicit SurveyStore(SurveyConfig config);
    ~SurveyStore();
    SurveyStore(const SurveyStore&) = delete;
    SurveyStore& operator=(const SurveyStore&) = delete;

    Analyst register_analyst(bool certified, const std::string& state);
    Session create_session(const std::string& analyst_id);
    NextPair next_pair(const std::string& session_id) const;
    VoteReceipt submit_vote(const std::string& session_id, std::size_t pair_index, const elo::FirmId& winner);
    std::vector<elo::RankedFirm> current_ratings(const RatingsQuery& query = {}) const;

    Session session(const std::string& session_id) const;
    Analyst analyst(const std::string& analyst_id) const;
    std::vector<elo::VoteEvent> votes() const;
    std::string export_votes_csv() const;
    std::optional<elo::Firm> firm(const elo::FirmId& id) const;
    const std::vector<elo::Firm>& firms() const { return config_.firms; }
    const elo::EloConfig& elo_config() const { return config_.elo; }
    // Notes about partial trailing records dropped while loading.
    const std::vector<std::string>& recovery_notes() const { return recovery_notes_; }

private:
    class AppendFile;

    void load();
    std::vector<elo::Firm> active_firms(Date on) const;
    std::vector<FirmPair> draw_pairs(const std::string& analyst_id, std::uint64_t session_number, Timestamp now) const;
    Timestamp next_timestamp();

    SurveyConfig config_;
    mutable std::shared_mutex mutex_;
    std::unique_ptr<AppendFile> votes_file_;
    std::unique_ptr<AppendFile> analysts_file_;
    std::unique_ptr<AppendFile> sessions_file_;

    std::vector<elo::VoteEvent> votes_;
    std::map<std::string, Analyst> analysts_;
    std::map<std::string, Session> sessions_;
    std::map<std::string, std::vector<std::size_t>> session_votes_;  // session -> positions in votes_
    Timestamp last_timestamp_{};
    std::vector<std::string> recovery_notes_;
};

}  // namespace iai::survey
