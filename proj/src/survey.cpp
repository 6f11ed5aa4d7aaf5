#include "iai/survey.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iai/elo_io.h"
#include "iai/errors.h"

namespace iai::survey {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sys_error(const std::string& what, const fs::path& path) {
    return what + " " + path.string() + ": " + std::strerror(errno);
}

// Drops bytes after the last newline, which can only be a record cut short by
// a crash mid-write. Returns the number of bytes removed.
std::uintmax_t truncate_partial_tail(const fs::path& path) {
    if (!fs::exists(path)) return 0;
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (content.empty() || content.back() == '\n') return 0;
    const auto last = content.rfind('\n');
    const std::uintmax_t keep = last == std::string::npos ? 0 : last + 1;
    fs::resize_file(path, keep);
    return content.size() - keep;
}

std::vector<json> read_json_lines(const fs::path& path) {
    std::vector<json> out;
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw PersistenceError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

FirmPair unordered(const FirmPair& p) { return p.first < p.second ? p : FirmPair{p.second, p.first}; }

}  // namespace

class SurveyStore::AppendFile {
public:
    explicit AppendFile(fs::path path) : path_(std::move(path)) {
        fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw PersistenceError(sys_error("cannot open", path_));
        size_ = static_cast<off_t>(fs::file_size(path_));
    }
    ~AppendFile() {
        if (fd_ >= 0) ::close(fd_);
    }
    AppendFile(const AppendFile&) = delete;
    AppendFile& operator=(const AppendFile&) = delete;

    // Returns only once the record is on stable storage. On failure the file
    // is cut back to its previous length so no partial record remains.
    void append(const std::string& record) {
        std::size_t done = 0;
        while (done < record.size()) {
            const ssize_t n = ::write(fd_, record.data() + done, record.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                rollback();
                throw PersistenceError(sys_error("write failed on", path_));
            }
            done += static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0) {
            rollback();
            throw PersistenceError(sys_error("fsync failed on", path_));
        }
        size_ += static_cast<off_t>(record.size());
    }

    bool empty() const { return size_ == 0; }

private:
    void rollback() {
        // If this fails too, the next load drops the partial tail.
        if (::ftruncate(fd_, size_) != 0) return;
    }

    fs::path path_;
    int fd_ = -1;
    off_t size_ = 0;
};

SurveyStore::SurveyStore(SurveyConfig config) : config_(std::move(config)) {
    config_.elo.validate();
    elo::validate_universe(config_.firms);
    if (config_.data_dir.empty()) throw ContractViolation("data directory must be set");
    std::error_code ec;
    fs::create_directories(config_.data_dir, ec);
    if (ec) throw PersistenceError("cannot create " + config_.data_dir.string() + ": " + ec.message());
    load();
}

SurveyStore::~SurveyStore() = default;

void SurveyStore::load() {
    const auto votes_path = config_.data_dir / "votes.csv";
    const auto analysts_path = config_.data_dir / "analysts.jsonl";
    const auto sessions_path = config_.data_dir / "sessions.jsonl";

    for (const auto& path : {votes_path, analysts_path, sessions_path}) {
        if (auto dropped = truncate_partial_tail(path)) {
            recovery_notes_.push_back("dropped " + std::to_string(dropped) + " bytes of a partial record in " +
                                      path.string());
        }
    }

    votes_file_ = std::make_unique<AppendFile>(votes_path);
    if (votes_file_->empty()) {
        votes_file_->append(std::string(elo::kVoteLogHeader) + "\n");
    } else {
        votes_ = elo::read_votes(votes_path);
        elo::validate_log(votes_);
    }
    analysts_file_ = std::make_unique<AppendFile>(analysts_path);
    sessions_file_ = std::make_unique<AppendFile>(sessions_path);

    try {
        for (const auto& j : read_json_lines(analysts_path)) {
            Analyst a{j.at("analyst_id").get<std::string>(), j.at("certified").get<bool>(),
                      j.at("state").get<std::string>(), parse_timestamp(j.at("created_at").get<std::string>())};
            last_timestamp_ = std::max(last_timestamp_, a.created_at);
            analysts_[a.analyst_id] = a;
        }
        for (const auto& j : read_json_lines(sessions_path)) {
            Session s;
            s.session_id = j.at("session_id").get<std::string>();
            s.analyst_id = j.at("analyst_id").get<std::string>();
            s.created_at = parse_timestamp(j.at("created_at").get<std::string>());
            for (const auto& p : j.at("pairs")) s.pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
            last_timestamp_ = std::max(last_timestamp_, s.created_at);
            sessions_[s.session_id] = s;
        }
    } catch (const json::exception& e) {
        throw PersistenceError(std::string("malformed survey record: ") + e.what());
    }

    for (std::size_t i = 0; i < votes_.size(); ++i) {
        const auto& v = votes_[i];
        auto it = sessions_.find(v.session_id);
        if (it == sessions_.end()) {
            throw PersistenceError("vote " + std::to_string(v.seq) + " references unknown session " + v.session_id);
        }
        auto& positions = session_votes_[v.session_id];
        const auto index = positions.size();
        if (index >= it->second.pairs.size() || it->second.pairs[index] != FirmPair{v.firm_a, v.firm_b}) {
            throw PersistenceError("vote " + std::to_string(v.seq) + " does not match pair " + std::to_string(index) +
                                   " of session " + v.session_id);
        }
        positions.push_back(i);
        last_timestamp_ = std::max(last_timestamp_, v.timestamp);
    }
    for (auto& [id, s] : sessions_) s.next_index = session_votes_.count(id) ? session_votes_[id].size() : 0;
}

Timestamp SurveyStore::next_timestamp() {
    last_timestamp_ = std::max(config_.clock(), last_timestamp_);
    return last_timestamp_;
}

std::vector<elo::Firm> SurveyStore::active_firms(Date on) const {
    std::vector<elo::Firm> out;
    for (const auto& f : config_.firms) {
        if (f.active_on(on)) out.push_back(f);
    }
    return out;
}

std::vector<FirmPair> SurveyStore::draw_pairs(const std::string& analyst_id, std::uint64_t session_number,
                                              Timestamp now) const {
    const auto active = active_firms(std::chrono::floor<std::chrono::days>(now));
    if (active.size() < kMinActiveFirms) {
        throw CapacityError("need at least " + std::to_string(kMinActiveFirms) + " active firms, have " +
                            std::to_string(active.size()));
    }

    std::set<FirmPair> seen;
    for (const auto& [id, s] : sessions_) {
        if (s.analyst_id != analyst_id) continue;
        for (const auto& p : s.pairs) seen.insert(unordered(p));
    }

    std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                      static_cast<std::uint32_t>(session_number)};
    std::mt19937_64 rng(seq);

    std::vector<FirmPair> candidates;
    candidates.reserve(active.size() * (active.size() - 1) / 2);
    for (std::size_t i = 0; i < active.size(); ++i) {
        for (std::size_t j = i + 1; j < active.size(); ++j) candidates.emplace_back(active[i].id, active[j].id);
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);

    if (config_.pairing == PairingPolicy::proximity) {
        auto state = elo::replay(votes_, config_.elo);
        elo::seed_universe(state, config_.firms, config_.elo);
        auto gap = [&](const FirmPair& p) { return std::abs(state.scores.at(p.first) - state.scores.at(p.second)); };
        std::stable_sort(candidates.begin(), candidates.end(),
                         [&](const FirmPair& a, const FirmPair& b) { return gap(a) < gap(b); });
    }
    std::stable_partition(candidates.begin(), candidates.end(),
                          [&](const FirmPair& p) { return !seen.count(unordered(p)); });

    std::bernoulli_distribution flip(0.5);
    std::vector<FirmPair> pairs(candidates.begin(), candidates.begin() + kPairsPerSession);
    for (auto& p : pairs) {
        if (flip(rng)) std::swap(p.first, p.second);
    }
    return pairs;
}

Analyst SurveyStore::register_analyst(bool certified, const std::string& state) {
    std::unique_lock lock(mutex_);
    char id[24];
    std::snprintf(id, sizeof id, "A%06zu", analysts_.size() + 1);
    Analyst a{id, certified, state, next_timestamp()};
    json j{{"analyst_id", a.analyst_id},
           {"certified", a.certified},
           {"state", a.state},
           {"created_at", format_timestamp(a.created_at)}};
    analysts_file_->append(j.dump() + "\n");
    analysts_[a.analyst_id] = a;
    return a;
}

Session SurveyStore::create_session(const std::string& analyst_id) {
    std::unique_lock lock(mutex_);
    if (!analysts_.count(analyst_id)) throw NotFoundError("unknown analyst " + analyst_id);
    const Timestamp now = next_timestamp();
    Session s;
    char id[24];
    std::snprintf(id, sizeof id, "S%06zu", sessions_.size() + 1);
    s.session_id = id;
    s.analyst_id = analyst_id;
    s.created_at = now;
    s.pairs = draw_pairs(analyst_id, sessions_.size(), now);

    json pairs = json::array();
    for (const auto& [a, b] : s.pairs) pairs.push_back({a, b});
    json j{{"session_id", s.session_id},
           {"analyst_id", s.analyst_id},
           {"created_at", format_timestamp(s.created_at)},
           {"pairs", pairs}};
    sessions_file_->append(j.dump() + "\n");
    sessions_[s.session_id] = s;
    return s;
}

Session SurveyStore::session(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session " + session_id);
    return it->second;
}

Analyst SurveyStore::analyst(const std::string& analyst_id) const {
    std::shared_lock lock(mutex_);
    auto it = analysts_.find(analyst_id);
    if (it == analysts_.end()) throw NotFoundError("unknown analyst " + analyst_id);
    return it->second;
}

NextPair SurveyStore::next_pair(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session " + session_id);
    const auto& s = it->second;
    NextPair out;
    out.pair_index = s.next_index;
    if (s.next_index >= s.pairs.size()) {
        out.complete = true;
        return out;
    }
    out.firm_a = s.pairs[s.next_index].first;
    out.firm_b = s.pairs[s.next_index].second;
    return out;
}

VoteReceipt SurveyStore::submit_vote(const std::string& session_id, std::size_t pair_index,
                                     const elo::FirmId& winner) {
    std::unique_lock lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session " + session_id);
    auto& s = it->second;
    auto& positions = session_votes_[session_id];

    if (pair_index < positions.size()) {
        const auto& original = votes_[positions[pair_index]];
        if (original.winner == winner) return {original, true};
        throw OrderingError("pair " + std::to_string(pair_index) + " of session " + session_id +
                            " already has a different vote");
    }
    if (pair_index != s.next_index || s.next_index >= s.pairs.size()) {
        throw OrderingError("expected pair index " + std::to_string(s.next_index) + ", got " +
                            std::to_string(pair_index));
    }
    const auto& [a, b] = s.pairs[pair_index];
    if (winner != a && winner != b) {
        throw ContractViolation("winner " + winner + " is not one of " + a + ", " + b);
    }

    elo::VoteEvent e{votes_.size() + 1, next_timestamp(), session_id, s.analyst_id, a, b, winner};
    votes_file_->append(elo::format_vote_row(e) + "\n");
    votes_.push_back(e);
    positions.push_back(votes_.size() - 1);
    ++s.next_index;
    return {e, false};
}

std::vector<elo::RankedFirm> SurveyStore::current_ratings(const RatingsQuery& query) const {
    elo::EloConfig cfg = config_.elo;
    if (query.k) cfg.k_factor = *query.k;
    cfg.validate();

    std::shared_lock lock(mutex_);
    elo::RatingState state;
    if (query.certified_only) {
        auto log = elo::filter_votes(std::span<const elo::VoteEvent>(votes_), [&](const elo::VoteEvent& e) {
            auto a = analysts_.find(e.analyst_id);
            return a != analysts_.end() && a->second.certified;
        });
        state = elo::replay(log, cfg, query.cutoff);
    } else {
        state = elo::replay(votes_, cfg, query.cutoff);
    }
    elo::seed_universe(state, config_.firms, cfg);
    return elo::snapshot_ranking(state);
}

std::vector<elo::VoteEvent> SurveyStore::votes() const {
    std::shared_lock lock(mutex_);
    return votes_;
}

std::string SurveyStore::export_votes_csv() const {
    std::shared_lock lock(mutex_);
    std::ostringstream out;
    elo::write_votes(out, votes_);
    return out.str();
}

std::optional<elo::Firm> SurveyStore::firm(const elo::FirmId& id) const {
    for (const auto& f : config_.firms) {
        if (f.id == id) return f;
    }
    return std::nullopt;
}

}  // namespace iai::survey
