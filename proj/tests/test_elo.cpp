#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "iai/elo.h"
#include "iai/elo_io.h"
#include "iai/errors.h"
#include "iai/synthetic.h"
#include "support/band_table.h"

using namespace iai;
using namespace iai::elo;

namespace {

VoteEvent vote(std::uint64_t seq, FirmId a, FirmId b, FirmId winner) {
    VoteEvent e;
    e.seq = seq;
    e.timestamp = parse_timestamp("2016-10-01T12:00:00Z") + std::chrono::seconds{seq};
    e.session_id = "s";
    e.analyst_id = "a";
    e.firm_a = std::move(a);
    e.firm_b = std::move(b);
    e.winner = std::move(winner);
    return e;
}

RatingState with_scores(std::map<FirmId, double> scores) {
    RatingState s;
    s.scores = std::move(scores);
    return s;
}

}  // namespace

TEST_CASE("expected_win_probability band lookups") {
    CHECK(expected_win_probability(200, ExpectationMode::table) == 0.76);
    CHECK(expected_win_probability(0, ExpectationMode::table) == 0.50);
    CHECK(expected_win_probability(800, ExpectationMode::table) == 1.00);
    CHECK(expected_win_probability(100, ExpectationMode::table) == 0.64);
    // rounding to nearest integer before lookup
    CHECK(expected_win_probability(3.4, ExpectationMode::table) == 0.50);
    CHECK(expected_win_probability(3.5, ExpectationMode::table) == 0.51);
    CHECK_THROWS_AS(expected_win_probability(-1, ExpectationMode::table), ContractViolation);
    CHECK_THROWS_AS(expected_win_probability(-1, ExpectationMode::logistic), ContractViolation);
}

TEST_CASE("logistic expectation") {
    CHECK(expected_win_probability(0, ExpectationMode::logistic) == doctest::Approx(0.5));
    CHECK(expected_win_probability(400, ExpectationMode::logistic) == doctest::Approx(10.0 / 11.0));
}

TEST_CASE("band table matches the transcription for every integer difference") {
    REQUIRE(std::size(testing::kBandText) == 51);
    double prev = 0.0;
    for (long long d = 0; d <= 1000; ++d) {
        const double expected = testing::band_oracle(d);
        REQUIRE(expected > 0);
        const double got = expected_win_probability(static_cast<double>(d), ExpectationMode::table);
        CHECK_MESSAGE(got == expected, "diff " << d);
        CHECK(got >= prev);
        prev = got;
    }
    CHECK(expected_win_probability(0, ExpectationMode::table) == 0.50);
    CHECK(expected_win_probability(1000, ExpectationMode::table) == 1.00);
}

TEST_CASE("apply_vote worked example with k = 100") {
    EloConfig cfg{.k_factor = 100};
    auto s = with_scores({{"X", 1200}, {"Y", 1000}});
    s = apply_vote(s, vote(1, "X", "Y", "X"), cfg);
    CHECK(s.scores["X"] == 1224.0);
    CHECK(s.scores["Y"] == 976.0);
    CHECK(s.last_applied == 1);
}

TEST_CASE("apply_vote symmetric start and certain win") {
    EloConfig cfg;
    auto s = apply_vote({}, vote(1, "X", "Y", "X"), cfg);
    CHECK(s.scores["X"] == 1512.0);
    CHECK(s.scores["Y"] == 1488.0);

    auto t = apply_vote(with_scores({{"X", 2300}, {"Y", 1500}}), vote(1, "Y", "X", "X"), cfg);
    CHECK(t.scores["X"] == 2300.0);
    CHECK(t.scores["Y"] == 1500.0);
}

TEST_CASE("underdog win takes the complement share") {
    EloConfig cfg{.k_factor = 100};
    auto s = apply_vote(with_scores({{"X", 1200}, {"Y", 1000}}), vote(1, "X", "Y", "Y"), cfg);
    CHECK(s.scores["Y"] == 1076.0);
    CHECK(s.scores["X"] == 1124.0);
}

TEST_CASE("apply_vote rejects bad events and leaves state untouched") {
    EloConfig cfg;
    RatingState s;
    CHECK_THROWS_AS(apply_vote(s, vote(2, "X", "Y", "X"), cfg), ReplayOrderError);
    CHECK_THROWS_AS(apply_vote(s, vote(1, "X", "Y", "Z"), cfg), ContractViolation);
    CHECK_THROWS_AS(apply_vote(s, vote(1, "X", "X", "X"), cfg), ContractViolation);
    CHECK_THROWS_AS(apply_vote(s, vote(1, "X", "Y", "X"), EloConfig{.k_factor = 0}),
                    ContractViolation);
}

TEST_CASE("exchange bounds and zero-sum on random pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> rating(900, 2100);
    for (auto mode : {ExpectationMode::table, ExpectationMode::logistic}) {
        EloConfig cfg{.k_factor = 36, .mode = mode};
        for (int i = 0; i < 2000; ++i) {
            const double w = rating(rng), l = rating(rng);
            auto before = with_scores({{"W", w}, {"L", l}});
            auto after = apply_vote(before, vote(1, "W", "L", "W"), cfg);
            const double gain = after.scores["W"] - w;
            const double loss = l - after.scores["L"];
            CHECK(gain == doctest::Approx(loss).epsilon(1e-12));
            if (w >= l) {
                CHECK(gain >= 0.0);
                CHECK(gain <= 0.5 * cfg.k_factor + 1e-12);
            } else {
                CHECK(gain >= 0.5 * cfg.k_factor - 1e-12);
                CHECK(gain <= cfg.k_factor + 1e-12);
            }
        }
    }
}

TEST_CASE("replay basics") {
    EloConfig cfg;
    std::vector<VoteEvent> empty;
    auto s = replay(empty, cfg);
    CHECK(s.scores.empty());
    auto firms = synthetic::make_firms(3);
    seed_universe(s, firms, cfg);
    for (const auto& f : firms) CHECK(s.scores.at(f.id) == 1500.0);

    std::vector<VoteEvent> one{vote(1, "X", "Y", "X")};
    auto t = replay(one, cfg);
    CHECK(t.scores["X"] == 1512.0);
    CHECK(t.scores["Y"] == 1488.0);

    std::vector<VoteEvent> gapped{vote(1, "X", "Y", "X"), vote(3, "X", "Y", "Y")};
    CHECK_THROWS_AS(replay(gapped, cfg), ReplayOrderError);
    std::vector<VoteEvent> unsorted{vote(2, "X", "Y", "X"), vote(1, "X", "Y", "Y")};
    CHECK_THROWS_AS(replay(unsorted, cfg), ReplayOrderError);
}

TEST_CASE("replay of a synthetic log conserves the rating total") {
    synthetic::VoteLogSpec spec{.n_firms = 40, .votes_per_wave = 1000, .waves = 1, .noise = 0.2};
    auto log = synthetic::make_latent_order_log(spec);
    EloConfig cfg;
    auto s = replay(log.votes, cfg);
    // oracle: plain summation over the replayed state
    double sum = 0.0;
    for (const auto& [id, r] : s.scores) sum += r;
    CHECK(std::abs(sum - 1500.0 * s.scores.size()) <= 1e-6);
    CHECK(s.last_applied == 1000);
}

TEST_CASE("replay is deterministic and prefix-consistent") {
    synthetic::VoteLogSpec spec{.n_firms = 25, .votes_per_wave = 300, .waves = 2, .noise = 0.3};
    auto log = synthetic::make_latent_order_log(spec);
    EloConfig cfg{.k_factor = 36};
    auto full = replay(log.votes, cfg);
    CHECK(full == replay(log.votes, cfg));

    for (std::size_t n : {0u, 1u, 137u, 300u, 599u}) {
        std::span<const VoteEvent> all(log.votes);
        auto prefix = replay(all.first(n), cfg);
        for (const auto& e : all.subspan(n)) apply_vote_in_place(prefix, e, cfg);
        CHECK(prefix == full);
    }

    // cutoff at the end of wave 0 equals the replay of exactly that prefix
    auto at_cut = replay(log.votes, cfg, log.wave_cutoffs[0]);
    auto prefix = replay(std::span<const VoteEvent>(log.votes).first(300), cfg);
    CHECK(at_cut == prefix);
}

TEST_CASE("replay_segment starts a fresh state mid-log") {
    synthetic::VoteLogSpec spec{.n_firms = 10, .votes_per_wave = 50, .waves = 2};
    auto log = synthetic::make_latent_order_log(spec);
    std::span<const VoteEvent> all(log.votes);
    auto seg = replay_segment(all.subspan(50), EloConfig{});
    CHECK(seg.last_applied == 100);
    CHECK(std::abs(total_rating(seg) - 1500.0 * seg.scores.size()) < 1e-9);
    CHECK_THROWS_AS(replay(all.subspan(50), EloConfig{}), ReplayOrderError);
}

TEST_CASE("snapshot_ranking ordering") {
    auto s = with_scores({{"C", 1500}, {"A", 1600}, {"B", 1500}});
    auto r = snapshot_ranking(s);
    REQUIRE(r.size() == 3);
    CHECK(r[0].firm_id == "A");
    CHECK(r[0].rank == 1);
    CHECK(r[1].firm_id == "B");
    CHECK(r[1].rank == 2);
    CHECK(r[2].firm_id == "C");
    CHECK(r[2].rank == 3);
    CHECK(snapshot_ranking(RatingState{}).empty());
}

TEST_CASE("snapshot_ranking agrees with an independent selection sort") {
    synthetic::VoteLogSpec spec{.n_firms = 60, .votes_per_wave = 1000, .waves = 1, .noise = 0.1};
    auto log = synthetic::make_latent_order_log(spec);
    auto state = replay(log.votes, EloConfig{});
    auto ranking = snapshot_ranking(state);

    std::vector<std::pair<FirmId, double>> pool(state.scores.begin(), state.scores.end());
    std::vector<FirmId> oracle;
    while (!pool.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
            if (pool[i].second > pool[best].second ||
                (pool[i].second == pool[best].second && pool[i].first < pool[best].first)) {
                best = i;
            }
        }
        oracle.push_back(pool[best].first);
        pool.erase(pool.begin() + static_cast<long>(best));
    }
    REQUIRE(oracle.size() == ranking.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(ranking[i].firm_id == oracle[i]);
}

TEST_CASE("vote log csv survives a write/read cycle") {
    synthetic::VoteLogSpec spec{.n_firms = 8, .votes_per_wave = 40, .waves = 2};
    auto log = synthetic::make_latent_order_log(spec);
    log.votes[3].session_id = "has,comma";
    std::stringstream buf;
    write_votes(buf, log.votes);
    CHECK(buf.str().rfind("seq,timestamp_iso8601,session_id,analyst_id,firm_a,firm_b,winner\n", 0) == 0);
    auto back = read_votes(buf);
    CHECK(back == log.votes);
}

TEST_CASE("ranking export uses four decimals and firm tickers") {
    auto firms = synthetic::make_firms(2);
    RatingState s = with_scores({{"F000", 1512.0}, {"F001", 1487.99996}});
    std::stringstream out;
    write_ranking(out, snapshot_ranking(s), firms);
    CHECK(out.str() == "rank,firm_id,ticker,rating\n1,F000,T000,1512.0000\n2,F001,T001,1488.0000\n");
}

TEST_CASE("firm universe parsing validates windows") {
    std::stringstream ok("firm_id,ticker,name,active_from,active_to\nA,AAA,\"Alpha, S.A.\",,2017-03-01\nB,BBB,Beta,2017-03-10,\n");
    auto firms = read_firms(ok);
    REQUIRE(firms.size() == 2);
    CHECK(firms[0].name == "Alpha, S.A.");
    CHECK(firms[0].active_on(parse_date("2016-10-06")));
    CHECK_FALSE(firms[0].active_on(parse_date("2017-03-02")));
    CHECK_FALSE(firms[1].active_on(parse_date("2017-03-09")));

    std::stringstream dup("firm_id,ticker,name\nA,A,A\nA,B,B\n");
    CHECK_THROWS_AS(read_firms(dup), ContractViolation);
    std::stringstream inverted("firm_id,ticker,name,active_from,active_to\nA,A,A,2018-01-01,2017-01-01\n");
    CHECK_THROWS_AS(read_firms(inverted), ContractViolation);
}
