#include "iai/rank_correlation.h"

#include <algorithm>
#include <future>
#include <numeric>
#include <set>
#include <unordered_map>

#include "iai/errors.h"

namespace iai::validation {

namespace {

// Average ranks of `values` in ascending order (smallest value -> rank 1).
std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::unordered_map<std::string, double> index_ranking(const Ranking& r, const char* side) {
    std::unordered_map<std::string, double> idx;
    for (const auto& e : r) {
        if (!idx.emplace(e.firm_id, e.rank).second) {
            throw DomainError(std::string("ranking ") + side + " lists firm '" + e.firm_id + "' twice");
        }
    }
    return idx;
}

Ranking rank_state(const elo::RatingState& state) { return ranking_from_scores(state.scores); }

}  // namespace

Ranking ranking_from_scores(const std::map<std::string, double>& scores) {
    std::vector<double> negated;
    Ranking out;
    for (const auto& [id, s] : scores) {
        out.push_back({id, 0.0});
        negated.push_back(-s);
    }
    auto ranks = average_ranks(negated);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = ranks[i];
    return out;
}

double spearman_rho(const Ranking& a, const Ranking& b) {
    auto ia = index_ranking(a, "a");
    auto ib = index_ranking(b, "b");
    std::vector<std::string> common;
    for (const auto& e : a) {
        if (ib.count(e.firm_id)) common.push_back(e.firm_id);
    }
    if (common.size() < 2) {
        throw DomainError("spearman_rho needs at least two firms present in both rankings (found " +
                          std::to_string(common.size()) + ")");
    }
    std::vector<double> ra, rb;
    for (const auto& id : common) {
        ra.push_back(ia.at(id));
        rb.push_back(ib.at(id));
    }
    ra = average_ranks(ra);
    rb = average_ranks(rb);
    double sum_d2 = 0.0;
    for (std::size_t i = 0; i < common.size(); ++i) {
        const double d = ra[i] - rb[i];
        sum_d2 += d * d;
    }
    const double n = static_cast<double>(common.size());
    return 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
}

KSweepResult sweep_k(std::span<const elo::VoteEvent> log, std::span<const double> k_values,
                     std::span<const elo::WaveCut> waves, const KSweepOptions& options) {
    if (waves.size() < 2) throw DomainError("sweep_k needs at least two waves");
    if (k_values.empty()) throw DomainError("sweep_k needs at least one k value");
    elo::validate_waves(waves);
    elo::validate_log(log, 1);

    // Index of the first event after each cutoff.
    std::vector<std::size_t> ends;
    for (const auto& w : waves) {
        auto it = std::upper_bound(log.begin(), log.end(), w.cutoff,
                                   [](Timestamp t, const elo::VoteEvent& e) { return t < e.timestamp; });
        ends.push_back(static_cast<std::size_t>(it - log.begin()));
    }

    KSweepResult result;
    result.k_values.assign(k_values.begin(), k_values.end());
    for (const auto& w : waves) result.wave_names.push_back(w.name);

    auto run_k = [&](double k) {
        elo::EloConfig cfg{k, options.initial_rating, options.expectation};
        std::vector<Ranking> rankings;
        std::size_t begin = 0;
        for (std::size_t w = 0; w < waves.size(); ++w) {
            const std::size_t from = options.mode == WaveMode::segmented ? begin : 0;
            auto state = elo::replay_segment(log.subspan(from, ends[w] - from), cfg);
            rankings.push_back(rank_state(state));
            begin = ends[w];
        }
        std::vector<std::vector<double>> m(waves.size(), std::vector<double>(waves.size(), 1.0));
        for (std::size_t i = 0; i < waves.size(); ++i) {
            for (std::size_t j = i + 1; j < waves.size(); ++j) {
                m[i][j] = m[j][i] = spearman_rho(rankings[i], rankings[j]);
            }
        }
        return m;
    };

    std::vector<std::future<std::vector<std::vector<double>>>> jobs;
    for (double k : k_values) jobs.push_back(std::async(std::launch::async, run_k, k));
    for (auto& j : jobs) result.rho.push_back(j.get());

    for (const auto& m : result.rho) {
        std::vector<double> c;
        for (std::size_t w = 0; w + 1 < waves.size(); ++w) c.push_back(m[w][w + 1]);
        result.mean_consecutive.push_back(std::accumulate(c.begin(), c.end(), 0.0) /
                                          static_cast<double>(c.size()));
        result.consecutive.push_back(std::move(c));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.k_values.size(); ++i) {
        const double a = result.mean_consecutive[i], b = result.mean_consecutive[best];
        if (a > b || (a == b && result.k_values[i] < result.k_values[best])) best = i;
    }
    result.recommended_k = result.k_values[best];
    return result;
}

}  // namespace iai::validation
