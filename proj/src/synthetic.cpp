#include "iai/synthetic.h"

#include <cstdio>
#include <random>

namespace iai::synthetic {

std::vector<elo::Firm> make_firms(std::size_t n) {
    std::vector<elo::Firm> firms;
    firms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char id[24];
        std::snprintf(id, sizeof id, "F%03zu", i);
        firms.push_back({id, std::string("T") + (id + 1), std::string("Firm ") + (id + 1), {}, {}});
    }
    return firms;
}

SyntheticLog make_latent_order_log(const VoteLogSpec& spec) {
    SyntheticLog out;
    out.firms = make_firms(spec.n_firms);
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick(0, spec.n_firms - 1);
    std::bernoulli_distribution flip(spec.noise);
    std::bernoulli_distribution swap_sides(0.5);
    const Timestamp start{parse_date(spec.start_date)};
    std::uint64_t seq = 0;
    for (std::size_t w = 0; w < spec.waves; ++w) {
        const Timestamp wave_start = start + std::chrono::days{30 * static_cast<int>(w)};
        Timestamp ts = wave_start;
        for (std::size_t v = 0; v < spec.votes_per_wave; ++v) {
            std::size_t a = pick(rng);
            std::size_t b = pick(rng);
            while (b == a) b = pick(rng);
            if (swap_sides(rng)) std::swap(a, b);
            const std::size_t better = std::min(a, b);
            const std::size_t worse = std::max(a, b);
            const std::size_t winner = flip(rng) ? worse : better;
            ts = wave_start + std::chrono::minutes{static_cast<int>(v)};
            elo::VoteEvent e;
            e.seq = ++seq;
            e.timestamp = ts;
            e.session_id = "syn-w" + std::to_string(w) + "-" + std::to_string(v / 10);
            e.analyst_id = "syn";
            e.firm_a = out.firms[a].id;
            e.firm_b = out.firms[b].id;
            e.winner = out.firms[winner].id;
            out.votes.push_back(std::move(e));
        }
        out.wave_cutoffs.push_back(ts);
    }
    return out;
}

}  // namespace iai::synthetic
