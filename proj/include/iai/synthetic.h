#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iai/elo.h"

namespace iai::synthetic {

// Firm ids "F000".."F{n-1}". Position in the returned vector is the latent
// disclosure order: index 0 is the best-disclosing firm.
std::vector<elo::Firm> make_firms(std::size_t n);

struct VoteLogSpec {
    std::size_t n_firms = 100;
    std::size_t votes_per_wave = 2000;
    std::size_t waves = 3;
    // Probability that the choice contradicts the latent order. 0.5 is pure noise.
    double noise = 0.05;
    std::uint64_t seed = 42;
    // Votes in wave w are stamped on consecutive minutes starting at this day + w*30 days.
    std::string start_date = "2016-09-01";
};

struct SyntheticLog {
    std::vector<elo::Firm> firms;
    std::vector<elo::VoteEvent> votes;
    std::vector<Timestamp> wave_cutoffs;  // last timestamp of each wave
};

// Uniformly random pairs; the latent-better firm wins with probability 1 - noise.
SyntheticLog make_latent_order_log(const VoteLogSpec& spec);

}  // namespace iai::synthetic
