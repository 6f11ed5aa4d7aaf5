#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "iai/elo.h"

namespace iai::validation {

struct RankEntry {
    std::string firm_id;
    double rank = 0.0;
};

using Ranking = std::vector<RankEntry>;

// Rank 1 = highest score; tied scores share the average of their positions.
Ranking ranking_from_scores(const std::map<std::string, double>& scores);

// Spearman's rho over the firms present in both rankings:
//   1 - 6 * sum(d^2) / (n (n^2 - 1))
// Both sides are re-ranked on the common set (ties averaged) first.
// Throws DomainError when fewer than two firms are shared or an id repeats.
double spearman_rho(const Ranking& a, const Ranking& b);

enum class WaveMode {
    segmented,   // each wave ranks only the votes cast since the previous cutoff
    cumulative,  // each wave ranks every vote up to its cutoff
};

struct KSweepOptions {
    WaveMode mode = WaveMode::segmented;
    elo::ExpectationMode expectation = elo::ExpectationMode::table;
    double initial_rating = 1500.0;
};

struct KSweepResult {
    std::vector<double> k_values;
    std::vector<std::string> wave_names;
    // rho[k][i][j]: Spearman between wave i and wave j rankings at k_values[k].
    std::vector<std::vector<std::vector<double>>> rho;
    // consecutive[k][w]: rho between wave w and wave w + 1.
    std::vector<std::vector<double>> consecutive;
    std::vector<double> mean_consecutive;
    // Highest mean consecutive rho; ties go to the smaller k.
    double recommended_k = 0.0;
};

KSweepResult sweep_k(std::span<const elo::VoteEvent> log, std::span<const double> k_values,
                     std::span<const elo::WaveCut> waves, const KSweepOptions& options = {});

}  // namespace iai::validation
