#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iai/time_util.h"

namespace iai::pin {

struct TradeDay {
    Date date{};
    std::int64_t buys = 0;
    std::int64_t sells = 0;
};

// Static mixture-of-Poissons trade model. On an information-event day
// (probability alpha) the news is good with probability delta, in which case
// informed traders add `mu` to the buy arrival rate; bad news adds `mu` to
// sells. Note that delta is the GOOD-news probability here; some of the
// literature uses the opposite convention.
struct PinParams {
    double mu = 0.0;      // informed arrival rate, trades/day
    double eps_b = 0.0;   // uninformed buy rate
    double eps_s = 0.0;   // uninformed sell rate
    double alpha = 0.0;   // P(information event)
    double delta = 0.0;   // P(good news | event)

    // Evaluation domain: mu >= 0, eps_b, eps_s > 0, alpha, delta in [0, 1].
    void validate() const;

    // alpha*mu / (alpha*mu + eps_b + eps_s)
    double pin() const;
};

// Poisson mixture density of one day's (buys, sells), evaluated literally
// as e^-l * l^n / n!. Overflows for large counts; use the factorized form.
double day_likelihood_direct(const TradeDay& day, const PinParams& theta);

// Sum of per-day log-likelihoods in the factorized form with
// M = min(B, S) + max(B, S) / 2 and x = eps / (mu + eps); the inner mixture
// is combined with log-sum-exp. Includes the -ln B! - ln S! terms, so it
// equals the sum of ln(day_likelihood_direct).
double log_likelihood_factorized(std::span<const TradeDay> days, const PinParams& theta);

struct EstimateOptions {
    int max_iterations = 500;        // per start
    double tolerance = 1e-8;         // absolute log-likelihood spread
    std::size_t recommended_min_days = 20;
    std::uint64_t seed = 42;
    double jitter = 0.0;             // sd of start perturbation in transformed space
};

struct StartDiagnostic {
    double alpha0 = 0.0;
    double delta0 = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct PinFit {
    PinParams params;
    double pin = 0.0;
    double log_likelihood = 0.0;
    bool converged = false;
    int starts_tried = 0;
    bool low_confidence = false;
    std::vector<std::string> warnings;
    std::vector<StartDiagnostic> starts;
};

// Multi-start maximum likelihood over (alpha, delta) in {0.2, 0.5, 0.8}^2,
// with rates started at the sample means. Rates are searched on a log scale
// and probabilities on a logit scale. Throws DegenerateInput for empty or
// all-zero input and EstimationFailure when no start converges.
PinFit estimate_pin(std::span<const TradeDay> days, const EstimateOptions& options = {});

// Independent days drawn from the model; reproducible per seed.
std::vector<TradeDay> simulate_trades(const PinParams& theta, std::size_t n_days, std::uint64_t seed,
                                      Date first_day = Date{std::chrono::days{16801}});

// Trade-count CSV: firm_id,date,buys,sells
std::map<std::string, std::vector<TradeDay>> read_trades(const std::filesystem::path& path);
void write_trades(std::ostream& out, const std::string& firm_id, std::span<const TradeDay> days);

// Last `window` days on or before `end` (all days when window == 0).
std::vector<TradeDay> trailing_window(std::span<const TradeDay> days, std::size_t window,
                                      std::optional<Date> end = std::nullopt);

nlohmann::json to_json(const std::string& firm_id, const PinFit& fit);

}  // namespace iai::pin
