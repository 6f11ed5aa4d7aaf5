#include "iai/pin.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "iai/csv.h"
#include "iai/errors.h"
#include "iai/nelder_mead.h"

namespace iai::pin {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double poisson_direct(std::int64_t n, double lambda) {
    const double nd = static_cast<double>(n);
    return std::exp(-lambda) * std::pow(lambda, nd) / std::tgamma(nd + 1.0);
}

double log_sum_exp(std::span<const double> terms) {
    double m = kNegInf;
    for (double t : terms) m = std::max(m, t);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double t : terms) {
        if (t != kNegInf) s += std::exp(t - m);
    }
    return m + std::log(s);
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

void check_day(const TradeDay& d) {
    if (d.buys < 0 || d.sells < 0) {
        throw DomainError("trade counts must be non-negative (day " + format_date(d.date) + ")");
    }
}

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

PinParams from_transformed(std::span<const double> u) {
    return {std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), logistic(u[3]), logistic(u[4])};
}

}  // namespace

void PinParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(mu) || !finite(eps_b) || !finite(eps_s) || !finite(alpha) || !finite(delta)) {
        throw DomainError("PIN parameters must be finite");
    }
    if (mu < 0.0) throw DomainError("mu must be non-negative");
    if (eps_b <= 0.0 || eps_s <= 0.0) throw DomainError("uninformed arrival rates must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw DomainError("alpha must lie in [0, 1]");
    if (delta < 0.0 || delta > 1.0) throw DomainError("delta must lie in [0, 1]");
}

double PinParams::pin() const {
    const double informed = alpha * mu;
    return informed / (informed + eps_b + eps_s);
}

double day_likelihood_direct(const TradeDay& day, const PinParams& t) {
    t.validate();
    check_day(day);
    const double b_none = poisson_direct(day.buys, t.eps_b);
    const double s_none = poisson_direct(day.sells, t.eps_s);
    const double good = poisson_direct(day.buys, t.mu + t.eps_b) * s_none;
    const double bad = b_none * poisson_direct(day.sells, t.mu + t.eps_s);
    return t.alpha * t.delta * good + t.alpha * (1.0 - t.delta) * bad + (1.0 - t.alpha) * b_none * s_none;
}

double log_likelihood_factorized(std::span<const TradeDay> days, const PinParams& t) {
    t.validate();
    if (days.empty()) throw DomainError("log-likelihood needs at least one day");
    const double ln_rate_b = std::log(t.mu + t.eps_b);
    const double ln_rate_s = std::log(t.mu + t.eps_s);
    const double ln_xb = std::log(t.eps_b) - ln_rate_b;
    const double ln_xs = std::log(t.eps_s) - ln_rate_s;
    const double ln_bad = safe_log(t.alpha * (1.0 - t.delta));
    const double ln_good = safe_log(t.alpha * t.delta);
    const double ln_none = safe_log(1.0 - t.alpha);

    double total = 0.0;
    for (const auto& d : days) {
        check_day(d);
        const double b = static_cast<double>(d.buys);
        const double s = static_cast<double>(d.sells);
        const double m = std::min(b, s) + std::max(b, s) / 2.0;
        total += -t.eps_b - t.eps_s + m * (ln_xb + ln_xs) + b * ln_rate_b + s * ln_rate_s -
                 std::lgamma(b + 1.0) - std::lgamma(s + 1.0);
        const std::array<double, 3> branch{
            ln_bad - t.mu + (b - m) * ln_xb - m * ln_xs,
            ln_good - t.mu - m * ln_xb + (s - m) * ln_xs,
            ln_none + (b - m) * ln_xb + (s - m) * ln_xs,
        };
        total += log_sum_exp(branch);
    }
    if (!std::isfinite(total)) {
        throw NumericalOverflow("factorized PIN log-likelihood is not finite");
    }
    return total;
}

PinFit estimate_pin(std::span<const TradeDay> days, const EstimateOptions& options) {
    if (days.empty()) throw DegenerateInput("PIN estimation needs at least one trade day");
    double sum_b = 0.0, sum_s = 0.0, sum_gap = 0.0;
    bool all_zero = true, all_same = true;
    for (const auto& d : days) {
        check_day(d);
        sum_b += static_cast<double>(d.buys);
        sum_s += static_cast<double>(d.sells);
        sum_gap += std::abs(static_cast<double>(d.buys - d.sells));
        all_zero = all_zero && d.buys == 0 && d.sells == 0;
        all_same = all_same && d.buys == days.front().buys && d.sells == days.front().sells;
    }
    if (all_zero) throw DegenerateInput("every trade day has zero buys and zero sells");

    const double n = static_cast<double>(days.size());
    const double eps_b0 = std::max(sum_b / n, 0.1);
    const double eps_s0 = std::max(sum_s / n, 0.1);
    const double mu0 = std::max(sum_gap / n, 0.1);

    auto objective = [&](std::span<const double> u) {
        try {
            return -log_likelihood_factorized(days, from_transformed(u));
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, options.jitter > 0 ? options.jitter : 1.0);
    optim::NelderMeadOptions nm{.initial_step = 0.5,
                                .f_tolerance = options.tolerance,
                                .max_iterations = options.max_iterations};

    PinFit fit;
    std::vector<double> best_u;
    double best_ll = -std::numeric_limits<double>::infinity();
    bool best_converged = false;
    const std::array<double, 3> grid{0.2, 0.5, 0.8};
    for (double a0 : grid) {
        for (double d0 : grid) {
            std::vector<double> u{std::log(mu0), std::log(eps_b0), std::log(eps_s0), logit(a0), logit(d0)};
            if (options.jitter > 0) {
                for (auto& v : u) v += jitter(rng);
            }
            auto r = optim::nelder_mead(objective, u, nm);
            const double ll = -r.f;
            fit.starts.push_back({a0, d0, ll, r.iterations, r.converged});
            ++fit.starts_tried;
            if (std::isfinite(ll) && ll > best_ll) {
                best_ll = ll;
                best_u = r.x;
                best_converged = r.converged;
            }
        }
    }

    const bool any_converged =
        std::any_of(fit.starts.begin(), fit.starts.end(), [](const auto& s) { return s.converged; });
    if (!any_converged || best_u.empty()) {
        std::ostringstream diag;
        for (const auto& s : fit.starts) {
            diag << "start(alpha=" << s.alpha0 << ", delta=" << s.delta0 << "): loglik=" << s.log_likelihood
                 << " iterations=" << s.iterations << " converged=" << (s.converged ? "yes" : "no") << '\n';
        }
        throw EstimationFailure("no PIN optimizer start converged", diag.str());
    }

    fit.params = from_transformed(best_u);
    fit.pin = fit.params.pin();
    fit.log_likelihood = best_ll;
    fit.converged = best_converged;

    if (days.size() < options.recommended_min_days) {
        fit.warnings.push_back("only " + std::to_string(days.size()) + " trade days (recommended >= " +
                               std::to_string(options.recommended_min_days) + ")");
    }
    if (all_same && days.size() > 1) fit.warnings.push_back("every trade day is identical");
    const auto& p = fit.params;
    if (p.alpha < 1e-4 || p.alpha > 1 - 1e-4 || p.delta < 1e-4 || p.delta > 1 - 1e-4) {
        fit.warnings.push_back("probability parameter at the boundary of its range");
    }
    if (!fit.converged) fit.warnings.push_back("best start hit the iteration limit");
    fit.low_confidence = !fit.warnings.empty();
    return fit;
}

std::vector<TradeDay> simulate_trades(const PinParams& t, std::size_t n_days, std::uint64_t seed,
                                      Date first_day) {
    t.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&](double lambda) -> std::int64_t {
        if (lambda <= 0.0) return 0;
        std::poisson_distribution<std::int64_t> p(lambda);
        return p(rng);
    };
    std::vector<TradeDay> days;
    days.reserve(n_days);
    for (std::size_t i = 0; i < n_days; ++i) {
        const double r = u(rng);
        double buy_rate = t.eps_b, sell_rate = t.eps_s;
        if (r < t.alpha * t.delta) {
            buy_rate += t.mu;
        } else if (r < t.alpha) {
            sell_rate += t.mu;
        }
        TradeDay d;
        d.date = first_day + std::chrono::days{static_cast<int>(i)};
        d.buys = draw(buy_rate);
        d.sells = draw(sell_rate);
        days.push_back(d);
    }
    return days;
}

std::map<std::string, std::vector<TradeDay>> read_trades(const std::filesystem::path& path) {
    auto table = csv::Table::read(path);
    table.require_columns({"firm_id", "date", "buys", "sells"});
    std::map<std::string, std::vector<TradeDay>> out;
    for (std::size_t r = 0; r < table.size(); ++r) {
        TradeDay d;
        d.date = parse_date(table.at(r, "date"));
        d.buys = table.integer(r, "buys");
        d.sells = table.integer(r, "sells");
        if (d.buys < 0 || d.sells < 0) {
            throw DomainError(path.string() + ":" + std::to_string(table.line_of(r)) +
                              ": negative trade count");
        }
        out[table.at(r, "firm_id")].push_back(d);
    }
    for (auto& [firm, days] : out) {
        std::stable_sort(days.begin(), days.end(), [](const TradeDay& a, const TradeDay& b) { return a.date < b.date; });
    }
    return out;
}

void write_trades(std::ostream& out, const std::string& firm_id, std::span<const TradeDay> days) {
    out << "firm_id,date,buys,sells\n";
    for (const auto& d : days) {
        out << csv::join({firm_id, format_date(d.date), std::to_string(d.buys), std::to_string(d.sells)}) << '\n';
    }
}

std::vector<TradeDay> trailing_window(std::span<const TradeDay> days, std::size_t window,
                                      std::optional<Date> end) {
    std::vector<TradeDay> eligible;
    for (const auto& d : days) {
        if (!end || d.date <= *end) eligible.push_back(d);
    }
    if (window > 0 && eligible.size() > window) {
        eligible.erase(eligible.begin(), eligible.end() - static_cast<std::ptrdiff_t>(window));
    }
    return eligible;
}

nlohmann::json to_json(const std::string& firm_id, const PinFit& fit) {
    return {{"firm_id", firm_id},
            {"mu", fit.params.mu},
            {"eps_b", fit.params.eps_b},
            {"eps_s", fit.params.eps_s},
            {"alpha", fit.params.alpha},
            {"delta", fit.params.delta},
            {"pin", fit.pin},
            {"loglik", fit.log_likelihood},
            {"converged", fit.converged},
            {"starts_tried", fit.starts_tried}};
}

}  // namespace iai::pin
