#include "iai/cli.h"

#include <openssl/evp.h>
#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "iai/csv.h"
#include "iai/elo.h"
#include "iai/elo_io.h"
#include "iai/errors.h"
#include "iai/http_api.h"
#include "iai/panel.h"
#include "iai/pin.h"
#include "iai/proxies.h"
#include "iai/rank_correlation.h"
#include "iai/regression.h"
#include "iai/survey.h"

#ifndef IAI_VERSION
#define IAI_VERSION "0.0.0"
#endif

namespace iai::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistenceError("cannot read " + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw PersistenceError("SHA-256 unavailable");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

namespace {

struct Context {
    Context(std::ostream& o, std::ostream& e) : out(o), err(e) {}

    std::ostream& out;
    std::ostream& err;
    bool quiet = false;
    std::uint64_t seed = 42;
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, std::string>> inputs;

    void param(const std::string& key, const std::string& value) { params.emplace_back(key, value); }
    void param(const std::string& key, double value) {
        std::ostringstream s;
        s << std::setprecision(12) << value;
        param(key, s.str());
    }

    // Validates that the file exists and records its digest.
    void input(const std::string& role, const std::string& path) {
        if (!fs::is_regular_file(path)) throw ContractViolation(role + " file not found: " + path);
        inputs.emplace_back(role + "=" + path, sha256_file(path));
    }

    std::string describe() const {
        std::string s = "iai " IAI_VERSION " " + command;
        for (const auto& [k, v] : params) s += " " + k + "=" + v;
        return s;
    }

    void log_run() const {
        if (quiet) return;
        err << "[iai] " << describe() << '\n';
        for (const auto& [what, digest] : inputs) err << "[iai] input " << what << " sha256=" << digest << '\n';
    }

    void warn(const std::string& msg) const {
        if (!quiet) err << "[iai] warning: " << msg << '\n';
    }

    void header(std::ostream& os) const {
        os << "# " << describe() << '\n';
        for (const auto& [what, digest] : inputs) os << "# input " << what << " sha256=" << digest << '\n';
    }

    json meta() const {
        json p = json::object();
        for (const auto& [k, v] : params) p[k] = v;
        json in = json::object();
        for (const auto& [what, digest] : inputs) in[what] = digest;
        return json{{"generator", "iai " IAI_VERSION}, {"command", command}, {"parameters", p}, {"inputs", in}};
    }
};

// Writes to a file when a path is given, otherwise to the context stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            os_ = &fallback;
            return;
        }
        const fs::path p(path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        file_.open(p);
        if (!file_) throw PersistenceError("cannot write " + path);
        os_ = &file_;
    }
    std::ostream& operator*() { return *os_; }
    void close() {
        if (file_.is_open()) {
            file_.close();
            if (!file_) throw PersistenceError("write failed");
        }
    }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

std::vector<double> parse_k_list(const std::string& text) {
    std::vector<double> ks;
    for (const auto& field : csv::split_record(text)) ks.push_back(csv::parse_double(field, "k list"));
    if (ks.empty()) throw ContractViolation("k list is empty");
    return ks;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> names;
    for (const auto& field : csv::split_record(text)) {
        if (!field.empty()) names.push_back(canonical_variable(field));
    }
    return names;
}

elo::ExpectationMode parse_expectation(const std::string& s) {
    if (s == "table") return elo::ExpectationMode::table;
    if (s == "logistic") return elo::ExpectationMode::logistic;
    throw ContractViolation("expectation must be 'table' or 'logistic'");
}

std::set<std::string> certified_analysts(const std::string& path) {
    std::set<std::string> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        if (j.value("certified", false)) out.insert(j.value("analyst_id", ""));
    }
    return out;
}

struct VoteInputs {
    std::string votes;
    std::string firms;
    std::string analysts;
    bool certified_only = false;
    double k = 24.0;
    std::string expectation = "table";
};

void add_vote_options(CLI::App* sub, VoteInputs& v, bool k_option = true) {
    sub->add_option("--votes", v.votes, "Vote log CSV: seq,timestamp_iso8601,session_id,analyst_id,firm_a,firm_b,winner")
        ->required();
    sub->add_option("--firms", v.firms, "Firm universe CSV: firm_id,ticker,name,active_from,active_to");
    sub->add_option("--analysts", v.analysts, "analysts.jsonl from the survey data directory");
    sub->add_flag("--certified-only", v.certified_only, "Keep only votes by certified analysts (needs --analysts)");
    if (k_option) sub->add_option("--k", v.k, "Elo k-factor")->capture_default_str();
    sub->add_option("--expectation", v.expectation, "Win expectation: table or logistic")->capture_default_str();
}

struct LoadedVotes {
    std::vector<elo::VoteEvent> log;
    std::vector<elo::Firm> firms;
    elo::EloConfig config;
};

LoadedVotes load_votes(Context& ctx, const VoteInputs& v) {
    ctx.input("votes", v.votes);
    if (!v.firms.empty()) ctx.input("firms", v.firms);
    if (v.certified_only) {
        if (v.analysts.empty()) throw ContractViolation("--certified-only needs --analysts");
        ctx.input("analysts", v.analysts);
    }
    ctx.param("expectation", v.expectation);
    ctx.param("certified_only", v.certified_only ? "yes" : "no");

    LoadedVotes out;
    out.config.k_factor = v.k;
    out.config.mode = parse_expectation(v.expectation);
    out.config.validate();
    out.log = elo::read_votes(fs::path(v.votes));
    elo::validate_log(out.log);
    if (!v.firms.empty()) out.firms = elo::read_firms(fs::path(v.firms));
    if (v.certified_only) {
        const auto certified = certified_analysts(v.analysts);
        out.log = elo::filter_votes(std::span<const elo::VoteEvent>(out.log),
                                    [&](const elo::VoteEvent& e) { return certified.count(e.analyst_id) > 0; });
    }
    return out;
}

std::vector<elo::RankedFirm> ranking_at(const LoadedVotes& lv, std::optional<Timestamp> cutoff,
                                        std::optional<Date> active_on = std::nullopt) {
    auto state = elo::replay(lv.log, lv.config, cutoff);
    elo::seed_universe(state, lv.firms, lv.config);
    if (active_on) {
        for (const auto& f : lv.firms) {
            if (!f.active_on(*active_on)) state.scores.erase(f.id);
        }
    }
    return elo::snapshot_ranking(state);
}

void print_table(std::ostream& os, const std::vector<std::string>& labels,
                 const std::vector<std::vector<double>>& m) {
    os << std::setw(12) << "";
    for (const auto& l : labels) os << std::setw(12) << l;
    os << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << std::setw(12) << labels[i];
        for (double v : m[i]) os << std::setw(12) << std::fixed << std::setprecision(4) << v;
        os << '\n';
    }
    os.unsetf(std::ios::floatfield);
}

std::pair<std::string, int> parse_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw ContractViolation("listen address must be host:port");
    const auto port = csv::parse_integer(listen.substr(colon + 1), "listen port");
    if (port < 0 || port > 65535) throw ContractViolation("listen port out of range");
    return {listen.substr(0, colon), static_cast<int>(port)};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Information asymmetry index toolkit: Elo ratings from pairwise analyst votes, "
                 "disclosure proxies, PIN estimation and regression validation."};
    app.name(args.empty() ? "iai" : fs::path(args.front()).filename().string());
    app.set_version_flag("--version", IAI_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    Context ctx{out, err};
    app.add_option("--seed", ctx.seed, "Seed for every randomized step")->capture_default_str();
    app.add_flag("-q,--quiet", ctx.quiet, "Suppress the run log on stderr");

    std::function<void()> action;

    // serve
    std::string listen = "127.0.0.1:8080", data_dir = "data", serve_firms, static_dir, pairing = "uniform";
    double serve_k = 24.0;
    auto* serve = app.add_subcommand("serve", "Run the survey HTTP service");
    serve->add_option("--listen", listen, "host:port (port 0 picks a free port)")->envname("IAI_LISTEN")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "Directory holding votes.csv, analysts.jsonl, sessions.jsonl")
        ->envname("IAI_DATA_DIR")
        ->capture_default_str();
    serve->add_option("--firms", serve_firms, "Firm universe CSV: firm_id,ticker,name,active_from,active_to")->required();
    serve->add_option("--k", serve_k, "Default k-factor for /api/ratings")->envname("IAI_K")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory of static assets served at /");
    serve->add_option("--pairing", pairing, "Pair selection: uniform or proximity")->capture_default_str();
    serve->callback([&] {
        action = [&] {
            ctx.command = "serve";
            ctx.input("firms", serve_firms);
            ctx.param("listen", listen);
            ctx.param("data_dir", data_dir);
            ctx.param("k", serve_k);
            ctx.param("pairing", pairing);
            ctx.param("seed", std::to_string(ctx.seed));
            ctx.log_run();

            survey::SurveyConfig cfg;
            cfg.data_dir = data_dir;
            cfg.firms = elo::read_firms(fs::path(serve_firms));
            cfg.elo.k_factor = serve_k;
            cfg.seed = ctx.seed;
            if (pairing == "proximity") {
                cfg.pairing = survey::PairingPolicy::proximity;
            } else if (pairing != "uniform") {
                throw ContractViolation("pairing must be 'uniform' or 'proximity'");
            }
            auto [host, port] = parse_listen(listen);

            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            survey::SurveyStore store(cfg);
            for (const auto& note : store.recovery_notes()) ctx.warn(note);
            survey::HttpOptions opts{host, port, std::nullopt};
            if (!static_dir.empty()) opts.static_dir = fs::path(static_dir);
            survey::HttpServer server(store, opts);
            const int bound = server.bind();
            out << "listening on " << host << ':' << bound << " with " << store.votes().size() << " votes"
                << std::endl;

            std::thread waiter([&server, signals] {
                int sig = 0;
                sigwait(&signals, &sig);
                server.stop();
            });
            server.run();
            pthread_kill(waiter.native_handle(), SIGTERM);
            waiter.join();
        };
    });

    // replay
    VoteInputs replay_in;
    std::string replay_cutoff, replay_out;
    auto* replay = app.add_subcommand("replay", "Replay a vote log into a ranking CSV (rank,firm_id,ticker,rating)");
    add_vote_options(replay, replay_in);
    replay->add_option("--cutoff", replay_cutoff, "Include votes stamped at or before this instant (date = end of day)");
    replay->add_option("--out", replay_out, "Output ranking CSV (default stdout)");
    replay->callback([&] {
        action = [&] {
            ctx.command = "replay";
            ctx.param("k", replay_in.k);
            ctx.param("cutoff", replay_cutoff.empty() ? "-" : replay_cutoff);
            auto lv = load_votes(ctx, replay_in);
            ctx.log_run();
            std::optional<Timestamp> cutoff;
            if (!replay_cutoff.empty()) cutoff = parse_timestamp(replay_cutoff);
            const auto ranking = ranking_at(lv, cutoff);
            Sink sink(replay_out, out);
            ctx.header(*sink);
            elo::write_ranking(*sink, ranking, lv.firms);
            sink.close();
        };
    });

    // snapshot
    VoteInputs snap_in;
    std::string snap_waves, snap_dir = ".";
    auto* snapshot = app.add_subcommand("snapshot", "Write one ranking CSV per wave cutoff (ranking_<wave>.csv)");
    add_vote_options(snapshot, snap_in);
    snapshot->add_option("--waves", snap_waves, "Wave cutoffs CSV: name,cutoff")->required();
    snapshot->add_option("--out-dir", snap_dir, "Output directory")->capture_default_str();
    snapshot->callback([&] {
        action = [&] {
            ctx.command = "snapshot";
            ctx.param("k", snap_in.k);
            auto lv = load_votes(ctx, snap_in);
            ctx.input("waves", snap_waves);
            ctx.log_run();
            const auto waves = elo::read_waves(snap_waves);
            fs::create_directories(snap_dir);
            for (const auto& w : waves) {
                const auto path = (fs::path(snap_dir) / ("ranking_" + w.name + ".csv")).string();
                Sink sink(path, out);
                ctx.header(*sink);
                *sink << "# wave " << w.name << " cutoff " << format_timestamp(w.cutoff) << '\n';
                elo::write_ranking(*sink, ranking_at(lv, w.cutoff), lv.firms);
                sink.close();
                out << w.name << ' ' << path << '\n';
            }
        };
    });

    // sweep-k
    VoteInputs sweep_in;
    std::string sweep_k = "16,24,36,64,80", sweep_cutoffs, sweep_mode = "segmented", sweep_json;
    auto* sweep = app.add_subcommand("sweep-k", "Inter-wave Spearman stability for several k-factors");
    add_vote_options(sweep, sweep_in, false);
    sweep->add_option("--k", sweep_k, "Comma-separated k list")->capture_default_str();
    sweep->add_option("--cutoffs", sweep_cutoffs, "Wave cutoffs CSV: name,cutoff")->required();
    sweep->add_option("--mode", sweep_mode, "segmented (votes since the previous cutoff) or cumulative")
        ->capture_default_str();
    sweep->add_option("--json", sweep_json, "Also write the result as JSON");
    sweep->callback([&] {
        action = [&] {
            ctx.command = "sweep-k";
            ctx.param("k", sweep_k);
            ctx.param("mode", sweep_mode);
            auto lv = load_votes(ctx, sweep_in);
            ctx.input("cutoffs", sweep_cutoffs);
            ctx.log_run();
            validation::KSweepOptions opts;
            opts.expectation = lv.config.mode;
            if (sweep_mode == "cumulative") {
                opts.mode = validation::WaveMode::cumulative;
            } else if (sweep_mode != "segmented") {
                throw ContractViolation("mode must be 'segmented' or 'cumulative'");
            }
            const auto ks = parse_k_list(sweep_k);
            const auto waves = elo::read_waves(sweep_cutoffs);
            const auto r = validation::sweep_k(lv.log, ks, waves, opts);
            ctx.header(out);
            for (std::size_t i = 0; i < r.k_values.size(); ++i) {
                out << "k = " << r.k_values[i] << '\n';
                print_table(out, r.wave_names, r.rho[i]);
                out << "mean consecutive rho = " << std::fixed << std::setprecision(4) << r.mean_consecutive[i]
                    << "\n\n";
                out.unsetf(std::ios::floatfield);
            }
            out << "recommended k = " << r.recommended_k << '\n';
            if (!sweep_json.empty()) {
                json j = ctx.meta();
                j["k_values"] = r.k_values;
                j["waves"] = r.wave_names;
                j["rho"] = r.rho;
                j["consecutive"] = r.consecutive;
                j["mean_consecutive"] = r.mean_consecutive;
                j["recommended_k"] = r.recommended_k;
                Sink sink(sweep_json, out);
                *sink << j.dump(2) << '\n';
                sink.close();
            }
        };
    });

    // spearman
    std::string rank_a, rank_b;
    auto* spearman = app.add_subcommand("spearman", "Spearman rank correlation between two ranking CSVs");
    spearman->add_option("a", rank_a, "First ranking CSV (rank,firm_id,ticker,rating)")->required();
    spearman->add_option("b", rank_b, "Second ranking CSV")->required();
    spearman->callback([&] {
        action = [&] {
            ctx.command = "spearman";
            ctx.input("a", rank_a);
            ctx.input("b", rank_b);
            ctx.log_run();
            auto load = [](const std::string& p) {
                std::map<std::string, double> scores;
                for (const auto& row : elo::read_ranking(p)) scores[row.firm_id] = row.rating;
                return validation::ranking_from_scores(scores);
            };
            const double rho = validation::spearman_rho(load(rank_a), load(rank_b));
            out << std::setprecision(10) << rho << '\n';
        };
    });

    // pin-estimate
    std::string pin_trades, pin_firm, pin_end, pin_out;
    std::size_t pin_window = 60;
    double pin_jitter = 0.0;
    auto* pin_est = app.add_subcommand("pin-estimate", "Maximum-likelihood PIN per firm from daily buy/sell counts");
    pin_est->add_option("--trades", pin_trades, "Trade counts CSV: firm_id,date,buys,sells")->required();
    pin_est->add_option("--firm", pin_firm, "Estimate only this firm");
    pin_est->add_option("--window", pin_window, "Trailing trade days per firm (0 = all)")->capture_default_str();
    pin_est->add_option("--end", pin_end, "Last date of the window (default: each firm's last day)");
    pin_est->add_option("--jitter", pin_jitter, "SD of seeded start perturbation on the transformed scale")
        ->capture_default_str();
    pin_est->add_option("--out", pin_out, "Output JSON (default stdout)");
    pin_est->callback([&] {
        action = [&] {
            ctx.command = "pin-estimate";
            ctx.input("trades", pin_trades);
            ctx.param("window", std::to_string(pin_window));
            ctx.param("end", pin_end.empty() ? "-" : pin_end);
            ctx.param("jitter", pin_jitter);
            ctx.param("seed", std::to_string(ctx.seed));
            ctx.log_run();
            const auto all = pin::read_trades(pin_trades);
            std::optional<Date> end;
            if (!pin_end.empty()) end = parse_date(pin_end);
            if (!pin_firm.empty() && !all.count(pin_firm)) throw NotFoundError("no trades for firm " + pin_firm);
            pin::EstimateOptions opts;
            opts.seed = ctx.seed;
            opts.jitter = pin_jitter;
            json fits = json::array();
            int failures = 0;
            for (const auto& [firm, days] : all) {
                if (!pin_firm.empty() && firm != pin_firm) continue;
                try {
                    const auto fit = pin::estimate_pin(pin::trailing_window(days, pin_window, end), opts);
                    for (const auto& w : fit.warnings) ctx.warn(firm + ": " + w);
                    fits.push_back(pin::to_json(firm, fit));
                } catch (const Error& e) {
                    if (!pin_firm.empty()) throw;
                    ++failures;
                    ctx.warn(firm + ": " + e.what());
                }
            }
            json doc = ctx.meta();
            doc["fits"] = fits;
            Sink sink(pin_out, out);
            *sink << doc.dump(2) << '\n';
            sink.close();
            if (failures > 0 && fits.empty()) throw EstimationFailure("no firm could be estimated", "");
        };
    });

    // pin-simulate
    pin::PinParams sim_theta{60, 40, 40, 0.4, 0.5};
    std::size_t sim_days = 250;
    std::string sim_firm = "F000", sim_start = "2016-01-01", sim_out;
    auto* pin_sim = app.add_subcommand("pin-simulate", "Simulate daily buy/sell counts from the PIN model");
    pin_sim->add_option("--mu", sim_theta.mu, "Informed arrival rate")->capture_default_str();
    pin_sim->add_option("--eps-b", sim_theta.eps_b, "Uninformed buy rate")->capture_default_str();
    pin_sim->add_option("--eps-s", sim_theta.eps_s, "Uninformed sell rate")->capture_default_str();
    pin_sim->add_option("--alpha", sim_theta.alpha, "Probability of an information event")->capture_default_str();
    pin_sim->add_option("--delta", sim_theta.delta, "Probability the event is good news")->capture_default_str();
    pin_sim->add_option("--days", sim_days, "Number of days")->capture_default_str();
    pin_sim->add_option("--firm", sim_firm, "firm_id written on every row")->capture_default_str();
    pin_sim->add_option("--start", sim_start, "First simulated date")->capture_default_str();
    pin_sim->add_option("--out", sim_out, "Output trades CSV (default stdout)");
    pin_sim->callback([&] {
        action = [&] {
            ctx.command = "pin-simulate";
            ctx.param("mu", sim_theta.mu);
            ctx.param("eps_b", sim_theta.eps_b);
            ctx.param("eps_s", sim_theta.eps_s);
            ctx.param("alpha", sim_theta.alpha);
            ctx.param("delta", sim_theta.delta);
            ctx.param("days", std::to_string(sim_days));
            ctx.param("seed", std::to_string(ctx.seed));
            ctx.log_run();
            sim_theta.validate();
            if (sim_days == 0) throw ContractViolation("--days must be positive");
            const auto days = pin::simulate_trades(sim_theta, sim_days, ctx.seed, parse_date(sim_start));
            Sink sink(sim_out, out);
            ctx.header(*sink);
            *sink << "# true pin " << std::setprecision(10) << sim_theta.pin() << '\n';
            pin::write_trades(*sink, sim_firm, days);
            sink.close();
        };
    });

    // panel
    VoteInputs panel_in;
    std::string panel_waves, panel_out;
    proxy::PanelSources sources;
    std::string trades_path;
    proxy::PanelBuildOptions panel_opts;
    auto* panel = app.add_subcommand("panel", "Build the firm x wave regression panel from ratings and market data");
    add_vote_options(panel, panel_in);
    panel->get_option("--firms")->required();
    panel->add_option("--waves", panel_waves, "Wave cutoffs CSV: name,cutoff")->required();
    panel->add_option("--prices", sources.prices, "firm_id,date,close,bid,ask,volume")->required();
    panel->add_option("--index", sources.index, "date,close")->required();
    panel->add_option("--fundamentals", sources.fundamentals,
                      "firm_id,wave,market_cap,total_liabilities,total_assets,free_float_pct")
        ->required();
    panel->add_option("--coverage", sources.coverage, "firm_id,wave,analyst_count")->required();
    panel->add_option("--earnings", sources.earnings, "firm_id,announce_date,actual_eps,median_forecast_eps")
        ->required();
    panel->add_option("--trades", trades_path, "Optional trade counts for a PIN column: firm_id,date,buys,sells");
    panel->add_option("--window", panel_opts.window_days, "Trading days per wave window")->capture_default_str();
    panel->add_option("--pin-window", panel_opts.pin_window_days, "Trade days per PIN estimate")->capture_default_str();
    panel->add_option("--out", panel_out, "Output panel CSV (default stdout)");
    panel->callback([&] {
        action = [&] {
            ctx.command = "panel";
            ctx.param("k", panel_in.k);
            ctx.param("window", std::to_string(panel_opts.window_days));
            ctx.param("pin_window", std::to_string(panel_opts.pin_window_days));
            auto lv = load_votes(ctx, panel_in);
            ctx.input("waves", panel_waves);
            ctx.input("prices", sources.prices.string());
            ctx.input("index", sources.index.string());
            ctx.input("fundamentals", sources.fundamentals.string());
            ctx.input("coverage", sources.coverage.string());
            ctx.input("earnings", sources.earnings.string());
            if (!trades_path.empty()) {
                ctx.input("trades", trades_path);
                sources.trades = fs::path(trades_path);
            }
            ctx.log_run();
            const auto waves = elo::read_waves(panel_waves);
            std::vector<proxy::RatingSnapshot> snaps;
            for (const auto& w : waves) {
                snaps.push_back({w.name, ranking_at(lv, w.cutoff, std::chrono::floor<std::chrono::days>(w.cutoff))});
            }
            auto built = proxy::build_panel(sources, waves, snaps, lv.firms, panel_opts);
            for (const auto& w : built.warnings) ctx.warn(w);
            Sink sink(panel_out, out);
            ctx.header(*sink);
            for (const auto& note : proxy::panel_header_notes(panel_opts)) *sink << "# " << note << '\n';
            write_panel(*sink, built.rows);
            sink.close();
        };
    });

    // regress / eliminate
    std::string reg_panel, reg_dep = "ranking", reg_vars = "coverage,error,vol,baa,ln_volume,ln_size,ff,qtobin",
                           reg_out, reg_json;
    double p_threshold = 0.05;
    auto add_reg_options = [&](CLI::App* sub) {
        sub->add_option("--panel", reg_panel, "Panel CSV from the panel subcommand")->required();
        sub->add_option("--dep", reg_dep, "Dependent variable")->capture_default_str();
        sub->add_option("--vars", reg_vars, "Comma-separated regressors (add pin to include it)")
            ->capture_default_str();
        sub->add_option("--out", reg_out, "Text report (default stdout)");
        sub->add_option("--json", reg_json, "Also write the fit as JSON (usable as a predict --model)");
    };
    auto report = [&](const validation::RegressionFit& fit) {
        Sink sink(reg_out, out);
        ctx.header(*sink);
        *sink << validation::format_fit(fit);
        sink.close();
        if (!reg_json.empty()) {
            json j = validation::to_json(fit);
            j["meta"] = ctx.meta();
            Sink js(reg_json, out);
            *js << j.dump(2) << '\n';
            js.close();
        }
    };
    auto* regress = app.add_subcommand("regress", "Pooled OLS of the rating on disclosure proxies");
    add_reg_options(regress);
    regress->callback([&] {
        action = [&] {
            ctx.command = "regress";
            ctx.param("dep", reg_dep);
            ctx.param("vars", reg_vars);
            ctx.input("panel", reg_panel);
            ctx.log_run();
            const auto rows = read_panel(fs::path(reg_panel));
            report(validation::ols_fit(rows, canonical_variable(reg_dep), parse_name_list(reg_vars)));
        };
    });
    auto* eliminate = app.add_subcommand("eliminate", "Backward elimination by largest p-value");
    add_reg_options(eliminate);
    eliminate->add_option("--p-threshold", p_threshold, "Drop while the largest p exceeds this")->capture_default_str();
    eliminate->callback([&] {
        action = [&] {
            ctx.command = "eliminate";
            ctx.param("dep", reg_dep);
            ctx.param("vars", reg_vars);
            ctx.param("p_threshold", p_threshold);
            ctx.input("panel", reg_panel);
            ctx.log_run();
            const auto rows = read_panel(fs::path(reg_panel));
            report(validation::backward_eliminate(rows, canonical_variable(reg_dep), parse_name_list(reg_vars),
                                                  p_threshold));
        };
    });

    // predict
    validation::IaiInputs pred;
    std::string pred_model;
    int precision = 2;
    auto* predict = app.add_subcommand("predict", "Predicted index value from the four-variable model");
    predict->add_option("--coverage", pred.coverage, "Number of covering analysts")->required();
    predict->add_option("--vol", pred.vol, "Volatility ratio (x100)")->required();
    predict->add_option("--lnsize,--ln-size", pred.ln_size, "ln(total assets)")->required();
    predict->add_option("--qtobin", pred.qtobin, "Tobin's q")->required();
    predict->add_option("--model", pred_model, "Model JSON from regress/eliminate --json (default: built-in model)");
    predict->add_option("--precision", precision, "Decimals printed")->capture_default_str();
    predict->callback([&] {
        action = [&] {
            ctx.command = "predict";
            ctx.param("coverage", pred.coverage);
            ctx.param("vol", pred.vol);
            ctx.param("ln_size", pred.ln_size);
            ctx.param("qtobin", pred.qtobin);
            auto model = validation::PredictionModel::builtin_default();
            if (!pred_model.empty()) {
                ctx.input("model", pred_model);
                std::ifstream in(pred_model);
                try {
                    model = validation::PredictionModel::from_json(json::parse(in));
                } catch (const json::exception& e) {
                    throw ParseError(pred_model + ": " + e.what());
                }
            }
            ctx.log_run();
            const auto p = validation::predict_iai(pred, model);
            for (const auto& w : p.warnings) ctx.warn(w);
            out << std::fixed << std::setprecision(precision) << p.value << '\n';
            out.unsetf(std::ios::floatfield);
        };
    });

    std::vector<std::string> argv_store(args.begin(), args.end());
    if (argv_store.empty()) argv_store.emplace_back("iai");
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kExitUsage;
    }

    try {
        if (action) action();
        return kExitOk;
    } catch (const EstimationFailure& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        if (!e.diagnostics().empty() && !ctx.quiet) err << e.diagnostics();
        return kExitDomain;
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace iai::cli
