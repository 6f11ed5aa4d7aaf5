#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iai/cli.h"
#include "iai/elo_io.h"
#include "iai/pin.h"
#include "iai/synthetic.h"
#include "support/fixtures.h"

using namespace iai;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "iai");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct Workspace {
    fs::path dir;
    synthetic::SyntheticLog log;
    std::vector<elo::WaveCut> waves;

    Workspace() : dir(fs::temp_directory_path() / "iai_cli_ws") {
        fs::remove_all(dir);
        fs::create_directories(dir);
        log = synthetic::make_latent_order_log({.n_firms = 30, .votes_per_wave = 600, .waves = 3});
        {
            std::ofstream v(dir / "votes.csv");
            elo::write_votes(v, log.votes);
            std::ofstream f(dir / "firms.csv");
            f << elo::kFirmHeader << '\n';
            for (const auto& firm : log.firms) f << firm.id << ',' << firm.ticker << ',' << firm.name << ",,\n";
            std::ofstream w(dir / "waves.csv");
            w << "name,cutoff\n";
            for (std::size_t i = 0; i < log.wave_cutoffs.size(); ++i) {
                waves.push_back({"w" + std::to_string(i + 1), log.wave_cutoffs[i]});
                w << waves.back().name << ',' << format_timestamp(log.wave_cutoffs[i]) << '\n';
            }
        }
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage and exit codes") {
    CHECK(call({}).code == cli::kExitUsage);
    CHECK(call({"nonsense"}).code == cli::kExitUsage);
    CHECK(call({"predict", "--coverage", "1"}).code == cli::kExitUsage);
    CHECK(call({"replay", "--votes", "x.csv", "--unknown-flag"}).code == cli::kExitUsage);
    auto help = call({"--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("sweep-k") != std::string::npos);
    auto sub_help = call({"pin-estimate", "--help"});
    CHECK(sub_help.code == cli::kExitOk);
    CHECK(sub_help.out.find("firm_id,date,buys,sells") != std::string::npos);

    auto missing = call({"replay", "--votes", "/nonexistent/votes.csv"});
    CHECK(missing.code == cli::kExitDomain);
    CHECK(missing.err.find("error: contract_violation") != std::string::npos);
}

TEST_CASE("predict") {
    auto r = call({"-q", "predict", "--coverage", "10.55263", "--vol", "40.67281", "--lnsize", "23.26457", "--qtobin",
                   "1.572493"});
    CHECK(r.code == 0);
    CHECK(r.out == "1504.56\n");
    CHECK(r.err.empty());
    auto logged = call({"predict", "--coverage", "0", "--vol", "0", "--lnsize", "0", "--qtobin", "0"});
    CHECK(logged.out == "1012.34\n");
    CHECK(logged.err.find("[iai] iai") != std::string::npos);
    CHECK(logged.err.find("warning") != std::string::npos);
}

TEST_CASE("replay, snapshot, spearman and sweep-k") {
    Workspace ws;
    auto a = call({"replay", "--votes", ws.path("votes.csv"), "--firms", ws.path("firms.csv"), "--k", "24", "--out",
                   ws.path("r1.csv")});
    REQUIRE(a.code == 0);
    CHECK(a.err.find("sha256=") != std::string::npos);
    auto b = call({"replay", "--votes", ws.path("votes.csv"), "--firms", ws.path("firms.csv"), "--k", "24", "--out",
                   ws.path("r2.csv")});
    REQUIRE(b.code == 0);
    const auto r1 = slurp(ws.path("r1.csv"));
    CHECK(r1 == slurp(ws.path("r2.csv")));
    CHECK(r1.rfind("# iai ", 0) == 0);

    auto state = elo::replay(ws.log.votes, elo::EloConfig{});
    const auto expected = elo::snapshot_ranking(state);
    const auto rows = elo::read_ranking(ws.path("r1.csv"));
    REQUIRE(rows.size() == expected.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].firm_id == expected[i].firm_id);
        CHECK(rows[i].rating == doctest::Approx(expected[i].rating).epsilon(1e-9));
        CHECK(rows[i].ticker == "T" + rows[i].firm_id.substr(1));
    }

    auto cut = call({"-q", "replay", "--votes", ws.path("votes.csv"), "--cutoff", format_timestamp(ws.waves[0].cutoff)});
    REQUIRE(cut.code == 0);
    auto prefix = elo::snapshot_ranking(elo::replay(ws.log.votes, elo::EloConfig{}, ws.waves[0].cutoff));
    CHECK(cut.out.find(prefix.front().firm_id + ",," + elo::format_rating(prefix.front().rating)) !=
          std::string::npos);

    auto snap = call({"-q", "snapshot", "--votes", ws.path("votes.csv"), "--firms", ws.path("firms.csv"), "--waves",
                      ws.path("waves.csv"), "--out-dir", ws.path("snaps")});
    REQUIRE(snap.code == 0);
    for (const char* w : {"w1", "w2", "w3"}) CHECK(fs::exists(ws.dir / "snaps" / (std::string("ranking_") + w + ".csv")));
    CHECK(slurp(ws.dir / "snaps" / "ranking_w3.csv").find(elo::format_rating(expected.front().rating)) !=
          std::string::npos);

    auto same = call({"-q", "spearman", ws.path("r1.csv"), ws.path("r2.csv")});
    CHECK(same.code == 0);
    CHECK(same.out == "1\n");
    auto waves12 = call({"-q", "spearman", (ws.dir / "snaps" / "ranking_w1.csv").string(),
                         (ws.dir / "snaps" / "ranking_w3.csv").string()});
    CHECK(waves12.code == 0);
    CHECK(std::stod(waves12.out) > 0.9);

    auto sweep = call({"-q", "sweep-k", "--votes", ws.path("votes.csv"), "--k", "16,24,36,64,80", "--cutoffs",
                       ws.path("waves.csv"), "--json", ws.path("sweep.json")});
    REQUIRE(sweep.code == 0);
    CHECK(sweep.out.find("k = 80") != std::string::npos);
    CHECK(sweep.out.find("recommended k = ") != std::string::npos);
    const auto j = json::parse(slurp(ws.path("sweep.json")));
    CHECK(j["k_values"].size() == 5);
    for (const auto& row : j["consecutive"]) {
        for (double rho : row) CHECK(rho > 0.8);
    }
    CHECK(j["generator"].get<std::string>().rfind("iai", 0) == 0);

    auto bad_k = call({"-q", "sweep-k", "--votes", ws.path("votes.csv"), "--k", "16,-1", "--cutoffs",
                       ws.path("waves.csv")});
    CHECK(bad_k.code == cli::kExitDomain);
}

TEST_CASE("pin-simulate then pin-estimate") {
    Workspace ws;
    auto sim = call({"-q", "--seed", "7", "pin-simulate", "--days", "250", "--out", ws.path("trades.csv")});
    REQUIRE(sim.code == 0);
    auto sim2 = call({"-q", "pin-simulate", "--seed", "7", "--days", "250", "--out", ws.path("trades2.csv")});
    REQUIRE(sim2.code == 0);
    CHECK(slurp(ws.path("trades.csv")) == slurp(ws.path("trades2.csv")));
    const auto trades = pin::read_trades(ws.path("trades.csv"));
    REQUIRE(trades.at("F000").size() == 250);

    auto est = call({"-q", "pin-estimate", "--trades", ws.path("trades.csv"), "--window", "0", "--out",
                     ws.path("pin.json")});
    REQUIRE(est.code == 0);
    const auto doc = json::parse(slurp(ws.path("pin.json")));
    REQUIRE(doc["fits"].size() == 1);
    const auto& fit = doc["fits"][0];
    for (const char* key : {"firm_id", "mu", "eps_b", "eps_s", "alpha", "delta", "pin", "loglik", "converged",
                            "starts_tried"}) {
        CHECK(fit.contains(key));
    }
    CHECK(fit.size() == 10);
    CHECK(std::abs(fit["pin"].get<double>() - 24.0 / 104.0) < 0.05);
    CHECK(fit["starts_tried"] == 9);

    auto none = call({"-q", "pin-estimate", "--trades", ws.path("trades.csv"), "--firm", "ZZZ"});
    CHECK(none.code == cli::kExitDomain);
    CHECK(call({"-q", "pin-simulate", "--alpha", "1.5"}).code == cli::kExitDomain);
}

TEST_CASE("panel, regress, eliminate and predict with a fitted model") {
    Workspace ws;
    testing::write_market_files(ws.dir / "market", ws.log.firms, ws.waves);
    const auto m = [&](const char* f) { return (ws.dir / "market" / f).string(); };
    auto panel = call({"-q", "panel", "--votes", ws.path("votes.csv"), "--firms", ws.path("firms.csv"), "--waves",
                       ws.path("waves.csv"), "--prices", m("prices.csv"), "--index", m("index.csv"),
                       "--fundamentals", m("fundamentals.csv"), "--coverage", m("coverage.csv"), "--earnings",
                       m("earnings.csv"), "--trades", m("trades.csv"), "--out", ws.path("panel.csv")});
    INFO(panel.err);
    REQUIRE(panel.code == 0);
    const auto text = slurp(ws.path("panel.csv"));
    CHECK(text.find("# vol: ") != std::string::npos);
    const auto rows = read_panel(fs::path(ws.path("panel.csv")));
    REQUIRE(rows.size() == 90);
    std::size_t with_error = 0;
    for (const auto& r : rows) {
        CHECK(r.vol.has_value());
        CHECK(r.baa.has_value());
        CHECK(r.pin.has_value());
        CHECK(r.qtobin.has_value());
        with_error += r.error.has_value();
    }
    CHECK(with_error > 0);
    CHECK(with_error < rows.size());

    auto reg = call({"-q", "regress", "--panel", ws.path("panel.csv"), "--vars", "coverage,vol,lnsize,qtobin",
                     "--json", ws.path("fit.json")});
    REQUIRE(reg.code == 0);
    CHECK(reg.out.find("_cons") != std::string::npos);
    CHECK(reg.out.find("ln_size") != std::string::npos);

    auto elim = call({"-q", "eliminate", "--panel", ws.path("panel.csv"), "--vars",
                      "coverage,vol,baa,ln_volume,ln_size,ff,qtobin,pin", "--p-threshold", "0.999999"});
    CHECK(elim.code == 0);

    auto pred = call({"-q", "predict", "--coverage", "5", "--vol", "100", "--lnsize", "21", "--qtobin", "1.5",
                      "--model", ws.path("fit.json"), "--precision", "6"});
    REQUIRE(pred.code == 0);
    const auto fit = json::parse(slurp(ws.path("fit.json")));
    CHECK(fit.contains("meta"));
    double expected = fit["intercept"]["coef"].get<double>();
    const std::map<std::string, double> x{{"coverage", 5}, {"vol", 100}, {"ln_size", 21}, {"qtobin", 1.5}};
    for (const auto& t : fit["terms"]) expected += t["coef"].get<double>() * x.at(t["name"].get<std::string>());
    CHECK(std::stod(pred.out) == doctest::Approx(expected).epsilon(1e-9));

    auto collinear = call({"-q", "regress", "--panel", ws.path("panel.csv"), "--vars", "coverage,coverage"});
    CHECK(collinear.code == cli::kExitDomain);
    auto unknown_var = call({"-q", "regress", "--panel", ws.path("panel.csv"), "--vars", "coverage,bogus"});
    CHECK(unknown_var.code == cli::kExitDomain);
}
