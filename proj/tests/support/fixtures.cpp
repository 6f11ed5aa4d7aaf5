#include "fixtures.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace iai::testing {

std::vector<double> naive_ols(const std::vector<double>& y, const std::vector<double>& x, std::size_t p) {
    const std::size_t n = y.size();
    const std::size_t m = p + 1;
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(m);
        row[0] = 1.0;
        for (std::size_t j = 0; j < p; ++j) row[j + 1] = x[i * p + j];
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) a[r][c] += row[r] * row[c];
            a[r][m] += row[r] * y[i];
        }
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        std::swap(a[col], a[piv]);
        if (a[col][col] == 0.0) throw std::runtime_error("singular normal equations");
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> beta(m);
    for (std::size_t r = 0; r < m; ++r) beta[r] = a[r][m] / a[r][r];
    return beta;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Column order of the latent draw.
enum Var { kCov, kErr, kVol, kQ, kBaa, kLnVol, kLnSize, kFf, kNumVars };

constexpr double kMeans[kNumVars] = {10.55263, -0.2411871, 40.67281, 1.572493,
                                     0.2063833, 16.24797, 23.26457, 58.24518};
constexpr double kSds[kNumVars] = {4.799973, 0.7308159, 19.03582, 1.142273,
                                   0.2282664, 2.100477, 1.565775, 25.95821};
// Lower triangle, same variable order.
constexpr double kCorr[kNumVars][kNumVars] = {
    {1.0000, 0, 0, 0, 0, 0, 0, 0},
    {0.2286, 1.0000, 0, 0, 0, 0, 0, 0},
    {-0.1402, -0.1192, 1.0000, 0, 0, 0, 0, 0},
    {0.0224, 0.0650, -0.0316, 1.0000, 0, 0, 0, 0},
    {-0.4138, 0.0378, 0.2763, -0.0951, 1.0000, 0, 0, 0},
    {0.2731, -0.1316, -0.1056, 0.0996, -0.3727, 1.0000, 0, 0},
    {0.1623, -0.0229, -0.1262, -0.3494, -0.3445, 0.3658, 1.0000, 0},
    {0.1827, -0.0311, 0.0027, -0.1705, -0.1637, 0.0610, -0.1808, 1.0000},
};

MatrixXd with_intercept(const MatrixXd& x) {
    MatrixXd out(x.rows(), x.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(x.cols()) = x;
    return out;
}

// Component of `v` orthogonal to the column space of `x`.
VectorXd residualize(const MatrixXd& x, const VectorXd& v) {
    return v - x * x.colPivHouseholderQr().solve(v);
}

}  // namespace

std::vector<FirmPanelRow> make_elimination_panel(std::uint64_t seed) {
    constexpr int kFirms = 114;
    constexpr int kWaves = 3;
    constexpr int kRows = kFirms * kWaves;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);

    MatrixXd corr(kNumVars, kNumVars);
    for (int i = 0; i < kNumVars; ++i) {
        for (int j = 0; j <= i; ++j) corr(i, j) = corr(j, i) = kCorr[i][j];
    }
    const MatrixXd chol = corr.llt().matrixL();

    MatrixXd raw(kRows, kNumVars);
    for (int r = 0; r < kRows; ++r) {
        VectorXd draw(kNumVars);
        for (int v = 0; v < kNumVars; ++v) draw(v) = z(rng);
        const VectorXd c = chol * draw;
        for (int v = 0; v < kNumVars; ++v) raw(r, v) = kMeans[v] + kSds[v] * c(v);
        raw(r, kCov) = std::clamp(std::round(raw(r, kCov)), 0.0, 21.0);
        raw(r, kVol) = std::max(raw(r, kVol), 1.67);
        raw(r, kQ) = std::max(raw(r, kQ), 0.5829);
        raw(r, kBaa) = std::max(raw(r, kBaa), 0.0444);
        raw(r, kFf) = std::clamp(raw(r, kFf), 4.05, 100.0);
    }

    // Rows 0..173 carry `error`; qtobin is missing in rows 5, 200 and 300.
    auto has_error = [](int r) { return r < 174; };
    auto has_q = [](int r) { return r != 5 && r != 200 && r != 300; };

    std::vector<int> full_rows, other_rows;
    for (int r = 0; r < kRows; ++r) {
        if (!has_q(r)) continue;
        (has_error(r) ? full_rows : other_rows).push_back(r);
    }

    auto design = [&](const std::vector<int>& rows, const std::vector<Var>& vars) {
        MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(vars.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < vars.size(); ++j) x(i, j) = raw(rows[i], vars[j]);
        }
        return with_intercept(x);
    };
    auto noise = [&](Eigen::Index n) {
        VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = z(rng);
        return v;
    };
    // Coefficients giving t-statistics `t` when the residual sum of squares is `ssr`.
    auto coefs_for = [](const MatrixXd& x, const std::vector<double>& t, double ssr) {
        const double s2 = ssr / static_cast<double>(x.rows() - x.cols());
        const MatrixXd inv = (x.transpose() * x).inverse();
        VectorXd b(x.cols());
        b(0) = 0.0;
        for (Eigen::Index j = 1; j < x.cols(); ++j) {
            b(j) = t[static_cast<std::size_t>(j - 1)] * std::sqrt(s2 * inv(j, j));
        }
        return b;
    };

    VectorXd y(kRows);
    y.setConstant(std::nan(""));

    // Stage one: the full model on the 173-row sample.
    const std::vector<Var> full_vars{kCov, kErr, kVol, kBaa, kLnVol, kLnSize, kFf, kQ};
    const std::vector<double> full_t{1.733812 / 1.338451, -7.955356 / 8.111772, -1.037437 / .3450925,
                                     1.896637 / 47.35702, 4.566208 / 3.150041,  19.69807 / 4.307993,
                                     -.031324 / .2295619, 17.37489 / 4.988945};
    const double full_ssr = 854821.585;
    const MatrixXd x1 = design(full_rows, full_vars);
    VectorXd b1 = coefs_for(x1, full_t, full_ssr);
    VectorXd r1 = residualize(x1, noise(x1.rows()));
    r1 *= std::sqrt(full_ssr / r1.squaredNorm());
    b1(0) = 1505.064 - (x1 * b1).mean();
    const VectorXd y1 = x1 * b1 + r1;
    for (std::size_t i = 0; i < full_rows.size(); ++i) y(full_rows[i]) = y1(static_cast<Eigen::Index>(i));

    // Stage two: the error-free five-regressor model on all 339 complete rows.
    // Pick the remaining rows' residuals so the pooled residual vector is
    // orthogonal to the design and has the requested norm.
    const std::vector<Var> reduced_vars{kCov, kVol, kLnVol, kLnSize, kQ};
    const std::vector<double> reduced_t{2.68, -4.12, 1.45, 7.54, 6.54};
    std::vector<int> pooled = full_rows;
    pooled.insert(pooled.end(), other_rows.begin(), other_rows.end());
    const MatrixXd xp = design(pooled, reduced_vars);
    const MatrixXd xa = design(full_rows, reduced_vars);
    const MatrixXd xb = design(other_rows, reduced_vars);

    double ssr = 1579557.04;
    VectorXd b2, ra, eb;
    for (int attempt = 0; attempt < 8; ++attempt, ssr *= 1.5) {
        b2 = coefs_for(xp, reduced_t, ssr);
        b2(0) = 0.0;
        ra = y1 - xa * b2;
        b2(0) = ra.mean();  // absorb the level so the intercept column balances
        ra = y1 - xa * b2;
        const VectorXd g = xa.transpose() * ra;
        eb = -xb * (xb.transpose() * xb).ldlt().solve(g);
        const double used = ra.squaredNorm() + eb.squaredNorm();
        if (used >= ssr) continue;
        VectorXd extra = residualize(xb, noise(xb.rows()));
        extra *= std::sqrt((ssr - used) / extra.squaredNorm());
        eb += extra;
        break;
    }
    const VectorXd yb = xb * b2 + eb;
    for (std::size_t i = 0; i < other_rows.size(); ++i) y(other_rows[i]) = yb(static_cast<Eigen::Index>(i));

    // Rows without qtobin get the reduced model's systematic part plus noise.
    std::normal_distribution<double> eps(0.0, std::sqrt(ssr / 333.0));
    for (int r = 0; r < kRows; ++r) {
        if (has_q(r)) continue;
        double v = b2(0);
        for (std::size_t j = 0; j < reduced_vars.size(); ++j) v += b2(j + 1) * raw(r, reduced_vars[j]);
        y(r) = v + eps(rng);
    }

    std::vector<FirmPanelRow> rows;
    rows.reserve(kRows);
    const char* waves[kWaves] = {"wave2", "wave3", "wave4"};
    for (int r = 0; r < kRows; ++r) {
        FirmPanelRow row;
        row.firm_id = "F" + std::to_string(1000 + r % kFirms);
        row.wave = waves[r / kFirms];
        row.ranking = y(r);
        row.coverage = raw(r, kCov);
        if (has_error(r)) row.error = raw(r, kErr);
        row.vol = raw(r, kVol);
        row.baa = raw(r, kBaa);
        row.ln_volume = raw(r, kLnVol);
        row.ln_size = raw(r, kLnSize);
        row.ff = raw(r, kFf);
        if (has_q(r)) row.qtobin = raw(r, kQ);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace iai::testing

namespace iai::testing {

void write_market_files(const std::filesystem::path& dir, const std::vector<elo::Firm>& firms,
                        const std::vector<elo::WaveCut>& waves, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    const Date first = std::chrono::floor<std::chrono::days>(waves.front().cutoff) - std::chrono::days(400);
    const Date last = std::chrono::floor<std::chrono::days>(waves.back().cutoff) + std::chrono::days(5);
    std::vector<Date> days;
    for (Date d = first; d <= last; d += std::chrono::days(1)) {
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) days.push_back(d);
    }

    std::vector<double> index_ret(days.size());
    for (auto& r : index_ret) r = 0.012 * z(rng);

    std::ofstream index(dir / "index.csv"), prices(dir / "prices.csv"), trades(dir / "trades.csv");
    index.precision(12);
    prices.precision(12);
    index << "date,close\n";
    double level = 60000.0;
    for (std::size_t t = 0; t < days.size(); ++t) {
        level *= std::exp(index_ret[t]);
        index << format_date(days[t]) << ',' << level << '\n';
    }

    prices << "firm_id,date,close,bid,ask,volume\n";
    trades << "firm_id,date,buys,sells\n";
    std::ofstream fundamentals(dir / "fundamentals.csv"), coverage(dir / "coverage.csv"),
        earnings(dir / "earnings.csv");
    fundamentals.precision(12);
    earnings.precision(12);
    fundamentals << "firm_id,wave,market_cap,total_liabilities,total_assets,free_float_pct\n";
    coverage << "firm_id,wave,analyst_count\n";
    earnings << "firm_id,announce_date,actual_eps,median_forecast_eps\n";

    for (const auto& f : firms) {
        const double beta = 0.5 + u(rng);
        const double idio = 0.005 + 0.02 * u(rng);
        const double spread = 0.001 + 0.02 * u(rng);
        const double volume = std::exp(12.0 + 2.0 * z(rng));
        const double assets = std::exp(21.0 + 1.5 * z(rng));
        double price = 5.0 + 40.0 * u(rng);
        std::poisson_distribution<int> uninformed(20.0 + 30.0 * u(rng));
        std::poisson_distribution<int> informed(15.0);
        for (std::size_t t = 0; t < days.size(); ++t) {
            price *= std::exp(beta * index_ret[t] + idio * z(rng));
            prices << f.id << ',' << format_date(days[t]) << ',' << price << ',' << price * (1 - spread / 2) << ','
                   << price * (1 + spread / 2) << ',' << std::round(volume * std::exp(0.3 * z(rng))) << '\n';
            const bool event = u(rng) < 0.3;
            const bool good = u(rng) < 0.5;
            trades << f.id << ',' << format_date(days[t]) << ',' << uninformed(rng) + (event && good ? informed(rng) : 0)
                   << ',' << uninformed(rng) + (event && !good ? informed(rng) : 0) << '\n';
        }
        for (const auto& w : waves) {
            const double q = 0.8 + 2.0 * u(rng);
            const double liabilities = assets * (0.3 + 0.4 * u(rng));
            fundamentals << f.id << ',' << w.name << ',' << q * assets - liabilities << ',' << liabilities << ','
                         << assets << ',' << 10.0 + 90.0 * u(rng) << '\n';
            coverage << f.id << ',' << w.name << ',' << static_cast<int>(20 * u(rng)) << '\n';
            const Date announce = std::chrono::floor<std::chrono::days>(w.cutoff) - std::chrono::days(20);
            const double actual = 0.5 + u(rng);
            earnings << f.id << ',' << format_date(announce) << ',' << actual << ',';
            if (u(rng) < 0.5) earnings << actual + 0.1 * z(rng);
            earnings << '\n';
        }
    }
}

}  // namespace iai::testing
