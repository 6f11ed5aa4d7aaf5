#include "iai/regression.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "iai/errors.h"

namespace iai::validation {

namespace {

constexpr const char* kIntercept = "_cons";

struct SampleRange {
    const char* name;
    double lo;
    double hi;
};

// Min/max of the reference sample the default model was estimated on.
constexpr SampleRange kReferenceRanges[] = {
    {"coverage", 0.0, 21.0},
    {"vol", 1.67, 145.593},
    {"ln_size", 19.10888, 28.05268},
    {"qtobin", 0.5829, 11.2332},
};

double two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

const Term& RegressionFit::term(const std::string& name) const {
    if (name == kIntercept) return intercept;
    for (const auto& t : terms) {
        if (t.name == name) return t;
    }
    throw DomainError("fit has no term '" + name + "'");
}

bool RegressionFit::has_term(const std::string& name) const {
    return std::any_of(terms.begin(), terms.end(), [&](const Term& t) { return t.name == name; });
}

#define IAI_TERM_MAP(method, field)                                   \
    std::map<std::string, double> RegressionFit::method() const {     \
        std::map<std::string, double> m{{kIntercept, intercept.field}}; \
        for (const auto& t : terms) m[t.name] = t.field;              \
        return m;                                                     \
    }
IAI_TERM_MAP(coefficients, coef)
IAI_TERM_MAP(std_errors, std_error)
IAI_TERM_MAP(t_stats, t_stat)
IAI_TERM_MAP(p_values, p_value)
#undef IAI_TERM_MAP

RegressionFit ols(std::span<const double> y, std::span<const double> x,
                  const std::vector<std::string>& names, const std::string& dependent) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const auto p = static_cast<Eigen::Index>(names.size());
    if (static_cast<std::size_t>(n * p) != x.size()) {
        throw ContractViolation("design size does not match n x p");
    }
    if (n <= p + 1) {
        throw DomainError("OLS needs more observations (" + std::to_string(n) +
                          ") than coefficients (" + std::to_string(p + 1) + ")");
    }

    Eigen::MatrixXd X(n, p + 1);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) X(i, j + 1) = x[static_cast<std::size_t>(i * p + j)];
        Y(i) = y[static_cast<std::size_t>(i)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p + 1) {
        // Columns carrying weight in any null-space direction of the design.
        Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
        lu.setThreshold(1e-10);
        const Eigen::MatrixXd kernel = lu.kernel();
        std::string offending;
        for (Eigen::Index j = 0; j < p + 1; ++j) {
            if (kernel.row(j).cwiseAbs().maxCoeff() <= 1e-8) continue;
            if (!offending.empty()) offending += ", ";
            offending += j == 0 ? std::string(kIntercept) : names[static_cast<std::size_t>(j - 1)];
        }
        throw CollinearityError("design matrix is rank deficient; linearly dependent column(s): " +
                                offending);
    }

    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd resid = Y - X * beta;

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd R =
        qr.matrixR().topLeftCorner(p + 1, p + 1).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
    const Eigen::MatrixXd P = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = P * (Rinv * Rinv.transpose()) * P.transpose();

    RegressionFit fit;
    fit.dependent = dependent;
    fit.n_obs = static_cast<std::size_t>(n);
    fit.df_model = static_cast<double>(p);
    fit.df_residual = static_cast<double>(n - p - 1);
    fit.ss_residual = resid.squaredNorm();
    fit.ss_total = (Y.array() - Y.mean()).matrix().squaredNorm();
    fit.ss_model = fit.ss_total - fit.ss_residual;
    const double sigma2 = fit.ss_residual / fit.df_residual;
    fit.rmse = std::sqrt(sigma2);
    fit.r2 = fit.ss_total > 0 ? std::clamp(1.0 - fit.ss_residual / fit.ss_total, 0.0, 1.0) : 1.0;
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) / fit.df_residual;
    if (p > 0 && fit.ss_residual > 0) {
        fit.f_stat = (fit.ss_model / fit.df_model) / sigma2;
        boost::math::fisher_f fdist(fit.df_model, fit.df_residual);
        fit.f_p_value = boost::math::cdf(boost::math::complement(fdist, std::max(fit.f_stat, 0.0)));
    } else if (p > 0) {
        fit.f_stat = std::numeric_limits<double>::infinity();
        fit.f_p_value = 0.0;
    }

    boost::math::students_t tdist(fit.df_residual);
    const double tcrit = boost::math::quantile(boost::math::complement(tdist, 0.025));
    auto make_term = [&](const std::string& name, Eigen::Index j) {
        Term t;
        t.name = name;
        t.coef = beta(j);
        t.std_error = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
        t.t_stat = t.std_error > 0 ? t.coef / t.std_error
                                   : (t.coef == 0 ? 0.0 : std::copysign(INFINITY, t.coef));
        t.p_value = two_sided_p(t.t_stat, fit.df_residual);
        t.ci_low = t.coef - tcrit * t.std_error;
        t.ci_high = t.coef + tcrit * t.std_error;
        return t;
    };
    fit.intercept = make_term(kIntercept, 0);
    for (Eigen::Index j = 0; j < p; ++j) {
        fit.terms.push_back(make_term(names[static_cast<std::size_t>(j)], j + 1));
    }
    return fit;
}

RegressionFit ols_fit(std::span<const FirmPanelRow> rows, const std::string& dependent,
                      const std::vector<std::string>& regressors) {
    const std::string dep = canonical_variable(dependent);
    std::vector<std::string> names;
    for (const auto& r : regressors) {
        auto c = canonical_variable(r);
        if (c == dep) throw DomainError("dependent variable '" + dep + "' listed as a regressor");
        if (std::find(names.begin(), names.end(), c) != names.end()) {
            throw DomainError("regressor '" + c + "' listed twice");
        }
        names.push_back(std::move(c));
    }
    std::vector<double> y, x;
    for (const auto& row : rows) {
        auto yv = panel_value(row, dep);
        if (!yv) continue;
        std::vector<double> xs;
        bool complete = true;
        for (const auto& n : names) {
            auto v = panel_value(row, n);
            if (!v) {
                complete = false;
                break;
            }
            xs.push_back(*v);
        }
        if (!complete) continue;
        y.push_back(*yv);
        x.insert(x.end(), xs.begin(), xs.end());
    }
    return ols(y, x, names, dep);
}

RegressionFit backward_eliminate(std::span<const FirmPanelRow> rows, const std::string& dependent,
                                 const std::vector<std::string>& regressors, double p_threshold) {
    std::vector<std::string> current;
    for (const auto& r : regressors) current.push_back(canonical_variable(r));
    std::vector<EliminationStep> steps;
    while (true) {
        RegressionFit fit = ols_fit(rows, dependent, current);
        const Term* worst = nullptr;
        for (const auto& t : fit.terms) {
            if (!worst || t.p_value > worst->p_value ||
                (t.p_value == worst->p_value && t.name < worst->name)) {
                worst = &t;
            }
        }
        if (!worst || worst->p_value <= p_threshold) {
            fit.steps = std::move(steps);
            for (const auto& s : fit.steps) fit.dropped_order.push_back(s.dropped);
            return fit;
        }
        if (current.size() == 1) {
            throw DegenerateModel("backward elimination removed every regressor (last: '" +
                                  worst->name + "', p = " + fmt("%.4f", worst->p_value) + ")");
        }
        steps.push_back({worst->name, worst->p_value, fit.n_obs});
        current.erase(std::find(current.begin(), current.end(), worst->name));
    }
}

std::string format_fit(const RegressionFit& fit) {
    std::ostringstream out;
    char line[256];
    const double ms_model = fit.df_model > 0 ? fit.ss_model / fit.df_model : 0.0;
    const double ms_resid = fit.ss_residual / fit.df_residual;
    const double df_total = fit.df_model + fit.df_residual;
    std::snprintf(line, sizeof line, "%12s | %14s %6s %14s   Number of obs = %9zu\n", "Source", "SS",
                  "df", "MS", fit.n_obs);
    out << line;
    out << std::string(13, '-') << '+' << std::string(37, '-') << "   F(" << fit.df_model << ", "
        << fit.df_residual << ")" << std::string(6, ' ') << "= " << fmt("%9.2f", fit.f_stat) << '\n';
    std::snprintf(line, sizeof line, "%12s | %14.6f %6.0f %14.6f   Prob > F      = %9.4f\n", "Model",
                  fit.ss_model, fit.df_model, ms_model, fit.f_p_value);
    out << line;
    std::snprintf(line, sizeof line, "%12s | %14.6f %6.0f %14.6f   R-squared     = %9.4f\n",
                  "Residual", fit.ss_residual, fit.df_residual, ms_resid, fit.r2);
    out << line;
    out << std::string(13, '-') << '+' << std::string(37, '-') << "   Adj R-squared = "
        << fmt("%9.4f", fit.adj_r2) << '\n';
    std::snprintf(line, sizeof line, "%12s | %14.6f %6.0f %14.6f   Root MSE      = %9.4f\n\n",
                  "Total", fit.ss_total, df_total, fit.ss_total / df_total, fit.rmse);
    out << line;

    std::snprintf(line, sizeof line, "%12s | %12s %12s %8s %8s   %s\n", fit.dependent.c_str(), "Coef.",
                  "Std. Err.", "t", "P>|t|", "[95% Conf. Interval]");
    out << line << std::string(13, '-') << '+' << std::string(72, '-') << '\n';
    auto row = [&](const Term& t) {
        std::snprintf(line, sizeof line, "%12s | %12.7g %12.7g %8.2f %8.3f   %12.7g %12.7g\n",
                      t.name.c_str(), t.coef, t.std_error, t.t_stat, t.p_value, t.ci_low, t.ci_high);
        out << line;
    };
    for (const auto& t : fit.terms) row(t);
    row(fit.intercept);
    if (!fit.steps.empty()) {
        out << "\nEliminated (largest p first):\n";
        for (const auto& s : fit.steps) {
            std::snprintf(line, sizeof line, "  %-12s p = %.4f  (n = %zu)\n", s.dropped.c_str(),
                          s.p_value, s.n_obs);
            out << line;
        }
    }
    return out.str();
}

nlohmann::json to_json(const RegressionFit& fit) {
    auto term_json = [](const Term& t) {
        return nlohmann::json{{"name", t.name},       {"coef", t.coef},       {"std_error", t.std_error},
                              {"t", t.t_stat},        {"p_value", t.p_value}, {"ci_low", t.ci_low},
                              {"ci_high", t.ci_high}};
    };
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : fit.terms) terms.push_back(term_json(t));
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : fit.steps) {
        steps.push_back({{"dropped", s.dropped}, {"p_value", s.p_value}, {"n_obs", s.n_obs}});
    }
    return {{"dependent", fit.dependent},
            {"intercept", term_json(fit.intercept)},
            {"terms", terms},
            {"n_obs", fit.n_obs},
            {"ss_model", fit.ss_model},
            {"ss_residual", fit.ss_residual},
            {"ss_total", fit.ss_total},
            {"df_model", fit.df_model},
            {"df_residual", fit.df_residual},
            {"f", fit.f_stat},
            {"f_p_value", fit.f_p_value},
            {"r2", fit.r2},
            {"adj_r2", fit.adj_r2},
            {"rmse", fit.rmse},
            {"dropped_order", fit.dropped_order},
            {"elimination", steps}};
}

PredictionModel PredictionModel::builtin_default() {
    return {1012.343,
            {{"coverage", 2.23952}, {"vol", -0.8197953}, {"ln_size", 20.01405}, {"qtobin", 23.09268}}};
}

PredictionModel PredictionModel::from_fit(const RegressionFit& fit) {
    PredictionModel m;
    m.intercept = fit.intercept.coef;
    for (const auto& t : fit.terms) m.coefficients[t.name] = t.coef;
    return m;
}

PredictionModel PredictionModel::from_json(const nlohmann::json& j) {
    PredictionModel m;
    m.intercept = j.at("intercept").at("coef").get<double>();
    for (const auto& t : j.at("terms")) {
        m.coefficients[canonical_variable(t.at("name").get<std::string>())] = t.at("coef").get<double>();
    }
    return m;
}

double predict(const PredictionModel& model, const std::map<std::string, double>& values) {
    double y = model.intercept;
    for (const auto& [name, coef] : model.coefficients) {
        auto it = values.find(name);
        if (it == values.end()) {
            throw ContractViolation("prediction input missing for model variable '" + name + "'");
        }
        y += coef * it->second;
    }
    return y;
}

Prediction predict_iai(const IaiInputs& in, const PredictionModel& model) {
    const std::map<std::string, double> values{
        {"coverage", in.coverage}, {"vol", in.vol}, {"ln_size", in.ln_size}, {"qtobin", in.qtobin}};
    Prediction out;
    out.value = predict(model, values);
    for (const auto& r : kReferenceRanges) {
        const double v = values.at(r.name);
        if (v < r.lo || v > r.hi) {
            out.warnings.push_back(std::string(r.name) + " = " + fmt("%g", v) +
                                   " is outside the reference sample range [" + fmt("%g", r.lo) +
                                   ", " + fmt("%g", r.hi) + "]");
        }
    }
    return out;
}

}  // namespace iai::validation
