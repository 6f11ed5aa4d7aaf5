#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iai/panel.h"

namespace iai::validation {

struct Term {
    std::string name;
    double coef = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;   // 95% interval
    double ci_high = 0.0;
};

struct EliminationStep {
    std::string dropped;
    double p_value = 0.0;
    std::size_t n_obs = 0;  // observations in the fit that justified the drop
};

// Pooled OLS with an intercept and homoskedastic standard errors.
struct RegressionFit {
    std::string dependent;
    std::vector<Term> terms;  // regressors in the requested order
    Term intercept;           // reported as "_cons"
    std::size_t n_obs = 0;
    double ss_model = 0.0;
    double ss_residual = 0.0;
    double ss_total = 0.0;
    double df_model = 0.0;
    double df_residual = 0.0;
    double f_stat = 0.0;
    double f_p_value = 1.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double rmse = 0.0;
    std::vector<std::string> dropped_order;
    std::vector<EliminationStep> steps;

    const Term& term(const std::string& name) const;
    bool has_term(const std::string& name) const;
    std::map<std::string, double> coefficients() const;
    std::map<std::string, double> std_errors() const;
    std::map<std::string, double> t_stats() const;
    std::map<std::string, double> p_values() const;
};

// Core solver on a ready design. `x` is row-major, n rows by names.size()
// columns, without the intercept column (added internally).
// Throws CollinearityError naming the offending columns, DomainError when n <= p + 1.
RegressionFit ols(std::span<const double> y, std::span<const double> x,
                  const std::vector<std::string>& names, const std::string& dependent = "y");

// Listwise deletion over the dependent and every regressor, then ols().
RegressionFit ols_fit(std::span<const FirmPanelRow> rows, const std::string& dependent,
                      const std::vector<std::string>& regressors);

// Repeatedly drops the regressor with the largest p-value while it exceeds
// `p_threshold` (ties alphabetical), recomputing listwise deletion after every
// drop. Throws DegenerateModel when every regressor would be removed.
RegressionFit backward_eliminate(std::span<const FirmPanelRow> rows, const std::string& dependent,
                                 const std::vector<std::string>& regressors,
                                 double p_threshold = 0.05);

// Aligned text table: analysis-of-variance block plus the coefficient table.
std::string format_fit(const RegressionFit& fit);

nlohmann::json to_json(const RegressionFit& fit);

struct PredictionModel {
    double intercept = 0.0;
    std::map<std::string, double> coefficients;

    // Final four-variable model over coverage, vol, ln_size and qtobin.
    static PredictionModel builtin_default();
    static PredictionModel from_fit(const RegressionFit& fit);
    static PredictionModel from_json(const nlohmann::json& j);
};

struct IaiInputs {
    double coverage = 0.0;
    double vol = 0.0;
    double ln_size = 0.0;
    double qtobin = 0.0;
};

struct Prediction {
    double value = 0.0;
    std::vector<std::string> warnings;  // inputs outside the reference sample range
};

// intercept + sum(coef * x). Every model variable must be present in `values`.
double predict(const PredictionModel& model, const std::map<std::string, double>& values);

Prediction predict_iai(const IaiInputs& inputs,
                       const PredictionModel& model = PredictionModel::builtin_default());

}  // namespace iai::validation
