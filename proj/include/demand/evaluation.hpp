#pragma once

#include "demand/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace demand {

double rmse(const Eigen::Ref<const Vector>& predicted, const Eigen::Ref<const Vector>& actual);

struct BootstrapResult {
    int replications = 0;
    Vector draws;
    double point = 0.0;
    double se = 0.0;       // sample standard deviation of the draws
    double t = 0.0;        // point / se; NaN when degenerate
    double p_value = 0.0;  // two-sided normal; NaN means not available
};

// Panel bootstrap of RMSE(a) - RMSE(b): each replication resamples SKU
// identities with replacement and keeps all rows of each drawn SKU,
// counted with multiplicity. The point estimate is computed on the
// original rows. Deterministic in seed.
BootstrapResult bootstrap_rmse_diff(const Eigen::Ref<const Vector>& pred_a,
                                    const Eigen::Ref<const Vector>& pred_b,
                                    const Eigen::Ref<const Vector>& actual,
                                    const std::vector<std::string>& sku_of_row, int replications,
                                    uint64_t seed);

struct MarginalEffectEstimate {
    double mean_effect = 0.0;
    double standard_error = 0.0;  // std of the per-replication effects
    int replications = 0;
    std::pair<double, double> perturbation_range{0.01, 1.0};
    Vector draws;
};

using Predictor = std::function<Vector(const Matrix&)>;

// Mean marginal effect of the standardized log price by finite
// perturbation: each replication draws a SKU panel bootstrap and a step
// delta ~ U[range] (in standard deviations of the standardized column,
// added directly to it), and averages (f(X + delta e_col) - f(X)) / delta
// over the resampled rows.
MarginalEffectEstimate marginal_effect(const Predictor& predict, const Matrix& X, Index price_col,
                                       const std::vector<std::string>& sku_of_row,
                                       int replications, uint64_t seed,
                                       std::pair<double, double> range = {0.01, 1.0});

// Panel-bootstrap standard error of an OLS coefficient, via per-SKU
// sufficient statistics (one normal-equations solve per replication).
struct CoefficientEstimate {
    double value = 0.0;
    double se = 0.0;
};
CoefficientEstimate bootstrap_ols_coef(const Eigen::Ref<const Matrix>& X,
                                       const Eigen::Ref<const Vector>& y,
                                       const std::vector<std::string>& sku_of_row, Index coef_col,
                                       int replications, uint64_t seed);

// Per-family evaluation summary feeding the report tables.
struct FamilyEval {
    std::string family;
    double alpha = 0.0;  // selected threshold of the censored pipeline
    double rmse_train_censored = 0.0, rmse_val_censored = 0.0, rmse_test_censored = 0.0;
    double rmse_train_uncensored = 0.0, rmse_val_uncensored = 0.0, rmse_test_uncensored = 0.0;
    double weight_censored = 0.0, weight_uncensored = 0.0;
    MarginalEffectEstimate effect_censored, effect_uncensored;
};

struct EvalReport {
    std::vector<FamilyEval> families;
    bool has_ensemble = false;
    double ensemble_rmse_val_censored = 0.0, ensemble_rmse_test_censored = 0.0;
    double ensemble_rmse_val_uncensored = 0.0, ensemble_rmse_test_uncensored = 0.0;
    MarginalEffectEstimate ensemble_effect_censored, ensemble_effect_uncensored;
    BootstrapResult ensemble_diff;  // RMSE(uncensored) - RMSE(censored) on test
    bool has_ols_coefficients = false;
    CoefficientEstimate price_coef_uncensored, price_coef_censored;  // OLS family
};

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);
std::string render_report_text(const EvalReport& report);

}  // namespace demand
