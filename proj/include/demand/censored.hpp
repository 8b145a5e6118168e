#pragma once

#include "demand/learner.hpp"
#include "demand/types.hpp"

#include <string>
#include <vector>

namespace demand {

struct AlphaProfileEntry {
    double alpha = 0.0;
    double rmse = 0.0;            // validation RMSE of the combined prediction
    Index n_uncensored_train = 0; // rows the continuous-part regressor saw
    bool skipped = false;
};

// Two-stage censorship-aware model: a censorship-probability classifier, a
// threshold alpha, and a continuous-part regressor trained on the rows not
// classified censored. Predictions are zero whenever the classifier
// probability exceeds alpha or the regressor output is negative.
struct CensoredModel {
    Family family = Family::ols;
    FittedLearner classifier;
    FittedLearner regressor;
    double alpha = 0.0;
    std::vector<AlphaProfileEntry> alpha_profile;

    Vector predict(const Eigen::Ref<const Matrix>& X) const;
};

// Row i is flagged censored iff predicted probability > alpha (strict).
IntVector classify_rows(const FittedLearner& classifier, const Eigen::Ref<const Matrix>& X,
                        double alpha);

Vector predict_censored(const CensoredModel& model, const Eigen::Ref<const Matrix>& X);

// Fits the classifier once on (X_train, 1{y_train = 0}), then scans the
// alpha grid: each alpha refits the family regressor on the rows not
// flagged at that alpha and scores the combined prediction on the
// validation set. Returns the model at the RMSE-minimizing alpha (ties go
// to the smaller alpha). Alphas leaving fewer than 2k usable rows, or a
// rank-deficient OLS subset, are skipped with a warning.
CensoredModel fit_censored(const Eigen::Ref<const Matrix>& X_train,
                           const Eigen::Ref<const Vector>& y_train,
                           const Eigen::Ref<const Matrix>& X_val,
                           const Eigen::Ref<const Vector>& y_val, const LearnerSpec& spec,
                           const std::vector<double>& alpha_grid,
                           const std::vector<std::string>& column_names);

// Baseline that treats every observation as uncensored: a constant-0
// classifier with alpha = 0, regressor trained on all rows; the
// combination rule then reduces to max(0, regression output).
CensoredModel fit_uncensored(const Eigen::Ref<const Matrix>& X_train,
                             const Eigen::Ref<const Vector>& y_train, const LearnerSpec& spec,
                             const std::vector<std::string>& column_names);

std::vector<double> default_alpha_grid();  // 0.05, 0.10, ..., 0.95, 1.0

void save_censored(const CensoredModel& model, const std::string& path);
CensoredModel load_censored(const std::string& path);

}  // namespace demand
