#pragma once

#include "demand/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace demand {

// Raw least squares, min ||y - X b||^2, solved by Householder QR.
// Throws on rank deficiency; callers deal in full-rank designs.
Vector ols_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y);

struct CvPoint {
    double lambda;
    double cv_rmse;
};

// Linear model with an unpenalized intercept.
struct LinearFit {
    Vector coef;
    double intercept = 0.0;
    double lambda = 0.0;
    std::vector<CvPoint> cv_profile;
};

// Ridge: min ||y - b0 - X b||^2 + lambda ||b||^2, intercept unpenalized.
LinearFit ridge_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                    double lambda);
LinearFit ridge_cv(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                   const std::vector<double>& lambda_grid, int folds, uint64_t seed);

// Lasso: min (1/2n) ||y - b0 - X b||^2 + lambda ||b||_1 by cyclic
// coordinate descent with warm starts along a decreasing lambda path.
struct LassoPathPoint {
    double lambda;
    Vector coef;
    double intercept;
};
std::vector<LassoPathPoint> lasso_path(const Eigen::Ref<const Matrix>& X,
                                       const Eigen::Ref<const Vector>& y,
                                       const std::vector<double>& lambdas);
LinearFit lasso_cv(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                   const std::vector<double>& lambda_grid, int folds, uint64_t seed);

double lasso_objective(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Vector>& coef, double intercept, double lambda);
// Largest KKT violation of the stationarity conditions at (coef, intercept).
double lasso_kkt_violation(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                           const Eigen::Ref<const Vector>& coef, double intercept, double lambda);

// Smallest lambda that zeroes every slope; anchor of the default grid.
double lasso_lambda_max(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y);
std::vector<double> log_spaced_grid(double hi, double lo, int count);

// Unpenalized logistic regression via iteratively reweighted least squares.
LinearFit logistic_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const IntVector>& d);

// Penalized logistic fits: NLL + (lambda/2)||b||^2 (ridge) and
// (1/n) NLL + lambda ||b||_1 (lasso), both by quadratic majorization of
// the logistic Hessian. Lambda chosen by the same fold protocol.
LinearFit logistic_ridge_cv(const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const IntVector>& d,
                            const std::vector<double>& lambda_grid, int folds, uint64_t seed);
LinearFit logistic_lasso_cv(const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const IntVector>& d,
                            const std::vector<double>& lambda_grid, int folds, uint64_t seed);

double logistic_lasso_lambda_max(const Eigen::Ref<const Matrix>& X,
                                 const Eigen::Ref<const IntVector>& d);

// Deterministic fold assignment: shuffled round-robin, values in [0, folds).
std::vector<int> fold_assignment(Index n, int folds, uint64_t seed);

}  // namespace demand
