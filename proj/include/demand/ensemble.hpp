#pragma once

#include "demand/censored.hpp"
#include "demand/types.hpp"

#include <string>
#include <vector>

namespace demand {

// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Eigen::Ref<const Vector>& v);

struct SimplexWeights {
    Vector weights;
    double objective = 0.0;  // 0.5 * ||y - P w||^2 at the solution
    int iterations = 0;
    bool degenerate = false;  // all columns of P identical -> uniform weights
};

// min over the simplex of ||y - P w||^2, by projected gradient with step
// 1/L, L estimated by power iteration on P'P. Stops when the objective
// has decreased by less than 1e-12 for 50 consecutive steps, or after
// 100000 iterations.
SimplexWeights fit_weights(const Eigen::Ref<const Matrix>& P, const Eigen::Ref<const Vector>& y);

struct EnsembleModel {
    std::vector<std::string> member_names;  // file references, fit order
    std::vector<CensoredModel> members;
    Vector weights;
    std::vector<double> validation_rmse;  // per member, same order
    bool degenerate_weights = false;

    Vector predict(const Eigen::Ref<const Matrix>& X) const;
};

EnsembleModel fit_ensemble(std::vector<CensoredModel> members, std::vector<std::string> names,
                           const Eigen::Ref<const Matrix>& X_val,
                           const Eigen::Ref<const Vector>& y_val);

Vector predict_ensemble(const EnsembleModel& model, const Eigen::Ref<const Matrix>& X);

// The ensemble file stores member references, weights and the validation
// RMSE table; members are loaded from their own files next to it.
void save_ensemble(const EnsembleModel& model, const std::string& path);
EnsembleModel load_ensemble(const std::string& path, const std::string& member_dir);

}  // namespace demand
