#pragma once

#include "demand/forest.hpp"
#include "demand/linear.hpp"
#include "demand/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace demand {

enum class Family { ols, ridge, lasso, random_forest, constant };
enum class Task { regression, classification };

std::string to_string(Family f);
std::string to_string(Task t);
Family family_from_string(const std::string& s);
Task task_from_string(const std::string& s);

struct LearnerSpec {
    Family family = Family::ols;
    Task task = Task::regression;

    // Ridge/lasso: explicit grid, or a default path of lambda_count
    // log-spaced values from lambda_max down to lambda_min_ratio*lambda_max.
    std::vector<double> lambda_grid;
    int lambda_count = 100;
    double lambda_min_ratio = 1e-4;
    int folds = 10;

    // Random forest.
    int ntree = 50;
    std::optional<int> mtry;  // nullopt = choose by cross-validation
    int nodesize = 5;
    int max_nodes = 0;  // 0 = unbounded
    std::vector<int> mtry_candidates;

    uint64_t seed = 0;
};

struct LinearModel {
    Vector coef;
    double intercept = 0.0;
    double lambda = 0.0;  // 0 for OLS / plain logistic
    std::vector<CvPoint> cv_profile;
};

struct ForestModel {
    Forest forest;
    int mtry = 0;
};

struct ConstantModel {
    double value = 0.0;
};

struct FittedLearner {
    Family family = Family::constant;
    Task task = Task::regression;
    std::vector<std::string> column_names;
    uint64_t seed = 0;
    std::variant<LinearModel, ForestModel, ConstantModel> model = ConstantModel{};

    Index n_columns() const { return static_cast<Index>(column_names.size()); }
    // Pure and deterministic; classification outputs lie in [0, 1].
    Vector predict(const Eigen::Ref<const Matrix>& X) const;
};

FittedLearner fit_learner(const LearnerSpec& spec, const Eigen::Ref<const Matrix>& X,
                          const Eigen::Ref<const Vector>& y,
                          const std::vector<std::string>& column_names);
FittedLearner fit_classifier(const LearnerSpec& spec, const Eigen::Ref<const Matrix>& X,
                             const Eigen::Ref<const IntVector>& d,
                             const std::vector<std::string>& column_names);
FittedLearner constant_classifier(double value, const std::vector<std::string>& column_names);

void save_learner(const FittedLearner& model, const std::string& path);
FittedLearner load_learner(const std::string& path);
std::string learner_to_json(const FittedLearner& model);
FittedLearner learner_from_json(const std::string& text);

}  // namespace demand
