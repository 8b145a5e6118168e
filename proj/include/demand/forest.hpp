#pragma once

#include "demand/types.hpp"

#include <cstdint>
#include <vector>

namespace demand {

// Flat tree storage; feature == -1 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct ForestOptions {
    int ntree = 50;
    int mtry = 0;        // must be set to a value in [1, k] before fitting
    int nodesize = 5;    // nodes this small or smaller become leaves
    int max_nodes = 0;   // 0 = unbounded
    bool classification = false;
    uint64_t seed = 0;
};

struct Forest {
    ForestOptions opts;
    std::vector<Tree> trees;
    // In-bag draw counts per tree, kept from fitting; not serialized.
    std::vector<std::vector<uint16_t>> inbag;

    Vector predict(const Eigen::Ref<const Matrix>& X) const;
};

// Bagged trees: each tree sees a bootstrap resample; splits scan mtry
// features sampled without replacement, thresholds at midpoints of
// consecutive distinct values, least-squares split criterion (for binary
// targets this coincides with the Gini criterion). Regression leaves carry
// the mean, classification leaves the majority vote; a classification
// forest therefore predicts the vote share. Deterministic in opts.seed.
Forest forest_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                  const ForestOptions& opts);

// Out-of-bag predictions; rows never out of bag yield NaN.
Vector forest_oob_predictions(const Forest& forest, const Eigen::Ref<const Matrix>& X);
double forest_oob_rmse(const Forest& forest, const Eigen::Ref<const Matrix>& X,
                       const Eigen::Ref<const Vector>& y);

// k-fold cross-validated choice among candidate mtry values; ties go to
// the smaller candidate. Empty candidate list means the geometric ladder
// k, k/2, k/4, ..., 1.
int select_mtry(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                const ForestOptions& opts, std::vector<int> candidates, int folds, uint64_t seed);

}  // namespace demand
