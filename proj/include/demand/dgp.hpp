#pragma once

#include "demand/dataset.hpp"
#include "demand/design.hpp"
#include "demand/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace demand {

// Product of two standardized design columns added to the latent index.
// Linear learners never see these columns; the forest can pick them up.
struct Interaction {
    std::string col_a;
    std::string col_b;
    double coef = 0.0;
};

struct DgpConfig {
    Index n = 20000;
    int n_skus = 200;
    int n_stores = 10;
    int n_days = 1826;  // five calendar years from 2009-01-01
    double beta_price = -2.5;
    // Coefficients for the remaining design columns (everything except
    // log_price, in design column order). nullopt = drawn from the seed
    // with the documented default scales; an empty vector means all zeros.
    std::optional<std::vector<double>> beta_other;
    double noise_sd = 4.5;  // default puts the latent R^2 near 0.5
    double target_zero_fraction = 0.6;
    // When set, the intercept is taken as given and the zero-fraction
    // target is ignored.
    std::optional<double> intercept;
    std::vector<Interaction> interactions;
    double promo_rate = 0.15;
    double holiday_rate = 0.08;
    // Share of brands whose dummies get a strong negative default
    // coefficient (structural zeros), and the size of that effect.
    // Ignored when beta_other is given explicitly.
    double dead_brand_share = 0.45;
    double dead_brand_effect = 1.4;
    // Multiplier on the default-drawn coefficients (price excluded). The
    // zero threshold sits at 0.5 packs because sales are integer, so a
    // larger latent scale makes the rounding kink relatively smaller.
    double beta_scale = 1.0;
    uint64_t seed = 1;
};

struct GroundTruth {
    std::vector<std::string> column_names;  // generator design layout
    Vector beta;                            // aligned with column_names
    double intercept = 0.0;
    double noise_sd = 1.0;
    double achieved_zero_fraction = 0.0;
    std::vector<Interaction> interactions;
    Vector latent_mean;  // intercept + Z beta + interactions, per row
    uint64_t seed = 0;
};

// Latent-linear censored generator: sales = round(max(0, m + eps)) with
// eps ~ Normal(0, noise_sd^2). The intercept is solved on the realized
// sample so the zero share hits the target. Deterministic in seed.
std::pair<Dataset, GroundTruth> generate(const DgpConfig& config);

// Default interaction set used when the caller asks for one.
std::vector<Interaction> default_interactions();

struct MonteCarloEstimate {
    double value = 0.0;
    double se = 0.0;  // Monte Carlo standard error of the estimate
    int replications = 0;
};

// Ground-truth mean marginal effect of the standardized log price on
// E[max(0, m + eps)], averaged over the given rows: Monte Carlo average of
// beta_price * 1{m + eps > 0}.
MonteCarloEstimate true_marginal_effect(const GroundTruth& truth, const std::vector<Index>& rows,
                                        int replications, uint64_t seed);

void save_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace demand
