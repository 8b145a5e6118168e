#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "demand/dgp.hpp"
#include "demand/stats.hpp"

#include <cmath>
#include <numeric>

using namespace demand;

namespace {

std::vector<Index> all_rows(Index n) {
    std::vector<Index> v(static_cast<size_t>(n));
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

// Quadrature oracle for P(m + eps > 0) = integral of the normal density
// over (-m/sd, inf), by Simpson's rule on [-8, 8] standard deviations.
double prob_positive_quadrature(double m, double sd) {
    const double lo = std::clamp(-m / sd, -8.0, 8.0);
    const double hi = 8.0;
    const int steps = 4000;  // even
    const double h = (hi - lo) / steps;
    double acc = normal_pdf(lo) + normal_pdf(hi);
    for (int i = 1; i < steps; ++i) acc += normal_pdf(lo + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;  // tail mass beyond 8 sd is negligible
}

}  // namespace

TEST_CASE("degenerate noise with explicit intercept yields constant sales") {
    DgpConfig config;
    config.n = 200;
    config.beta_price = 0.0;
    config.beta_other = std::vector<double>{};  // all zeros
    config.noise_sd = 1e-9;
    config.intercept = 3.4;
    config.seed = 2;
    auto [ds, truth] = generate(config);
    for (const auto& o : ds.rows) CHECK(o.sales == 3);
    CHECK(truth.achieved_zero_fraction == 0.0);
}

TEST_CASE("zero-fraction target is hit on the default-scale fixture") {
    DgpConfig config;
    config.n = 20000;
    config.seed = 3;
    config.interactions = default_interactions();
    auto [ds, truth] = generate(config);
    CHECK(truth.achieved_zero_fraction >= 0.57);
    CHECK(truth.achieved_zero_fraction <= 0.63);
    Index zeros = 0;
    for (const auto& o : ds.rows) zeros += o.sales == 0 ? 1 : 0;
    CHECK(static_cast<double>(zeros) / static_cast<double>(config.n) ==
          doctest::Approx(truth.achieved_zero_fraction));
}

TEST_CASE("generation is byte-identical for a fixed seed") {
    DgpConfig config;
    config.n = 500;
    config.seed = 11;
    auto [a, ta] = generate(config);
    auto [b, tb] = generate(config);
    CHECK(dataset_to_csv(a) == dataset_to_csv(b));
    CHECK(ta.intercept == tb.intercept);
    CHECK((ta.beta - tb.beta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("different seeds keep identical vocabularies") {
    DgpConfig config;
    config.n = 300;
    config.seed = 1;
    auto [a, ta] = generate(config);
    config.seed = 2;
    auto [b, tb] = generate(config);
    CHECK(a.vocab == b.vocab);
}

TEST_CASE("an unreachable zero-fraction target is reported as infeasible") {
    // With 10 rows the empirical quantile can only realize multiples of
    // 0.1, so a 0.55 target misses by 0.05 > 0.03.
    DgpConfig config;
    config.n = 10;
    config.beta_price = 0.0;
    config.beta_other = std::vector<double>{};  // all zeros
    config.noise_sd = 1e-9;
    config.target_zero_fraction = 0.55;
    config.seed = 4;
    CHECK_THROWS_AS(generate(config), std::runtime_error);
}

TEST_CASE("interactions touching the price column are rejected") {
    DgpConfig config;
    config.n = 300;
    config.interactions = {{"log_price", "weight", 1.0}};
    CHECK_THROWS_AS(generate(config), std::invalid_argument);
}

TEST_CASE("true marginal effect: zero coefficient, uncensored limit, censored attenuation") {
    DgpConfig config;
    config.n = 3000;
    config.seed = 21;

    SUBCASE("zero price coefficient gives a zero effect") {
        config.beta_price = 0.0;
        auto [ds, truth] = generate(config);
        const auto est = true_marginal_effect(truth, all_rows(config.n), 50, 5);
        CHECK(est.value == 0.0);
        CHECK(est.se == 0.0);
    }

    SUBCASE("deep in the uncensored region the effect is the latent slope") {
        config.beta_price = -1.5;
        config.intercept = 200.0;  // censoring never binds
        config.noise_sd = 2.0;
        auto [ds, truth] = generate(config);
        const auto est = true_marginal_effect(truth, all_rows(config.n), 50, 5);
        CHECK(std::abs(est.value - config.beta_price) <= std::max(2.0 * est.se, 1e-9));
    }

    SUBCASE("at 60% censoring the effect is strictly between 0 and beta_price") {
        config.beta_price = -2.5;
        auto [ds, truth] = generate(config);
        const auto est = true_marginal_effect(truth, all_rows(config.n), 200, 5);
        CHECK(std::abs(est.value) > 0.0);
        CHECK(std::abs(est.value) < std::abs(config.beta_price));

        // Independent quadrature oracle: beta * mean of P(m_i + eps > 0).
        double acc = 0.0;
        for (Index i = 0; i < config.n; ++i)
            acc += prob_positive_quadrature(truth.latent_mean[i], truth.noise_sd);
        const double oracle = config.beta_price * acc / static_cast<double>(config.n);
        CHECK(std::abs(est.value - oracle) <= std::max(3.0 * est.se, 1e-6));
    }
}

TEST_CASE("oracle effect magnitude is monotone in the price coefficient") {
    DgpConfig config;
    config.n = 4000;
    config.seed = 31;
    double prev = 0.0;
    for (double beta : {-0.5, -1.5, -3.0}) {
        config.beta_price = beta;
        auto [ds, truth] = generate(config);
        const auto est = true_marginal_effect(truth, all_rows(config.n), 100, 7);
        CHECK(std::abs(est.value) >= prev - 3.0 * est.se);
        prev = std::abs(est.value);
    }
}

TEST_CASE("ground truth round-trips through JSON") {
    DgpConfig config;
    config.n = 120;
    config.seed = 9;
    config.interactions = default_interactions();
    auto [ds, truth] = generate(config);
    const std::string path = "/tmp/demand_test_ground_truth.json";
    save_ground_truth(truth, path);
    const GroundTruth loaded = load_ground_truth(path);
    CHECK(loaded.intercept == truth.intercept);
    CHECK(loaded.noise_sd == truth.noise_sd);
    CHECK((loaded.beta - truth.beta).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((loaded.latent_mean - truth.latent_mean).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(loaded.column_names == truth.column_names);
}
