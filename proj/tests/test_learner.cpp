#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "demand/learner.hpp"
#include "demand/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace demand;

namespace {

std::vector<std::string> names(Index k) {
    std::vector<std::string> out;
    for (Index j = 0; j < k; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

struct Fixture {
    Matrix x;
    Vector y;
    IntVector d;
};

Fixture make_fixture(Index n, Index k, uint64_t seed) {
    Rng rng(seed);
    Fixture f;
    f.x.resize(n, k);
    f.y.resize(n);
    f.d.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < k; ++j) f.x(i, j) = rng.normal();
        const double eta = 1.5 * f.x(i, 0) - f.x(i, 1) + 0.5 * f.x(i, 2) * f.x(i, 3);
        f.y[i] = eta + 0.7 * rng.normal();
        f.d[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1 : 0;
    }
    return f;
}

LearnerSpec light_spec(Family family, uint64_t seed) {
    LearnerSpec spec;
    spec.family = family;
    spec.folds = 3;
    spec.lambda_count = 8;
    spec.lambda_min_ratio = 1e-3;
    spec.ntree = 10;
    spec.mtry = 2;
    spec.nodesize = 5;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("serialized models reproduce in-memory predictions exactly") {
    const Fixture f = make_fixture(150, 5, 3);
    const auto cols = names(5);
    const std::string dir = std::filesystem::temp_directory_path().string();
    for (Family family : {Family::ols, Family::ridge, Family::lasso, Family::random_forest}) {
        const FittedLearner reg = fit_learner(light_spec(family, 7), f.x, f.y, cols);
        const std::string path = dir + "/demand_test_model_" + to_string(family) + ".json";
        save_learner(reg, path);
        const FittedLearner loaded = load_learner(path);
        CHECK((reg.predict(f.x) - loaded.predict(f.x)).lpNorm<Eigen::Infinity>() == 0.0);
        std::filesystem::remove(path);

        const FittedLearner cls = fit_classifier(light_spec(family, 7), f.x, f.d, cols);
        const Vector p = cls.predict(f.x);
        for (Index i = 0; i < p.size(); ++i) {
            CHECK(p[i] >= 0.0);
            CHECK(p[i] <= 1.0);
        }
    }
}

TEST_CASE("prediction is pure: identical rows get identical outputs") {
    const Fixture f = make_fixture(100, 4, 5);
    const auto cols = names(4);
    Matrix two(2, 4);
    two.row(0) = f.x.row(3);
    two.row(1) = f.x.row(3);
    for (Family family : {Family::ols, Family::lasso, Family::random_forest}) {
        const FittedLearner m = fit_learner(light_spec(family, 11), f.x, f.y, cols);
        const Vector p = m.predict(two);
        CHECK(p[0] == p[1]);
    }
}

TEST_CASE("column mismatch is rejected") {
    const Fixture f = make_fixture(60, 3, 9);
    const FittedLearner m = fit_learner(light_spec(Family::ols, 1), f.x, f.y, names(3));
    const Matrix wrong = Matrix::Zero(5, 4);
    CHECK_THROWS_AS(m.predict(wrong), std::invalid_argument);
}

TEST_CASE("constant classifier predicts its value everywhere") {
    const FittedLearner c = constant_classifier(0.0, names(2));
    const Vector p = c.predict(Matrix::Random(7, 2));
    for (Index i = 0; i < 7; ++i) CHECK(p[i] == 0.0);
}

TEST_CASE("corrupt model files are reported by name") {
    const std::string path =
        std::filesystem::temp_directory_path().string() + "/demand_corrupt_model.json";
    std::FILE* out = std::fopen(path.c_str(), "w");
    std::fputs("{ not json", out);
    std::fclose(out);
    try {
        load_learner(path);
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("train RMSE does not exceed test RMSE on average, for every family") {
    const Index n_train = 160, n_test = 160, k = 5;
    const int reps = 20;
    for (Family family : {Family::ols, Family::ridge, Family::lasso, Family::random_forest}) {
        double train_acc = 0.0, test_acc = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            const Fixture tr = make_fixture(n_train, k, 1000 + static_cast<uint64_t>(rep));
            const Fixture te = make_fixture(n_test, k, 5000 + static_cast<uint64_t>(rep));
            const FittedLearner m =
                fit_learner(light_spec(family, 42 + static_cast<uint64_t>(rep)), tr.x, tr.y,
                            names(k));
            train_acc += std::sqrt((m.predict(tr.x) - tr.y).squaredNorm() / n_train);
            test_acc += std::sqrt((m.predict(te.x) - te.y).squaredNorm() / n_test);
        }
        INFO("family ", to_string(family));
        CHECK(train_acc / reps <= test_acc / reps);
    }
}
