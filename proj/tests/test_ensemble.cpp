#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "demand/ensemble.hpp"
#include "demand/rng.hpp"

#include <cmath>
#include <limits>

using namespace demand;

namespace {

Matrix random_matrix(Index n, Index k, uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, k);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < k; ++j) x(i, j) = rng.normal();
    return x;
}

// Exhaustive search over w1 in {0, 1e-4, ..., 1} for the K=2 problem.
std::pair<double, double> grid_oracle_k2(const Matrix& p, const Vector& y) {
    double best_w = 0.0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10000; ++i) {
        const double w = i * 1e-4;
        const double obj = (y - w * p.col(0) - (1.0 - w) * p.col(1)).squaredNorm();
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
        }
    }
    return {best_w, best_obj};
}

FittedLearner const_regressor(double value) {
    FittedLearner m;
    m.family = Family::constant;
    m.task = Task::regression;
    m.column_names = {"x0"};
    m.model = ConstantModel{value};
    return m;
}

CensoredModel constant_member(double value) {
    CensoredModel m;
    m.family = Family::constant;
    m.alpha = 0.0;
    m.classifier = constant_classifier(0.0, {"x0"});
    m.regressor = const_regressor(value);
    return m;
}

}  // namespace

TEST_CASE("simplex projection basics") {
    Vector v(3);
    v << 0.2, 0.3, 0.5;  // already on the simplex
    CHECK((project_to_simplex(v) - v).lpNorm<Eigen::Infinity>() < 1e-12);

    v << 2.0, 0.0, 0.0;
    const Vector p = project_to_simplex(v);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));

    v << -5.0, -5.0, -5.0;
    const Vector q = project_to_simplex(v);
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (Index i = 0; i < 3; ++i) CHECK(q[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("single member gets weight one") {
    const Matrix p = random_matrix(20, 1, 1);
    const Vector y = random_matrix(20, 1, 2);
    const SimplexWeights w = fit_weights(p, y);
    CHECK(w.weights.size() == 1);
    CHECK(w.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("a perfect member takes essentially all the weight") {
    const Index n = 200;
    const Vector y = random_matrix(n, 1, 3);
    Matrix p(n, 2);
    p.col(0) = y;
    p.col(1) = y + random_matrix(n, 1, 4);
    const SimplexWeights w = fit_weights(p, y);
    CHECK(w.weights[0] >= 0.999);
}

TEST_CASE("K=2 solution matches the 1e-4 grid oracle") {
    const Index n = 150;
    Rng rng(5);
    Vector y(n);
    Matrix p(n, 2);
    for (Index i = 0; i < n; ++i) {
        y[i] = rng.normal(2.0, 1.0);
        p(i, 0) = y[i] + 0.8 * rng.normal();
        p(i, 1) = y[i] + 1.1 * rng.normal() + 0.3;
    }
    const SimplexWeights w = fit_weights(p, y);
    const auto [w_or, obj_or] = grid_oracle_k2(p, y);
    CHECK(std::abs(w.weights[0] - w_or) <= 2e-4);
    const double obj = (y - p * w.weights).squaredNorm();
    CHECK(obj <= obj_or * (1.0 + 1e-8) + 1e-12);
}

TEST_CASE("identical member columns give uniform weights with a flag") {
    const Index n = 50;
    const Vector base = random_matrix(n, 1, 6);
    Matrix p(n, 3);
    p.col(0) = base;
    p.col(1) = base;
    p.col(2) = base;
    const Vector y = random_matrix(n, 1, 7);
    const SimplexWeights w = fit_weights(p, y);
    CHECK(w.degenerate);
    for (Index j = 0; j < 3; ++j) CHECK(w.weights[j] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("simplex feasibility and KKT at K=4") {
    const Index n = 300;
    Rng rng(8);
    Vector y(n);
    Matrix p(n, 4);
    for (Index i = 0; i < n; ++i) {
        y[i] = rng.normal(1.0, 2.0);
        for (Index j = 0; j < 4; ++j) p(i, j) = y[i] + (0.4 + 0.3 * j) * rng.normal();
    }
    const SimplexWeights w = fit_weights(p, y);
    CHECK(w.weights.minCoeff() >= 0.0);
    CHECK(std::abs(w.weights.sum() - 1.0) <= 1e-10);

    // KKT: active coordinates share the minimal gradient component.
    const Vector grad = p.transpose() * (p * w.weights - y);
    const double gmin = grad.minCoeff();
    for (Index j = 0; j < 4; ++j)
        if (w.weights[j] > 1e-10) CHECK(std::abs(grad[j] - gmin) <= 1e-6 * std::max(1.0, std::abs(gmin)));
}

TEST_CASE("permuting members permutes the weights") {
    const Index n = 120;
    Rng rng(9);
    Vector y(n);
    Matrix p(n, 3);
    for (Index i = 0; i < n; ++i) {
        y[i] = rng.normal();
        for (Index j = 0; j < 3; ++j) p(i, j) = y[i] + (0.5 + 0.4 * j) * rng.normal();
    }
    const SimplexWeights w = fit_weights(p, y);
    Matrix q(n, 3);
    q.col(0) = p.col(2);
    q.col(1) = p.col(0);
    q.col(2) = p.col(1);
    const SimplexWeights v = fit_weights(q, y);
    CHECK(v.weights[0] == doctest::Approx(w.weights[2]).epsilon(1e-6));
    CHECK(v.weights[1] == doctest::Approx(w.weights[0]).epsilon(1e-6));
    CHECK(v.weights[2] == doctest::Approx(w.weights[1]).epsilon(1e-6));
}

TEST_CASE("ensemble predictions combine members linearly") {
    EnsembleModel m;
    m.member_names = {"a", "b", "c", "d"};
    for (double v : {0.0, 2.0, 4.0, 6.0}) m.members.push_back(constant_member(v));
    const Matrix x = Matrix::Zero(3, 1);

    SUBCASE("vertex weight reproduces one member") {
        m.weights = Vector::Zero(4);
        m.weights[1] = 1.0;
        CHECK(predict_ensemble(m, x)[0] == doctest::Approx(2.0));
    }
    SUBCASE("uniform weights average the members") {
        m.weights = Vector::Constant(4, 0.25);
        CHECK(predict_ensemble(m, x)[0] == doctest::Approx(3.0));
    }
    SUBCASE("consensus passes through") {
        EnsembleModel same;
        same.member_names = {"a", "b"};
        same.members.push_back(constant_member(1.7));
        same.members.push_back(constant_member(1.7));
        same.weights = Vector(2);
        same.weights << 0.4, 0.6;
        CHECK(predict_ensemble(same, x)[0] == doctest::Approx(1.7));
    }
}

TEST_CASE("the best-validation member usually receives the largest weight") {
    int agree = 0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(500 + static_cast<uint64_t>(rep));
        const Index n = 400;
        Vector y(n);
        Matrix p(n, 4);
        for (Index i = 0; i < n; ++i) {
            // Censored-looking target: a zero mass plus positive demand.
            const double latent = rng.normal(1.0, 2.5);
            y[i] = std::max(0.0, latent);
            for (Index j = 0; j < 4; ++j)
                p(i, j) = std::max(0.0, latent + (0.5 + 0.45 * j) * rng.normal());
        }
        const SimplexWeights w = fit_weights(p, y);
        Index best_member = 0, heaviest = 0;
        double best_rmse = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < 4; ++j) {
            const double r = std::sqrt((p.col(j) - y).squaredNorm() / n);
            if (r < best_rmse) {
                best_rmse = r;
                best_member = j;
            }
            if (w.weights[j] > w.weights[heaviest]) heaviest = j;
        }
        if (best_member == heaviest) ++agree;
    }
    CHECK(agree >= 16);  // >= 80% of 20 seeded runs
}

TEST_CASE("fit_ensemble dominates the best member on the validation set") {
    const Index n = 250;
    Rng rng(10);
    Matrix x(n, 1);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        y[i] = std::max(0.0, 1.5 + x(i, 0) + 0.8 * rng.normal());
    }
    std::vector<CensoredModel> members;
    std::vector<std::string> member_names;
    for (double v : {0.4, 1.1, 1.9}) {
        members.push_back(constant_member(v));
        member_names.push_back("m" + std::to_string(member_names.size()));
    }
    const EnsembleModel ens = fit_ensemble(members, member_names, x, y);
    const double ens_rmse = std::sqrt((predict_ensemble(ens, x) - y).squaredNorm() / n);
    double best_member = std::numeric_limits<double>::infinity();
    for (double r : ens.validation_rmse) best_member = std::min(best_member, r);
    CHECK(ens_rmse <= best_member + 1e-9);
    CHECK(ens.weights.minCoeff() >= 0.0);
    CHECK(std::abs(ens.weights.sum() - 1.0) <= 1e-10);
}
