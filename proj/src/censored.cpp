#include "demand/censored.hpp"

#include "demand/rng.hpp"
#include "demand/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace demand {

using ordered_json = nlohmann::ordered_json;

namespace {

// One regressor seed shared across the alpha grid and the uncensored
// baseline, so alpha = 1 reproduces the uncensored fit exactly.
uint64_t regressor_seed(const LearnerSpec& spec) { return mix_seed(spec.seed, 0xc0411); }
uint64_t classifier_seed(const LearnerSpec& spec) { return mix_seed(spec.seed, 0xc1a55); }

IntVector censorship_indicator(const Eigen::Ref<const Vector>& y) {
    IntVector d(y.size());
    for (Index i = 0; i < y.size(); ++i) d[i] = y[i] == 0.0 ? 1 : 0;
    return d;
}

double validation_rmse(const Vector& pred, const Eigen::Ref<const Vector>& actual) {
    return std::sqrt((pred - actual).squaredNorm() / static_cast<double>(actual.size()));
}

// OLS on a classified-uncensored subset can lose rank when a dummy level
// drops out of the subset. Rebuild locally: refit on the independent
// columns and embed zero coefficients for the rest, keeping the full
// column layout for prediction.
FittedLearner fit_subset_regressor(const LearnerSpec& spec, const Matrix& x, const Vector& y,
                                   const std::vector<std::string>& columns) {
    try {
        return fit_learner(spec, x, y, columns);
    } catch (const std::runtime_error&) {
        if (spec.family != Family::ols) throw;
    }
    const Index m = x.rows();
    const Index k = x.cols();
    const Vector col_mean = x.colwise().mean().transpose();
    Matrix q(m, k);
    Index rank = 0;
    std::vector<Index> kept;
    for (Index j = 0; j < k; ++j) {
        Vector v = (x.col(j).array() - col_mean[j]).matrix();
        const double orig = v.norm();
        if (orig <= 1e-10 * std::sqrt(static_cast<double>(m))) continue;  // subset-constant
        for (int pass = 0; pass < 2; ++pass)
            if (rank > 0) v.noalias() -= q.leftCols(rank) * (q.leftCols(rank).transpose() * v);
        if (v.norm() <= 1e-10 * orig) continue;
        q.col(rank++) = v / v.norm();
        kept.push_back(j);
    }
    if (kept.empty()) throw std::runtime_error("fit_censored: subset design has no usable columns");

    Matrix xr(m, static_cast<Index>(kept.size()));
    std::vector<std::string> names;
    for (size_t c = 0; c < kept.size(); ++c) {
        xr.col(static_cast<Index>(c)) = x.col(kept[c]);
        names.push_back(columns[static_cast<size_t>(kept[c])]);
    }
    FittedLearner reduced = fit_learner(spec, xr, y, names);
    const auto& lm = std::get<LinearModel>(reduced.model);
    Vector coef = Vector::Zero(k);
    for (size_t c = 0; c < kept.size(); ++c) coef[kept[c]] = lm.coef[static_cast<Index>(c)];
    FittedLearner full = reduced;
    full.column_names = columns;
    full.model = LinearModel{std::move(coef), lm.intercept, lm.lambda, lm.cv_profile};
    return full;
}

}  // namespace

IntVector classify_rows(const FittedLearner& classifier, const Eigen::Ref<const Matrix>& X,
                        double alpha) {
    if (classifier.task != Task::classification)
        throw std::invalid_argument("classify_rows: classifier must be a probability model");
    const Vector p = classifier.predict(X);
    IntVector flags(p.size());
    for (Index i = 0; i < p.size(); ++i) flags[i] = p[i] > alpha ? 1 : 0;
    return flags;
}

Vector predict_censored(const CensoredModel& model, const Eigen::Ref<const Matrix>& X) {
    const Vector p = model.classifier.predict(X);
    const Vector reg = model.regressor.predict(X);
    Vector out(X.rows());
    for (Index i = 0; i < out.size(); ++i)
        out[i] = (p[i] > model.alpha || reg[i] < 0.0) ? 0.0 : reg[i];
    return out;
}

Vector CensoredModel::predict(const Eigen::Ref<const Matrix>& X) const {
    return predict_censored(*this, X);
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
    grid.push_back(1.0);
    return grid;
}

CensoredModel fit_censored(const Eigen::Ref<const Matrix>& X_train,
                           const Eigen::Ref<const Vector>& y_train,
                           const Eigen::Ref<const Matrix>& X_val,
                           const Eigen::Ref<const Vector>& y_val, const LearnerSpec& spec,
                           const std::vector<double>& alpha_grid,
                           const std::vector<std::string>& column_names) {
    if (alpha_grid.empty()) throw std::invalid_argument("fit_censored: empty alpha grid");
    for (double a : alpha_grid)
        if (a < 0.0 || a > 1.0)
            throw std::invalid_argument("fit_censored: alpha grid values must lie in [0,1]");

    const IntVector d_train = censorship_indicator(y_train);
    if (d_train.sum() == 0 || d_train.sum() == d_train.size())
        throw std::invalid_argument(
            "fit_censored: training rows must contain both censored and uncensored observations");

    LearnerSpec cls_spec = spec;
    cls_spec.task = Task::classification;
    cls_spec.seed = classifier_seed(spec);
    FittedLearner classifier = fit_classifier(cls_spec, X_train, d_train, column_names);

    const Vector p_train = classifier.predict(X_train);
    const Vector p_val = classifier.predict(X_val);

    std::vector<double> grid = alpha_grid;
    std::sort(grid.begin(), grid.end());

    LearnerSpec reg_spec = spec;
    reg_spec.task = Task::regression;
    reg_spec.seed = regressor_seed(spec);

    CensoredModel best;
    best.family = spec.family;
    best.classifier = classifier;
    double best_rmse = std::numeric_limits<double>::infinity();
    bool have_best = false;

    const Index k = X_train.cols();
    for (double alpha : grid) {
        AlphaProfileEntry entry;
        entry.alpha = alpha;

        std::vector<Index> keep;
        for (Index i = 0; i < p_train.size(); ++i)
            if (!(p_train[i] > alpha)) keep.push_back(i);
        entry.n_uncensored_train = static_cast<Index>(keep.size());

        if (entry.n_uncensored_train < 2 * k) {
            std::cerr << "fit_censored: alpha=" << alpha << " leaves "
                      << entry.n_uncensored_train << " uncensored rows (< 2k), skipping\n";
            entry.skipped = true;
            best.alpha_profile.push_back(entry);
            continue;
        }

        FittedLearner regressor;
        try {
            regressor = fit_subset_regressor(reg_spec, take_rows(X_train, keep),
                                             take_rows(y_train, keep), column_names);
        } catch (const std::runtime_error& e) {
            std::cerr << "fit_censored: alpha=" << alpha << " skipped (" << e.what() << ")\n";
            entry.skipped = true;
            best.alpha_profile.push_back(entry);
            continue;
        }

        const Vector reg_val = regressor.predict(X_val);
        Vector combined(reg_val.size());
        for (Index i = 0; i < combined.size(); ++i)
            combined[i] = (p_val[i] > alpha || reg_val[i] < 0.0) ? 0.0 : reg_val[i];
        entry.rmse = validation_rmse(combined, y_val);
        best.alpha_profile.push_back(entry);

        // Grid is ascending, so strict improvement keeps the smaller alpha
        // on ties.
        if (entry.rmse < best_rmse) {
            best_rmse = entry.rmse;
            best.alpha = alpha;
            best.regressor = std::move(regressor);
            have_best = true;
        }
    }
    if (!have_best)
        throw std::runtime_error("fit_censored: every alpha in the grid was skipped");
    return best;
}

CensoredModel fit_uncensored(const Eigen::Ref<const Matrix>& X_train,
                             const Eigen::Ref<const Vector>& y_train, const LearnerSpec& spec,
                             const std::vector<std::string>& column_names) {
    LearnerSpec reg_spec = spec;
    reg_spec.task = Task::regression;
    reg_spec.seed = regressor_seed(spec);

    CensoredModel model;
    model.family = spec.family;
    model.alpha = 0.0;
    model.classifier = constant_classifier(0.0, column_names);
    model.regressor = fit_learner(reg_spec, X_train, y_train, column_names);
    return model;
}

void save_censored(const CensoredModel& model, const std::string& path) {
    ordered_json j;
    j["format"] = "demand.censored";
    j["version"] = k_version;
    j["family"] = to_string(model.family);
    j["alpha"] = model.alpha;
    ordered_json prof = ordered_json::array();
    for (const auto& e : model.alpha_profile)
        prof.push_back({{"alpha", e.alpha},
                        {"rmse", e.skipped ? nullptr : ordered_json(e.rmse)},
                        {"n_uncensored_train", e.n_uncensored_train},
                        {"skipped", e.skipped}});
    j["alpha_profile"] = std::move(prof);
    j["classifier"] = ordered_json::parse(learner_to_json(model.classifier));
    j["regressor"] = ordered_json::parse(learner_to_json(model.regressor));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(2) << "\n";
}

CensoredModel load_censored(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument("corrupt model file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "demand.censored")
        throw std::invalid_argument("not a censored-model file: " + path);
    CensoredModel model;
    model.family = family_from_string(j.at("family").get<std::string>());
    model.alpha = j.at("alpha").get<double>();
    for (const auto& e : j.at("alpha_profile")) {
        AlphaProfileEntry entry;
        entry.alpha = e.at("alpha").get<double>();
        entry.skipped = e.at("skipped").get<bool>();
        entry.rmse = e.at("rmse").is_null() ? 0.0 : e.at("rmse").get<double>();
        entry.n_uncensored_train = e.at("n_uncensored_train").get<Index>();
        model.alpha_profile.push_back(entry);
    }
    model.classifier = learner_from_json(j.at("classifier").dump());
    model.regressor = learner_from_json(j.at("regressor").dump());
    return model;
}

}  // namespace demand
