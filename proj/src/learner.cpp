#include "demand/learner.hpp"

#include "demand/rng.hpp"
#include "demand/stats.hpp"
#include "demand/version.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace demand {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Family f) {
    switch (f) {
        case Family::ols: return "ols";
        case Family::ridge: return "ridge";
        case Family::lasso: return "lasso";
        case Family::random_forest: return "random_forest";
        case Family::constant: return "constant";
    }
    throw std::logic_error("unknown family");
}

std::string to_string(Task t) {
    return t == Task::regression ? "regression" : "classification";
}

Family family_from_string(const std::string& s) {
    if (s == "ols") return Family::ols;
    if (s == "ridge") return Family::ridge;
    if (s == "lasso") return Family::lasso;
    if (s == "random_forest") return Family::random_forest;
    if (s == "constant") return Family::constant;
    throw std::invalid_argument("unknown learner family: " + s);
}

Task task_from_string(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "classification") return Task::classification;
    throw std::invalid_argument("unknown task: " + s);
}

namespace {

std::vector<double> resolve_lambda_grid(const LearnerSpec& spec, double lambda_max) {
    if (!spec.lambda_grid.empty()) return spec.lambda_grid;
    if (spec.lambda_count < 1) throw std::invalid_argument("lambda_count must be >= 1");
    if (!(lambda_max > 0)) lambda_max = 1.0;  // constant response; grid value is irrelevant
    return log_spaced_grid(lambda_max, lambda_max * spec.lambda_min_ratio, spec.lambda_count);
}

ForestOptions forest_options(const LearnerSpec& spec, Index k, bool classification) {
    ForestOptions o;
    o.ntree = spec.ntree;
    o.nodesize = spec.nodesize;
    o.max_nodes = spec.max_nodes;
    o.classification = classification;
    o.seed = mix_seed(spec.seed, 0x7ee5);
    o.mtry = spec.mtry.value_or(0);
    if (o.mtry == 0) o.mtry = static_cast<int>(k);  // placeholder; resolved by caller
    return o;
}

}  // namespace

Vector FittedLearner::predict(const Eigen::Ref<const Matrix>& X) const {
    if (X.cols() != n_columns())
        throw std::invalid_argument("predict: expected " + std::to_string(n_columns()) +
                                    " columns, got " + std::to_string(X.cols()));
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        Vector eta = X * lin->coef;
        eta.array() += lin->intercept;
        if (task == Task::classification) {
            for (Index i = 0; i < eta.size(); ++i) eta[i] = sigmoid(std::clamp(eta[i], -30.0, 30.0));
        }
        return eta;
    }
    if (const auto* fm = std::get_if<ForestModel>(&model)) return fm->forest.predict(X);
    const auto& c = std::get<ConstantModel>(model);
    return Vector::Constant(X.rows(), c.value);
}

FittedLearner fit_learner(const LearnerSpec& spec, const Eigen::Ref<const Matrix>& X,
                          const Eigen::Ref<const Vector>& y,
                          const std::vector<std::string>& column_names) {
    if (spec.task != Task::regression)
        throw std::invalid_argument("fit_learner: use fit_classifier for classification");
    if (static_cast<Index>(column_names.size()) != X.cols())
        throw std::invalid_argument("fit_learner: column names do not match the design");

    FittedLearner out;
    out.family = spec.family;
    out.task = Task::regression;
    out.column_names = column_names;
    out.seed = spec.seed;

    switch (spec.family) {
        case Family::ols: {
            Matrix a(X.rows(), X.cols() + 1);
            a.col(0).setOnes();
            a.rightCols(X.cols()) = X;
            const Vector beta = ols_fit(a, y);
            LinearModel lm;
            lm.intercept = beta[0];
            lm.coef = beta.tail(X.cols());
            out.model = std::move(lm);
            break;
        }
        case Family::ridge: {
            // The default grid anchor translates the lasso lambda_max to the
            // sum-of-squares ridge scale.
            const double anchor = lasso_lambda_max(X, y) * static_cast<double>(X.rows());
            const auto grid = resolve_lambda_grid(spec, anchor);
            LinearFit fit = ridge_cv(X, y, grid, spec.folds, spec.seed);
            out.model = LinearModel{fit.coef, fit.intercept, fit.lambda, fit.cv_profile};
            break;
        }
        case Family::lasso: {
            const auto grid = resolve_lambda_grid(spec, lasso_lambda_max(X, y));
            LinearFit fit = lasso_cv(X, y, grid, spec.folds, spec.seed);
            out.model = LinearModel{fit.coef, fit.intercept, fit.lambda, fit.cv_profile};
            break;
        }
        case Family::random_forest: {
            ForestOptions o = forest_options(spec, X.cols(), false);
            if (!spec.mtry.has_value()) {
                ForestOptions cv_opts = o;
                o.mtry = select_mtry(X, y, cv_opts, spec.mtry_candidates, spec.folds,
                                     mix_seed(spec.seed, 0x317f));
            }
            ForestModel fm;
            fm.mtry = o.mtry;
            fm.forest = forest_fit(X, y, o);
            out.model = std::move(fm);
            break;
        }
        case Family::constant:
            out.model = ConstantModel{y.size() > 0 ? y.mean() : 0.0};
            break;
    }
    return out;
}

FittedLearner fit_classifier(const LearnerSpec& spec, const Eigen::Ref<const Matrix>& X,
                             const Eigen::Ref<const IntVector>& d,
                             const std::vector<std::string>& column_names) {
    if (static_cast<Index>(column_names.size()) != X.cols())
        throw std::invalid_argument("fit_classifier: column names do not match the design");
    const int ones = d.sum();
    if (ones == 0 || ones == d.size())
        throw std::invalid_argument("fit_classifier: training data has a single class");

    FittedLearner out;
    out.family = spec.family;
    out.task = Task::classification;
    out.column_names = column_names;
    out.seed = spec.seed;

    switch (spec.family) {
        case Family::ols: {
            LinearFit fit = logistic_fit(X, d);
            out.model = LinearModel{fit.coef, fit.intercept, 0.0, {}};
            break;
        }
        case Family::ridge: {
            const double anchor =
                logistic_lasso_lambda_max(X, d) * static_cast<double>(X.rows());
            const auto grid = resolve_lambda_grid(spec, anchor);
            LinearFit fit = logistic_ridge_cv(X, d, grid, spec.folds, spec.seed);
            out.model = LinearModel{fit.coef, fit.intercept, fit.lambda, fit.cv_profile};
            break;
        }
        case Family::lasso: {
            const auto grid = resolve_lambda_grid(spec, logistic_lasso_lambda_max(X, d));
            LinearFit fit = logistic_lasso_cv(X, d, grid, spec.folds, spec.seed);
            out.model = LinearModel{fit.coef, fit.intercept, fit.lambda, fit.cv_profile};
            break;
        }
        case Family::random_forest: {
            ForestOptions o = forest_options(spec, X.cols(), true);
            const Vector dy = d.cast<double>();
            if (!spec.mtry.has_value()) {
                ForestOptions cv_opts = o;
                o.mtry = select_mtry(X, dy, cv_opts, spec.mtry_candidates, spec.folds,
                                     mix_seed(spec.seed, 0x317f));
            }
            ForestModel fm;
            fm.mtry = o.mtry;
            fm.forest = forest_fit(X, dy, o);
            out.model = std::move(fm);
            break;
        }
        case Family::constant:
            out.model = ConstantModel{d.cast<double>().mean()};
            break;
    }
    return out;
}

FittedLearner constant_classifier(double value, const std::vector<std::string>& column_names) {
    FittedLearner out;
    out.family = Family::constant;
    out.task = Task::classification;
    out.column_names = column_names;
    out.model = ConstantModel{value};
    return out;
}

namespace {

ordered_json vector_to_json(const Vector& v) {
    ordered_json a = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const ordered_json& a) {
    Vector v(static_cast<Index>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<Index>(i)] = a[i].get<double>();
    return v;
}

}  // namespace

std::string learner_to_json(const FittedLearner& model) {
    ordered_json j;
    j["format"] = "demand.learner";
    j["version"] = k_version;
    j["family"] = to_string(model.family);
    j["task"] = to_string(model.task);
    j["seed"] = model.seed;
    j["columns"] = model.column_names;
    if (const auto* lin = std::get_if<LinearModel>(&model.model)) {
        j["kind"] = "linear";
        j["intercept"] = lin->intercept;
        j["lambda"] = lin->lambda;
        j["coef"] = vector_to_json(lin->coef);
        ordered_json prof = ordered_json::array();
        for (const auto& p : lin->cv_profile) prof.push_back({{"lambda", p.lambda}, {"cv_rmse", p.cv_rmse}});
        j["cv_profile"] = std::move(prof);
    } else if (const auto* fm = std::get_if<ForestModel>(&model.model)) {
        j["kind"] = "forest";
        j["mtry"] = fm->mtry;
        j["ntree"] = fm->forest.opts.ntree;
        j["nodesize"] = fm->forest.opts.nodesize;
        j["max_nodes"] = fm->forest.opts.max_nodes;
        j["classification"] = fm->forest.opts.classification;
        j["forest_seed"] = fm->forest.opts.seed;
        ordered_json trees = ordered_json::array();
        for (const auto& tree : fm->forest.trees) {
            ordered_json nodes = ordered_json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
    } else {
        j["kind"] = "constant";
        j["value"] = std::get<ConstantModel>(model.model).value;
    }
    return j.dump(2);
}

FittedLearner learner_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("format", "") != "demand.learner")
        throw std::invalid_argument("not a learner file");
    FittedLearner out;
    out.family = family_from_string(j.at("family").get<std::string>());
    out.task = task_from_string(j.at("task").get<std::string>());
    out.seed = j.value("seed", uint64_t{0});
    out.column_names = j.at("columns").get<std::vector<std::string>>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
        LinearModel lm;
        lm.intercept = j.at("intercept").get<double>();
        lm.lambda = j.at("lambda").get<double>();
        lm.coef = vector_from_json(j.at("coef"));
        for (const auto& p : j.at("cv_profile"))
            lm.cv_profile.push_back({p.at("lambda").get<double>(), p.at("cv_rmse").get<double>()});
        out.model = std::move(lm);
    } else if (kind == "forest") {
        ForestModel fm;
        fm.mtry = j.at("mtry").get<int>();
        fm.forest.opts.ntree = j.at("ntree").get<int>();
        fm.forest.opts.nodesize = j.at("nodesize").get<int>();
        fm.forest.opts.max_nodes = j.at("max_nodes").get<int>();
        fm.forest.opts.classification = j.at("classification").get<bool>();
        fm.forest.opts.seed = j.at("forest_seed").get<uint64_t>();
        fm.forest.opts.mtry = fm.mtry;
        for (const auto& tj : j.at("trees")) {
            Tree tree;
            tree.nodes.reserve(tj.size());
            for (const auto& nj : tj) {
                TreeNode nd;
                nd.feature = nj.at(0).get<int>();
                nd.threshold = nj.at(1).get<double>();
                nd.left = nj.at(2).get<int>();
                nd.right = nj.at(3).get<int>();
                nd.value = nj.at(4).get<double>();
                tree.nodes.push_back(nd);
            }
            fm.forest.trees.push_back(std::move(tree));
        }
        out.model = std::move(fm);
    } else if (kind == "constant") {
        out.model = ConstantModel{j.at("value").get<double>()};
    } else {
        throw std::invalid_argument("unknown learner kind: " + kind);
    }
    return out;
}

void save_learner(const FittedLearner& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << learner_to_json(model) << "\n";
}

FittedLearner load_learner(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return learner_from_json(text);
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument("corrupt model file " + path + ": " + e.what());
    }
}

}  // namespace demand
