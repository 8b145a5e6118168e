#include "demand/ensemble.hpp"

#include "demand/version.hpp"

#include <Eigen/LU>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace demand {

using ordered_json = nlohmann::ordered_json;

Vector project_to_simplex(const Eigen::Ref<const Vector>& v) {
    const Index k = v.size();
    std::vector<double> u(v.data(), v.data() + k);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0;
    double tau = 0.0;
    int support = 0;
    for (Index j = 0; j < k; ++j) {
        cumsum += u[static_cast<size_t>(j)];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<size_t>(j)] - t > 0) {
            tau = t;
            support = static_cast<int>(j + 1);
        }
    }
    (void)support;
    Vector out(k);
    for (Index j = 0; j < k; ++j) out[j] = std::max(0.0, v[j] - tau);
    return out;
}

SimplexWeights fit_weights(const Eigen::Ref<const Matrix>& P, const Eigen::Ref<const Vector>& y) {
    const Index n = P.rows();
    const Index k = P.cols();
    if (k < 1) throw std::invalid_argument("fit_weights: need at least one member");
    if (n != y.size()) throw std::invalid_argument("fit_weights: size mismatch");
    if (n <= k) throw std::invalid_argument("fit_weights: need more rows than members");

    SimplexWeights result;
    if (k == 1) {
        result.weights = Vector::Ones(1);
        result.objective = 0.5 * (y - P.col(0)).squaredNorm();
        return result;
    }

    // All-identical prediction columns leave the weights unidentified.
    bool identical = true;
    for (Index j = 1; j < k && identical; ++j)
        identical = (P.col(j) - P.col(0)).lpNorm<Eigen::Infinity>() == 0.0;
    if (identical) {
        result.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
        result.objective = 0.5 * (y - P * result.weights).squaredNorm();
        result.degenerate = true;
        return result;
    }

    const Matrix gram = P.transpose() * P;
    const Vector pty = P.transpose() * y;

    // Power iteration for the largest eigenvalue of P'P.
    Vector v = Vector::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
    double eig = 0.0;
    for (int it = 0; it < 500; ++it) {
        Vector w = gram * v;
        const double norm = w.norm();
        if (norm == 0.0) break;
        w /= norm;
        const double e = w.dot(gram * w);
        if (it > 10 && std::abs(e - eig) <= 1e-12 * std::max(1.0, std::abs(e))) {
            eig = e;
            break;
        }
        eig = e;
        v = w;
    }
    if (!(eig > 0)) eig = 1.0;
    const double step = 1.0 / eig;

    Vector w = Vector::Constant(k, 1.0 / static_cast<double>(k));
    auto objective = [&](const Vector& u) { return 0.5 * (y - P * u).squaredNorm(); };
    double obj = objective(w);
    int stall = 0;
    int it = 0;
    for (; it < 100000; ++it) {
        const Vector grad = gram * w - pty;
        w = project_to_simplex(w - step * grad);
        const double obj_new = objective(w);
        stall = (obj - obj_new < 1e-12) ? stall + 1 : 0;
        obj = obj_new;
        if (stall >= 50) break;
    }

    // Projected gradient finds the active face long before it resolves the
    // magnitudes on ill-conditioned member sets. Polish with an exact
    // equality-constrained solve on that face, adjusting the support when
    // the solve walks off it; keep the polish only if it stays feasible
    // and does not worsen the objective.
    std::vector<Index> support;
    for (Index j = 0; j < k; ++j)
        if (w[j] > 1e-12) support.push_back(j);
    for (int round = 0; round < 2 * static_cast<int>(k) && !support.empty(); ++round) {
        const Index s = static_cast<Index>(support.size());
        Matrix kkt = Matrix::Zero(s + 1, s + 1);
        Vector rhs(s + 1);
        for (Index a = 0; a < s; ++a) {
            for (Index b = 0; b < s; ++b) kkt(a, b) = gram(support[static_cast<size_t>(a)],
                                                           support[static_cast<size_t>(b)]);
            kkt(a, s) = 1.0;
            kkt(s, a) = 1.0;
            rhs[a] = pty[support[static_cast<size_t>(a)]];
        }
        rhs[s] = 1.0;
        const Vector sol = kkt.fullPivLu().solve(rhs);
        bool feasible = true;
        Index worst = -1;
        double worst_val = -1e-12;
        for (Index a = 0; a < s; ++a) {
            if (sol[a] < worst_val) {
                worst_val = sol[a];
                worst = a;
                feasible = false;
            }
        }
        if (!feasible) {
            support.erase(support.begin() + static_cast<std::ptrdiff_t>(worst));
            continue;
        }
        Vector candidate = Vector::Zero(k);
        for (Index a = 0; a < s; ++a) candidate[support[static_cast<size_t>(a)]] = std::max(0.0, sol[a]);
        const double cand_obj = objective(candidate);
        if (cand_obj > obj + 1e-12) break;  // keep the PG iterate
        // Multiplier check: an excluded member with a lower gradient than
        // the face belongs in the support.
        const Vector grad = gram * candidate - pty;
        const double nu = sol[s];
        Index entering = -1;
        double most_negative = -1e-10 * std::max(1.0, std::abs(nu));
        for (Index j = 0; j < k; ++j) {
            if (candidate[j] > 0.0) continue;
            if (grad[j] + nu < most_negative) {
                most_negative = grad[j] + nu;
                entering = j;
            }
        }
        w = candidate;
        obj = cand_obj;
        if (entering < 0) break;
        support.push_back(entering);
        std::sort(support.begin(), support.end());
    }

    result.weights = w;
    result.objective = obj;
    result.iterations = it;
    return result;
}

Vector predict_ensemble(const EnsembleModel& model, const Eigen::Ref<const Matrix>& X) {
    if (model.members.empty()) throw std::runtime_error("predict_ensemble: no members");
    Vector out = Vector::Zero(X.rows());
    for (size_t j = 0; j < model.members.size(); ++j)
        out += model.weights[static_cast<Index>(j)] * predict_censored(model.members[j], X);
    return out;
}

Vector EnsembleModel::predict(const Eigen::Ref<const Matrix>& X) const {
    return predict_ensemble(*this, X);
}

EnsembleModel fit_ensemble(std::vector<CensoredModel> members, std::vector<std::string> names,
                           const Eigen::Ref<const Matrix>& X_val,
                           const Eigen::Ref<const Vector>& y_val) {
    if (members.empty()) throw std::invalid_argument("fit_ensemble: no members");
    if (names.size() != members.size())
        throw std::invalid_argument("fit_ensemble: names/members mismatch");

    Matrix predictions(X_val.rows(), static_cast<Index>(members.size()));
    EnsembleModel model;
    for (size_t j = 0; j < members.size(); ++j) {
        predictions.col(static_cast<Index>(j)) = predict_censored(members[j], X_val);
        const Vector resid = predictions.col(static_cast<Index>(j)) - y_val;
        model.validation_rmse.push_back(
            std::sqrt(resid.squaredNorm() / static_cast<double>(y_val.size())));
    }
    SimplexWeights sw = fit_weights(predictions, y_val);
    model.member_names = std::move(names);
    model.members = std::move(members);
    model.weights = sw.weights;
    model.degenerate_weights = sw.degenerate;
    return model;
}

void save_ensemble(const EnsembleModel& model, const std::string& path) {
    ordered_json j;
    j["format"] = "demand.ensemble";
    j["version"] = k_version;
    j["members"] = model.member_names;
    ordered_json w = ordered_json::array();
    for (Index i = 0; i < model.weights.size(); ++i) w.push_back(model.weights[i]);
    j["weights"] = std::move(w);
    j["validation_rmse"] = model.validation_rmse;
    j["degenerate_weights"] = model.degenerate_weights;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ensemble file: " + path);
    out << j.dump(2) << "\n";
}

EnsembleModel load_ensemble(const std::string& path, const std::string& member_dir) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open ensemble file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument("corrupt ensemble file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "demand.ensemble")
        throw std::invalid_argument("not an ensemble file: " + path);
    EnsembleModel model;
    model.member_names = j.at("members").get<std::vector<std::string>>();
    const auto& w = j.at("weights");
    model.weights.resize(static_cast<Index>(w.size()));
    for (size_t i = 0; i < w.size(); ++i)
        model.weights[static_cast<Index>(i)] = w[i].get<double>();
    model.validation_rmse = j.at("validation_rmse").get<std::vector<double>>();
    model.degenerate_weights = j.value("degenerate_weights", false);
    for (const auto& name : model.member_names)
        model.members.push_back(load_censored(member_dir + "/" + name));
    return model;
}

}  // namespace demand
