#include "demand/evaluation.hpp"

#include "demand/rng.hpp"
#include "demand/stats.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace demand {

using ordered_json = nlohmann::ordered_json;

double rmse(const Eigen::Ref<const Vector>& predicted, const Eigen::Ref<const Vector>& actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("rmse: length mismatch");
    if (predicted.size() == 0) throw std::invalid_argument("rmse: empty input");
    return std::sqrt((predicted - actual).squaredNorm() / static_cast<double>(actual.size()));
}

namespace {

struct SkuGroups {
    std::vector<std::vector<Index>> rows;  // first-appearance order
};

SkuGroups group_by_sku(const std::vector<std::string>& sku_of_row) {
    SkuGroups g;
    std::unordered_map<std::string, size_t> pos;
    for (size_t i = 0; i < sku_of_row.size(); ++i) {
        auto [it, inserted] = pos.try_emplace(sku_of_row[i], g.rows.size());
        if (inserted) g.rows.emplace_back();
        g.rows[it->second].push_back(static_cast<Index>(i));
    }
    return g;
}

double two_sided_p(double t) { return 2.0 * (1.0 - normal_cdf(std::abs(t))); }

}  // namespace

BootstrapResult bootstrap_rmse_diff(const Eigen::Ref<const Vector>& pred_a,
                                    const Eigen::Ref<const Vector>& pred_b,
                                    const Eigen::Ref<const Vector>& actual,
                                    const std::vector<std::string>& sku_of_row, int replications,
                                    uint64_t seed) {
    const Index n = actual.size();
    if (pred_a.size() != n || pred_b.size() != n ||
        static_cast<Index>(sku_of_row.size()) != n)
        throw std::invalid_argument("bootstrap_rmse_diff: length mismatch");
    if (replications < 2) throw std::invalid_argument("bootstrap_rmse_diff: need >= 2 replications");
    const SkuGroups groups = group_by_sku(sku_of_row);
    const size_t n_sku = groups.rows.size();
    if (n_sku < 2) throw std::invalid_argument("bootstrap_rmse_diff: need at least 2 distinct SKUs");

    // Per-SKU error sums make each replication O(#SKUs).
    std::vector<double> sse_a(n_sku, 0.0), sse_b(n_sku, 0.0);
    std::vector<double> count(n_sku, 0.0);
    for (size_t s = 0; s < n_sku; ++s) {
        for (Index i : groups.rows[s]) {
            const double ea = pred_a[i] - actual[i];
            const double eb = pred_b[i] - actual[i];
            sse_a[s] += ea * ea;
            sse_b[s] += eb * eb;
        }
        count[s] = static_cast<double>(groups.rows[s].size());
    }

    BootstrapResult result;
    result.replications = replications;
    result.point = rmse(pred_a, actual) - rmse(pred_b, actual);
    result.draws.resize(replications);
    for (int r = 0; r < replications; ++r) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(r)));
        double a = 0.0, b = 0.0, m = 0.0;
        for (size_t s = 0; s < n_sku; ++s) {
            const size_t pick = static_cast<size_t>(rng.uniform_int(n_sku));
            a += sse_a[pick];
            b += sse_b[pick];
            m += count[pick];
        }
        result.draws[r] = std::sqrt(a / m) - std::sqrt(b / m);
    }
    result.se = sample_sd(result.draws);
    if (result.se > 0) {
        result.t = result.point / result.se;
        result.p_value = two_sided_p(result.t);
    } else {
        result.t = std::numeric_limits<double>::quiet_NaN();
        result.p_value = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

MarginalEffectEstimate marginal_effect(const Predictor& predict, const Matrix& X, Index price_col,
                                       const std::vector<std::string>& sku_of_row,
                                       int replications, uint64_t seed,
                                       std::pair<double, double> range) {
    if (price_col < 0 || price_col >= X.cols())
        throw std::invalid_argument("marginal_effect: column not found");
    if (static_cast<Index>(sku_of_row.size()) != X.rows())
        throw std::invalid_argument("marginal_effect: sku keys do not match rows");
    if (replications < 2) throw std::invalid_argument("marginal_effect: need >= 2 replications");
    if (!(range.first >= 0.01 - 1e-15 && range.second <= 1.0 + 1e-15 && range.first < range.second))
        throw std::invalid_argument("marginal_effect: perturbation range must lie within [0.01, 1]");

    const SkuGroups groups = group_by_sku(sku_of_row);
    const size_t n_sku = groups.rows.size();
    const Vector base = predict(X);
    const Vector base_col = X.col(price_col);

    // Per-SKU sums of the per-row differences make each replication's
    // aggregation O(#SKUs) after one prediction pass.
    Matrix work = X;
    MarginalEffectEstimate est;
    est.replications = replications;
    est.perturbation_range = range;
    est.draws.resize(replications);
    for (int r = 0; r < replications; ++r) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(r)));
        const double delta = rng.uniform(range.first, range.second);
        work.col(price_col) = base_col.array() + delta;
        const Vector shifted = predict(work);
        std::vector<double> sku_sum(n_sku, 0.0);
        for (size_t s = 0; s < n_sku; ++s)
            for (Index i : groups.rows[s]) sku_sum[s] += (shifted[i] - base[i]) / delta;
        double acc = 0.0, m = 0.0;
        for (size_t s = 0; s < n_sku; ++s) {
            const size_t pick = static_cast<size_t>(rng.uniform_int(n_sku));
            acc += sku_sum[pick];
            m += static_cast<double>(groups.rows[pick].size());
        }
        est.draws[r] = acc / m;
    }
    est.mean_effect = est.draws.mean();
    est.standard_error = sample_sd(est.draws);
    return est;
}

CoefficientEstimate bootstrap_ols_coef(const Eigen::Ref<const Matrix>& X,
                                       const Eigen::Ref<const Vector>& y,
                                       const std::vector<std::string>& sku_of_row, Index coef_col,
                                       int replications, uint64_t seed) {
    const Index n = X.rows();
    const Index k = X.cols();
    if (static_cast<Index>(sku_of_row.size()) != n)
        throw std::invalid_argument("bootstrap_ols_coef: sku keys do not match rows");
    const SkuGroups groups = group_by_sku(sku_of_row);
    const size_t n_sku = groups.rows.size();
    if (n_sku < 2) throw std::invalid_argument("bootstrap_ols_coef: need at least 2 distinct SKUs");

    // Augmented per-SKU Gram blocks (intercept included).
    const Index ka = k + 1;
    std::vector<Matrix> gram(n_sku, Matrix::Zero(ka, ka));
    std::vector<Vector> xty(n_sku, Vector::Zero(ka));
    for (size_t s = 0; s < n_sku; ++s) {
        for (Index i : groups.rows[s]) {
            Vector row(ka);
            row[0] = 1.0;
            row.tail(k) = X.row(i).transpose();
            gram[s].noalias() += row * row.transpose();
            xty[s].noalias() += row * y[i];
        }
    }
    Matrix gram_all = Matrix::Zero(ka, ka);
    Vector xty_all = Vector::Zero(ka);
    for (size_t s = 0; s < n_sku; ++s) {
        gram_all += gram[s];
        xty_all += xty[s];
    }

    // A resample can drop every row of some dummy level and lose rank; a
    // tiny relative ridge keeps each solve well posed without moving the
    // estimate at the reported precision.
    auto solve_coef = [&](Matrix g, const Vector& t) {
        g.diagonal().array() += 1e-10 * g.trace() / static_cast<double>(ka);
        return Vector(g.ldlt().solve(t))[coef_col + 1];
    };
    CoefficientEstimate est;
    est.value = solve_coef(gram_all, xty_all);
    Vector draws(replications);
    for (int r = 0; r < replications; ++r) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(r)));
        Matrix g = Matrix::Zero(ka, ka);
        Vector t = Vector::Zero(ka);
        for (size_t s = 0; s < n_sku; ++s) {
            const size_t pick = static_cast<size_t>(rng.uniform_int(n_sku));
            g += gram[pick];
            t += xty[pick];
        }
        draws[r] = solve_coef(g, t);
    }
    est.se = sample_sd(draws);
    return est;
}

namespace {

ordered_json effect_to_json(const MarginalEffectEstimate& e) {
    return {{"mean_effect", e.mean_effect},
            {"standard_error", e.standard_error},
            {"replications", e.replications},
            {"perturbation_range", {e.perturbation_range.first, e.perturbation_range.second}}};
}

MarginalEffectEstimate effect_from_json(const ordered_json& j) {
    MarginalEffectEstimate e;
    e.mean_effect = j.at("mean_effect").get<double>();
    e.standard_error = j.at("standard_error").get<double>();
    e.replications = j.at("replications").get<int>();
    e.perturbation_range = {j.at("perturbation_range")[0].get<double>(),
                            j.at("perturbation_range")[1].get<double>()};
    return e;
}

double json_to_double(const ordered_json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report) {
    ordered_json j;
    j["format"] = "demand.evaluation";
    ordered_json fams = ordered_json::array();
    for (const auto& f : report.families) {
        ordered_json fj;
        fj["family"] = f.family;
        fj["alpha"] = f.alpha;
        fj["rmse"] = {{"censored",
                       {{"train", f.rmse_train_censored},
                        {"validation", f.rmse_val_censored},
                        {"test", f.rmse_test_censored}}},
                      {"uncensored",
                       {{"train", f.rmse_train_uncensored},
                        {"validation", f.rmse_val_uncensored},
                        {"test", f.rmse_test_uncensored}}}};
        fj["ensemble_weight"] = {{"censored", f.weight_censored},
                                 {"uncensored", f.weight_uncensored}};
        fj["price_effect"] = {{"censored", effect_to_json(f.effect_censored)},
                              {"uncensored", effect_to_json(f.effect_uncensored)}};
        fams.push_back(std::move(fj));
    }
    j["families"] = std::move(fams);
    j["has_ensemble"] = report.has_ensemble;
    if (report.has_ensemble) {
        j["ensemble"] = {
            {"rmse",
             {{"censored",
               {{"validation", report.ensemble_rmse_val_censored},
                {"test", report.ensemble_rmse_test_censored}}},
              {"uncensored",
               {{"validation", report.ensemble_rmse_val_uncensored},
                {"test", report.ensemble_rmse_test_uncensored}}}}},
            {"price_effect",
             {{"censored", effect_to_json(report.ensemble_effect_censored)},
              {"uncensored", effect_to_json(report.ensemble_effect_uncensored)}}},
            {"rmse_diff_bootstrap",
             {{"point", report.ensemble_diff.point},
              {"se", report.ensemble_diff.se},
              {"t", report.ensemble_diff.t},
              {"p_value", report.ensemble_diff.p_value},
              {"replications", report.ensemble_diff.replications}}}};
    }
    j["has_ols_coefficients"] = report.has_ols_coefficients;
    if (report.has_ols_coefficients) {
        j["log_price_coefficient"] = {
            {"uncensored",
             {{"value", report.price_coef_uncensored.value},
              {"se", report.price_coef_uncensored.se}}},
            {"censored",
             {{"value", report.price_coef_censored.value}, {"se", report.price_coef_censored.se}}}};
    }
    return j.dump(2);
}

EvalReport eval_report_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("format", "") != "demand.evaluation")
        throw std::invalid_argument("not an evaluation report");
    EvalReport report;
    for (const auto& fj : j.at("families")) {
        FamilyEval f;
        f.family = fj.at("family").get<std::string>();
        f.alpha = fj.at("alpha").get<double>();
        const auto& rc = fj.at("rmse").at("censored");
        const auto& ru = fj.at("rmse").at("uncensored");
        f.rmse_train_censored = rc.at("train").get<double>();
        f.rmse_val_censored = rc.at("validation").get<double>();
        f.rmse_test_censored = rc.at("test").get<double>();
        f.rmse_train_uncensored = ru.at("train").get<double>();
        f.rmse_val_uncensored = ru.at("validation").get<double>();
        f.rmse_test_uncensored = ru.at("test").get<double>();
        f.weight_censored = fj.at("ensemble_weight").at("censored").get<double>();
        f.weight_uncensored = fj.at("ensemble_weight").at("uncensored").get<double>();
        f.effect_censored = effect_from_json(fj.at("price_effect").at("censored"));
        f.effect_uncensored = effect_from_json(fj.at("price_effect").at("uncensored"));
        report.families.push_back(std::move(f));
    }
    report.has_ensemble = j.at("has_ensemble").get<bool>();
    if (report.has_ensemble) {
        const auto& e = j.at("ensemble");
        report.ensemble_rmse_val_censored = e.at("rmse").at("censored").at("validation").get<double>();
        report.ensemble_rmse_test_censored = e.at("rmse").at("censored").at("test").get<double>();
        report.ensemble_rmse_val_uncensored =
            e.at("rmse").at("uncensored").at("validation").get<double>();
        report.ensemble_rmse_test_uncensored =
            e.at("rmse").at("uncensored").at("test").get<double>();
        report.ensemble_effect_censored = effect_from_json(e.at("price_effect").at("censored"));
        report.ensemble_effect_uncensored = effect_from_json(e.at("price_effect").at("uncensored"));
        const auto& bj = e.at("rmse_diff_bootstrap");
        report.ensemble_diff.point = bj.at("point").get<double>();
        report.ensemble_diff.se = bj.at("se").get<double>();
        report.ensemble_diff.t = json_to_double(bj.at("t"));
        report.ensemble_diff.p_value = json_to_double(bj.at("p_value"));
        report.ensemble_diff.replications = bj.at("replications").get<int>();
    }
    report.has_ols_coefficients = j.at("has_ols_coefficients").get<bool>();
    if (report.has_ols_coefficients) {
        const auto& cj = j.at("log_price_coefficient");
        report.price_coef_uncensored.value = cj.at("uncensored").at("value").get<double>();
        report.price_coef_uncensored.se = cj.at("uncensored").at("se").get<double>();
        report.price_coef_censored.value = cj.at("censored").at("value").get<double>();
        report.price_coef_censored.se = cj.at("censored").at("se").get<double>();
    }
    return report;
}

namespace {

std::string family_label(const std::string& family) {
    if (family == "ols") return "Linear regression";
    if (family == "ridge") return "Ridge regression";
    if (family == "lasso") return "Lasso regression";
    if (family == "random_forest") return "Random forest";
    return family;
}

std::string family_short_label(const std::string& family) {
    if (family == "ols") return "OLS";
    if (family == "ridge") return "Ridge";
    if (family == "lasso") return "Lasso";
    if (family == "random_forest") return "Random forest";
    return family;
}

std::string fmt(double v, int digits = 3) {
    if (std::isnan(v)) return "NA";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string render_report_text(const EvalReport& report) {
    std::ostringstream out;
    char line[256];

    if (report.has_ols_coefficients) {
        out << "Log price coefficient (linear family)\n";
        std::snprintf(line, sizeof(line), "  %-16s %14s %14s\n", "", "Uncensored", "Censored");
        out << line;
        std::snprintf(line, sizeof(line), "  %-16s %14s %14s\n", "Log. of price",
                      fmt(report.price_coef_uncensored.value).c_str(),
                      fmt(report.price_coef_censored.value).c_str());
        out << line;
        std::snprintf(line, sizeof(line), "  %-16s %14s %14s\n", "",
                      ("(" + fmt(report.price_coef_uncensored.se) + ")").c_str(),
                      ("(" + fmt(report.price_coef_censored.se) + ")").c_str());
        out << line << "\n";
    }

    out << "Test RMSE, selected threshold, and ensemble weights\n";
    std::snprintf(line, sizeof(line), "  %-20s %12s %12s %8s %14s %14s\n", "Model", "RMSE unc.",
                  "RMSE cens.", "alpha", "Weight unc.", "Weight cens.");
    out << line;
    for (const auto& f : report.families) {
        std::snprintf(line, sizeof(line), "  %-20s %12s %12s %8s %14s %14s\n",
                      family_label(f.family).c_str(), fmt(f.rmse_test_uncensored).c_str(),
                      fmt(f.rmse_test_censored).c_str(), fmt(f.alpha, 2).c_str(),
                      fmt(f.weight_uncensored, 4).c_str(), fmt(f.weight_censored, 4).c_str());
        out << line;
    }
    if (report.has_ensemble) {
        std::snprintf(line, sizeof(line), "  %-20s %12s %12s\n", "Ensemble",
                      fmt(report.ensemble_rmse_test_uncensored).c_str(),
                      fmt(report.ensemble_rmse_test_censored).c_str());
        out << line;
        std::snprintf(line, sizeof(line),
                      "  RMSE difference (unc. - cens.): %s, t-stat=%s, p-value=%s (%d bootstrap "
                      "replications)\n",
                      fmt(report.ensemble_diff.point).c_str(), fmt(report.ensemble_diff.t, 2).c_str(),
                      fmt(report.ensemble_diff.p_value, 3).c_str(),
                      report.ensemble_diff.replications);
        out << line;
    }
    out << "\n";

    out << "Mean marginal effect of price (se in parentheses)\n";
    std::snprintf(line, sizeof(line), "  %-12s", "");
    out << line;
    for (const auto& f : report.families) {
        std::snprintf(line, sizeof(line), " %14s", family_short_label(f.family).c_str());
        out << line;
    }
    if (report.has_ensemble) {
        std::snprintf(line, sizeof(line), " %14s", "Ensemble");
        out << line;
    }
    out << "\n";
    auto effect_row = [&](const char* label, bool censored) {
        std::snprintf(line, sizeof(line), "  %-12s", label);
        out << line;
        for (const auto& f : report.families) {
            const auto& e = censored ? f.effect_censored : f.effect_uncensored;
            std::snprintf(line, sizeof(line), " %14s", fmt(e.mean_effect).c_str());
            out << line;
        }
        if (report.has_ensemble) {
            const auto& e =
                censored ? report.ensemble_effect_censored : report.ensemble_effect_uncensored;
            std::snprintf(line, sizeof(line), " %14s", fmt(e.mean_effect).c_str());
            out << line;
        }
        out << "\n";
        std::snprintf(line, sizeof(line), "  %-12s", "");
        out << line;
        for (const auto& f : report.families) {
            const auto& e = censored ? f.effect_censored : f.effect_uncensored;
            std::snprintf(line, sizeof(line), " %14s", ("(" + fmt(e.standard_error) + ")").c_str());
            out << line;
        }
        if (report.has_ensemble) {
            const auto& e =
                censored ? report.ensemble_effect_censored : report.ensemble_effect_uncensored;
            std::snprintf(line, sizeof(line), " %14s", ("(" + fmt(e.standard_error) + ")").c_str());
            out << line;
        }
        out << "\n";
    };
    effect_row("Uncensored", false);
    effect_row("Censored", true);
    return out.str();
}

}  // namespace demand
