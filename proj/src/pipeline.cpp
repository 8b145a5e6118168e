#include "demand/pipeline.hpp"

#include "demand/censored.hpp"
#include "demand/design.hpp"
#include "demand/ensemble.hpp"
#include "demand/parallel.hpp"
#include "demand/rng.hpp"
#include "demand/split.hpp"
#include "demand/version.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace demand {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + what + ": " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
}

struct Timer {
    std::string label;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    explicit Timer(std::string l) : label(std::move(l)) {}
    ~Timer() {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        std::cerr << label << " took " << ms << " ms\n";
    }
};

}  // namespace

std::string censored_model_file(Family family) {
    return "censored_" + to_string(family) + ".json";
}
std::string uncensored_model_file(Family family) {
    return "uncensored_" + to_string(family) + ".json";
}

RunConfig run_config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(std::string("invalid config JSON: ") + e.what());
    }
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.out_dir = j.value("out_dir", c.out_dir);

    if (j.contains("data")) {
        const auto& dj = j.at("data");
        if (dj.contains("dgp")) {
            const auto& g = dj.at("dgp");
            DgpConfig dgp;
            dgp.n = g.value("n", dgp.n);
            dgp.n_skus = g.value("n_skus", dgp.n_skus);
            dgp.n_stores = g.value("n_stores", dgp.n_stores);
            dgp.n_days = g.value("n_days", dgp.n_days);
            dgp.beta_price = g.value("beta_price", dgp.beta_price);
            dgp.noise_sd = g.value("noise_sd", dgp.noise_sd);
            dgp.target_zero_fraction = g.value("target_zero_fraction", dgp.target_zero_fraction);
            dgp.promo_rate = g.value("promo_rate", dgp.promo_rate);
            dgp.holiday_rate = g.value("holiday_rate", dgp.holiday_rate);
            dgp.dead_brand_share = g.value("dead_brand_share", dgp.dead_brand_share);
            dgp.dead_brand_effect = g.value("dead_brand_effect", dgp.dead_brand_effect);
            dgp.beta_scale = g.value("beta_scale", dgp.beta_scale);
            if (g.contains("intercept") && !g.at("intercept").is_null())
                dgp.intercept = g.at("intercept").get<double>();
            if (g.contains("beta_other") && !g.at("beta_other").is_null())
                dgp.beta_other = g.at("beta_other").get<std::vector<double>>();
            if (g.contains("interactions")) {
                const auto& ij = g.at("interactions");
                if (ij.is_string() && ij.get<std::string>() == "default") {
                    dgp.interactions = default_interactions();
                } else if (ij.is_array()) {
                    for (const auto& e : ij)
                        dgp.interactions.push_back({e.at("col_a").get<std::string>(),
                                                    e.at("col_b").get<std::string>(),
                                                    e.at("coef").get<double>()});
                } else if (!ij.is_null()) {
                    throw std::invalid_argument("config: interactions must be \"default\" or a list");
                }
            }
            dgp.seed = g.value("seed", c.seed);
            c.dgp = dgp;
        }
        c.csv_path = dj.value("csv", "");
        c.vocab_path = dj.value("vocab", "");
    }

    if (j.contains("split")) {
        const auto& sj = j.at("split");
        c.split_fractions = {sj.value("train", 0.60), sj.value("validation", 0.15),
                             sj.value("test", 0.25)};
        if (sj.contains("seed") && !sj.at("seed").is_null())
            c.split_seed = sj.at("seed").get<uint64_t>();
    }

    if (j.contains("families")) {
        c.families.clear();
        for (const auto& f : j.at("families"))
            c.families.push_back(family_from_string(f.get<std::string>()));
        if (c.families.empty()) throw std::invalid_argument("config: families list is empty");
    }

    if (j.contains("learners")) {
        const auto& lj = j.at("learners");
        c.folds = lj.value("folds", c.folds);
        c.lambda_count = lj.value("lambda_count", c.lambda_count);
        c.lambda_min_ratio = lj.value("lambda_min_ratio", c.lambda_min_ratio);
        c.ntree = lj.value("ntree", c.ntree);
        c.nodesize = lj.value("nodesize", c.nodesize);
        c.max_nodes = lj.value("max_nodes", c.max_nodes);
        if (lj.contains("mtry") && !lj.at("mtry").is_null()) {
            const auto& mj = lj.at("mtry");
            if (mj.is_string()) {
                if (mj.get<std::string>() != "cv")
                    throw std::invalid_argument("config: mtry must be \"cv\" or an integer");
            } else {
                c.mtry = mj.get<int>();
            }
        }
    }

    if (j.contains("alpha_grid") && !j.at("alpha_grid").is_null())
        c.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();

    c.ensemble = j.value("ensemble", true);

    if (j.contains("evaluation")) {
        const auto& ej = j.at("evaluation");
        c.bootstrap_replications = ej.value("bootstrap_replications", c.bootstrap_replications);
        c.effect_replications = ej.value("effect_replications", c.effect_replications);
        if (ej.contains("perturbation_range")) {
            c.perturbation_range = {ej.at("perturbation_range")[0].get<double>(),
                                    ej.at("perturbation_range")[1].get<double>()};
        }
    }
    return c;
}

std::string run_config_to_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["out_dir"] = c.out_dir;
    ordered_json data;
    if (c.dgp.has_value()) {
        const DgpConfig& g = *c.dgp;
        ordered_json gj;
        gj["n"] = g.n;
        gj["n_skus"] = g.n_skus;
        gj["n_stores"] = g.n_stores;
        gj["n_days"] = g.n_days;
        gj["beta_price"] = g.beta_price;
        gj["noise_sd"] = g.noise_sd;
        gj["target_zero_fraction"] = g.target_zero_fraction;
        gj["promo_rate"] = g.promo_rate;
        gj["holiday_rate"] = g.holiday_rate;
        gj["dead_brand_share"] = g.dead_brand_share;
        gj["dead_brand_effect"] = g.dead_brand_effect;
        gj["beta_scale"] = g.beta_scale;
        if (g.intercept.has_value()) gj["intercept"] = *g.intercept;
        if (g.beta_other.has_value()) gj["beta_other"] = *g.beta_other;
        ordered_json inters = ordered_json::array();
        for (const auto& it : g.interactions)
            inters.push_back({{"col_a", it.col_a}, {"col_b", it.col_b}, {"coef", it.coef}});
        gj["interactions"] = std::move(inters);
        gj["seed"] = g.seed;
        data["dgp"] = std::move(gj);
    }
    if (!c.csv_path.empty()) data["csv"] = c.csv_path;
    if (!c.vocab_path.empty()) data["vocab"] = c.vocab_path;
    j["data"] = std::move(data);
    j["split"] = {{"train", c.split_fractions[0]},
                  {"validation", c.split_fractions[1]},
                  {"test", c.split_fractions[2]}};
    if (c.split_seed.has_value()) j["split"]["seed"] = *c.split_seed;
    ordered_json fams = ordered_json::array();
    for (Family f : c.families) fams.push_back(to_string(f));
    j["families"] = std::move(fams);
    j["learners"] = {{"folds", c.folds},
                     {"lambda_count", c.lambda_count},
                     {"lambda_min_ratio", c.lambda_min_ratio},
                     {"ntree", c.ntree},
                     {"nodesize", c.nodesize},
                     {"max_nodes", c.max_nodes}};
    if (c.mtry.has_value())
        j["learners"]["mtry"] = *c.mtry;
    else
        j["learners"]["mtry"] = "cv";
    if (!c.alpha_grid.empty()) j["alpha_grid"] = c.alpha_grid;
    j["ensemble"] = c.ensemble;
    j["evaluation"] = {{"bootstrap_replications", c.bootstrap_replications},
                       {"effect_replications", c.effect_replications},
                       {"perturbation_range",
                        {c.perturbation_range.first, c.perturbation_range.second}}};
    j["version"] = k_version;
    return j.dump(2);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return run_config_from_json(text);
}

namespace {

std::string data_csv(const RunConfig& c) {
    if (!c.csv_path.empty()) return c.csv_path;
    return c.out_dir + "/data/dataset.csv";
}
std::string data_vocab(const RunConfig& c) {
    if (!c.vocab_path.empty()) return c.vocab_path;
    return c.out_dir + "/data/vocab.json";
}

void write_config_echo(const RunConfig& c) {
    write_text_file(c.out_dir + "/config.json", run_config_to_json(c));
}

ordered_json plan_to_json(const EncodingPlan& plan) {
    ordered_json j;
    j["columns"] = plan.column_names;
    ordered_json stats = ordered_json::array();
    for (const auto& s : plan.column_stats) stats.push_back({{"mean", s.mean}, {"sd", s.sd}});
    j["stats"] = std::move(stats);
    j["year_levels"] = plan.year_levels;
    ordered_json dropped = ordered_json::array();
    for (const auto& d : plan.dropped_columns)
        dropped.push_back({{"name", d.name}, {"reason", d.reason}});
    j["dropped"] = std::move(dropped);
    return j;
}

EncodingPlan plan_from_json(const ordered_json& j) {
    EncodingPlan plan;
    plan.column_names = j.at("columns").get<std::vector<std::string>>();
    for (const auto& s : j.at("stats"))
        plan.column_stats.push_back({s.at("mean").get<double>(), s.at("sd").get<double>()});
    plan.year_levels = j.at("year_levels").get<std::vector<std::string>>();
    for (const auto& d : j.at("dropped"))
        plan.dropped_columns.push_back(
            {d.at("name").get<std::string>(), d.at("reason").get<std::string>()});
    return plan;
}

ordered_json split_to_json(const SplitIndices& split) {
    return {{"train", split.train}, {"validation", split.validation}, {"test", split.test}};
}

SplitIndices split_from_json(const ordered_json& j) {
    SplitIndices s;
    s.train = j.at("train").get<std::vector<Index>>();
    s.validation = j.at("validation").get<std::vector<Index>>();
    s.test = j.at("test").get<std::vector<Index>>();
    return s;
}

struct FittedRun {
    std::vector<CensoredModel> censored;
    std::vector<CensoredModel> uncensored;
    EnsembleModel ensemble_censored, ensemble_uncensored;
    bool has_ensemble = false;
};

LearnerSpec learner_spec_for(const RunConfig& c, Family family, size_t family_idx) {
    LearnerSpec spec;
    spec.family = family;
    spec.task = Task::regression;
    spec.folds = c.folds;
    spec.lambda_count = c.lambda_count;
    spec.lambda_min_ratio = c.lambda_min_ratio;
    spec.ntree = c.ntree;
    spec.mtry = c.mtry;
    spec.nodesize = c.nodesize;
    spec.max_nodes = c.max_nodes;
    spec.seed = mix_seed(c.seed, 0xfa0000 + family_idx);
    return spec;
}

}  // namespace

void cmd_generate(const RunConfig& config) {
    if (!config.dgp.has_value())
        throw std::invalid_argument("generate: the config has no data.dgp block");
    Timer timer("generate");
    // Validate and build in memory before touching the filesystem.
    auto [ds, truth] = generate(*config.dgp);
    fs::create_directories(config.out_dir + "/data");
    save_dataset(ds, data_csv(config), data_vocab(config));
    save_ground_truth(truth, config.out_dir + "/data/ground_truth.json");
    write_config_echo(config);
    std::cerr << "generate: " << ds.rows.size() << " rows, zero fraction "
              << truth.achieved_zero_fraction << "\n";
}

void cmd_fit(const RunConfig& config) {
    set_default_threads(config.threads);
    Timer timer("fit");
    const Dataset ds = load_dataset(data_csv(config), data_vocab(config));
    const SplitIndices split = make_split(static_cast<Index>(ds.rows.size()),
                                          config.split_fractions,
                                          config.split_seed.value_or(config.seed));
    auto [dm, plan] = build_design(ds, split);

    const Matrix x_train = take_rows(dm.X, split.train);
    const Vector y_train = take_rows(dm.y, split.train);
    const Matrix x_val = take_rows(dm.X, split.validation);
    const Vector y_val = take_rows(dm.y, split.validation);

    const std::vector<double> alpha_grid =
        config.alpha_grid.empty() ? default_alpha_grid() : config.alpha_grid;

    fs::create_directories(config.out_dir + "/models");
    write_text_file(config.out_dir + "/plan.json", plan_to_json(plan).dump(2));
    write_text_file(config.out_dir + "/split.json", split_to_json(split).dump(2));
    write_config_echo(config);

    FittedRun run;
    for (size_t fi = 0; fi < config.families.size(); ++fi) {
        const Family family = config.families[fi];
        const LearnerSpec spec = learner_spec_for(config, family, fi);
        std::cerr << "fit: censored " << to_string(family) << "\n";
        CensoredModel cen =
            fit_censored(x_train, y_train, x_val, y_val, spec, alpha_grid, dm.column_names);
        std::cerr << "fit: uncensored " << to_string(family) << "\n";
        CensoredModel unc = fit_uncensored(x_train, y_train, spec, dm.column_names);
        save_censored(cen, config.out_dir + "/models/" + censored_model_file(family));
        save_censored(unc, config.out_dir + "/models/" + uncensored_model_file(family));
        run.censored.push_back(std::move(cen));
        run.uncensored.push_back(std::move(unc));
    }

    if (config.ensemble) {
        std::cerr << "fit: ensembles\n";
        std::vector<std::string> cen_names, unc_names;
        for (Family f : config.families) {
            cen_names.push_back(censored_model_file(f));
            unc_names.push_back(uncensored_model_file(f));
        }
        run.ensemble_censored = fit_ensemble(run.censored, cen_names, x_val, y_val);
        run.ensemble_uncensored = fit_ensemble(run.uncensored, unc_names, x_val, y_val);
        save_ensemble(run.ensemble_censored, config.out_dir + "/models/ensemble_censored.json");
        save_ensemble(run.ensemble_uncensored, config.out_dir + "/models/ensemble_uncensored.json");
    }
}

void cmd_evaluate(const RunConfig& config) {
    set_default_threads(config.threads);
    Timer timer("evaluate");
    const Dataset ds = load_dataset(data_csv(config), data_vocab(config));
    const EncodingPlan plan = plan_from_json(read_json_file(config.out_dir + "/plan.json", "plan"));
    const SplitIndices split =
        split_from_json(read_json_file(config.out_dir + "/split.json", "split"));
    const DesignMatrix dm = build_design(ds, plan);
    const Index price_col = column_index(dm.column_names, "log_price");

    struct SplitView {
        Matrix X;
        Vector y;
        std::vector<std::string> sku;
    };
    auto view = [&](const std::vector<Index>& rows) {
        SplitView v;
        v.X = take_rows(dm.X, rows);
        v.y = take_rows(dm.y, rows);
        for (Index r : rows) v.sku.push_back(dm.row_keys[static_cast<size_t>(r)].sku_id);
        return v;
    };
    const SplitView train = view(split.train);
    const SplitView val = view(split.validation);
    const SplitView test = view(split.test);

    const std::string model_dir = config.out_dir + "/models";
    EvalReport report;
    std::vector<CensoredModel> cen_models, unc_models;
    Matrix p_val_cen(val.y.size(), static_cast<Index>(config.families.size()));
    Matrix p_test_cen(test.y.size(), static_cast<Index>(config.families.size()));
    Matrix p_val_unc = p_val_cen, p_test_unc = p_test_cen;

    for (size_t fi = 0; fi < config.families.size(); ++fi) {
        const Family family = config.families[fi];
        std::cerr << "evaluate: " << to_string(family) << "\n";
        CensoredModel cen = load_censored(model_dir + "/" + censored_model_file(family));
        CensoredModel unc = load_censored(model_dir + "/" + uncensored_model_file(family));

        FamilyEval fe;
        fe.family = to_string(family);
        fe.alpha = cen.alpha;
        fe.rmse_train_censored = rmse(predict_censored(cen, train.X), train.y);
        fe.rmse_train_uncensored = rmse(predict_censored(unc, train.X), train.y);
        const Vector val_cen = predict_censored(cen, val.X);
        const Vector val_unc = predict_censored(unc, val.X);
        fe.rmse_val_censored = rmse(val_cen, val.y);
        fe.rmse_val_uncensored = rmse(val_unc, val.y);
        const Vector test_cen = predict_censored(cen, test.X);
        const Vector test_unc = predict_censored(unc, test.X);
        fe.rmse_test_censored = rmse(test_cen, test.y);
        fe.rmse_test_uncensored = rmse(test_unc, test.y);
        p_val_cen.col(static_cast<Index>(fi)) = val_cen;
        p_val_unc.col(static_cast<Index>(fi)) = val_unc;
        p_test_cen.col(static_cast<Index>(fi)) = test_cen;
        p_test_unc.col(static_cast<Index>(fi)) = test_unc;

        const CensoredModel& cen_ref = cen;
        const CensoredModel& unc_ref = unc;
        fe.effect_censored = marginal_effect(
            [&cen_ref](const Matrix& x) { return predict_censored(cen_ref, x); }, test.X,
            price_col, test.sku, config.effect_replications,
            mix_seed(config.seed, 0xeffec0 + fi), config.perturbation_range);
        fe.effect_uncensored = marginal_effect(
            [&unc_ref](const Matrix& x) { return predict_censored(unc_ref, x); }, test.X,
            price_col, test.sku, config.effect_replications,
            mix_seed(config.seed, 0xeffec0 + fi), config.perturbation_range);

        if (family == Family::ols) {
            report.has_ols_coefficients = true;
            report.price_coef_uncensored =
                bootstrap_ols_coef(train.X, train.y, train.sku, price_col,
                                   config.bootstrap_replications, mix_seed(config.seed, 0xc0ef0));
            const Vector p_train = cen.classifier.predict(train.X);
            std::vector<Index> keep;
            for (Index i = 0; i < p_train.size(); ++i)
                if (!(p_train[i] > cen.alpha)) keep.push_back(i);
            std::vector<std::string> keep_sku;
            for (Index i : keep) keep_sku.push_back(train.sku[static_cast<size_t>(i)]);
            report.price_coef_censored =
                bootstrap_ols_coef(take_rows(train.X, keep), take_rows(train.y, keep), keep_sku,
                                   price_col, config.bootstrap_replications,
                                   mix_seed(config.seed, 0xc0ef1));
        }
        report.families.push_back(std::move(fe));
        cen_models.push_back(std::move(cen));
        unc_models.push_back(std::move(unc));
    }

    if (config.ensemble) {
        std::cerr << "evaluate: ensembles\n";
        EnsembleModel ens_cen = load_ensemble(model_dir + "/ensemble_censored.json", model_dir);
        EnsembleModel ens_unc = load_ensemble(model_dir + "/ensemble_uncensored.json", model_dir);
        report.has_ensemble = true;
        for (size_t fi = 0; fi < config.families.size(); ++fi) {
            report.families[fi].weight_censored = ens_cen.weights[static_cast<Index>(fi)];
            report.families[fi].weight_uncensored = ens_unc.weights[static_cast<Index>(fi)];
        }
        const Vector ens_val_cen = p_val_cen * ens_cen.weights;
        const Vector ens_val_unc = p_val_unc * ens_unc.weights;
        const Vector ens_test_cen = p_test_cen * ens_cen.weights;
        const Vector ens_test_unc = p_test_unc * ens_unc.weights;
        report.ensemble_rmse_val_censored = rmse(ens_val_cen, val.y);
        report.ensemble_rmse_val_uncensored = rmse(ens_val_unc, val.y);
        report.ensemble_rmse_test_censored = rmse(ens_test_cen, test.y);
        report.ensemble_rmse_test_uncensored = rmse(ens_test_unc, test.y);
        report.ensemble_diff =
            bootstrap_rmse_diff(ens_test_unc, ens_test_cen, test.y, test.sku,
                                config.bootstrap_replications, mix_seed(config.seed, 0xb007));
        report.ensemble_effect_censored = marginal_effect(
            [&ens_cen](const Matrix& x) { return predict_ensemble(ens_cen, x); }, test.X,
            price_col, test.sku, config.effect_replications, mix_seed(config.seed, 0xeffee0),
            config.perturbation_range);
        report.ensemble_effect_uncensored = marginal_effect(
            [&ens_unc](const Matrix& x) { return predict_ensemble(ens_unc, x); }, test.X,
            price_col, test.sku, config.effect_replications, mix_seed(config.seed, 0xeffee1),
            config.perturbation_range);
    }

    write_text_file(config.out_dir + "/evaluation.json", eval_report_to_json(report));
}

void cmd_report(const std::string& run_dir) {
    const std::string eval_path = run_dir + "/evaluation.json";
    std::ifstream in(eval_path);
    if (!in)
        throw std::invalid_argument("report: missing evaluation artifacts in " + run_dir +
                                    " (run evaluate first)");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const EvalReport report = eval_report_from_json(text);
    write_text_file(run_dir + "/report.json", eval_report_to_json(report));
    write_text_file(run_dir + "/report.txt", render_report_text(report));
    std::cout << render_report_text(report);
}

}  // namespace demand
