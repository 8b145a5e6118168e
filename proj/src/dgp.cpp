#include "demand/dgp.hpp"

#include "demand/rng.hpp"
#include "demand/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace demand {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string level_name(const std::string& prefix, int i) {
    std::string num = std::to_string(i + 1);
    if (num.size() < 2) num = "0" + num;
    return prefix + num;
}

std::vector<std::string> levels(const std::string& prefix, int count) {
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(level_name(prefix, i));
    return out;
}

std::string add_days(int start_year, int offset) {
    // Sequential calendar from Jan 1 of start_year.
    static const int days_in[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int y = start_year, m = 1, d = 1;
    int left = offset;
    while (true) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        const int dim = days_in[m - 1] + (m == 2 && leap ? 1 : 0);
        if (left < dim - d + 1) {
            d += left;
            break;
        }
        left -= dim - d + 1;
        d = 1;
        if (++m > 12) {
            m = 1;
            ++y;
        }
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace

std::vector<Interaction> default_interactions() {
    return {
        {"promotion", "weight", 0.6},
        {"holiday", "weight", 0.4},
        {"promotion", "holiday", 0.5},
        {"weight", "package_type=P02", 0.5},
    };
}

std::pair<Dataset, GroundTruth> generate(const DgpConfig& config) {
    if (config.n < 1) throw std::invalid_argument("generate: n must be positive");
    if (!(config.noise_sd > 0)) throw std::invalid_argument("generate: noise_sd must be positive");
    if (!(config.target_zero_fraction > 0 && config.target_zero_fraction < 1) &&
        !config.intercept.has_value())
        throw std::invalid_argument("generate: target_zero_fraction must lie in (0,1)");
    if (config.n_skus < 2 || config.n_stores < 1 || config.n_days < 1)
        throw std::invalid_argument("generate: bad panel dimensions");

    Dataset ds;
    ds.vocab["brand"] = levels("B", 38);
    ds.vocab["country"] = levels("C", 6);
    ds.vocab["colour"] = levels("COL", 5);
    ds.vocab["form"] = levels("F", 22);
    ds.vocab["flour"] = levels("FL", 8);
    ds.vocab["package_type"] = levels("P", 2);
    ds.vocab["store_type"] = levels("S", 5);

    struct Sku {
        std::string brand, country, colour, form, flour, package_type;
        double weight, base_log_price;
    };
    Rng sku_rng(mix_seed(config.seed, 1));
    std::vector<Sku> skus;
    skus.reserve(static_cast<size_t>(config.n_skus));
    for (int s = 0; s < config.n_skus; ++s) {
        Sku sku;
        sku.brand = ds.vocab["brand"][sku_rng.uniform_int(38)];
        sku.country = ds.vocab["country"][sku_rng.uniform_int(6)];
        sku.colour = ds.vocab["colour"][sku_rng.uniform_int(5)];
        sku.form = ds.vocab["form"][sku_rng.uniform_int(22)];
        sku.flour = ds.vocab["flour"][sku_rng.uniform_int(8)];
        sku.package_type = ds.vocab["package_type"][sku_rng.uniform_int(2)];
        sku.weight = std::round(sku_rng.uniform(150.0, 1000.0));
        sku.base_log_price = sku_rng.uniform(std::log(12.0), std::log(100.0));
        skus.push_back(std::move(sku));
    }

    Rng store_rng(mix_seed(config.seed, 2));
    std::vector<std::string> store_types(static_cast<size_t>(config.n_stores));
    for (auto& st : store_types) st = ds.vocab["store_type"][store_rng.uniform_int(5)];

    Rng day_rng(mix_seed(config.seed, 3));
    std::vector<std::string> dates(static_cast<size_t>(config.n_days));
    std::vector<int> holidays(static_cast<size_t>(config.n_days));
    for (int t = 0; t < config.n_days; ++t) {
        dates[static_cast<size_t>(t)] = add_days(2009, t);
        holidays[static_cast<size_t>(t)] = day_rng.bernoulli(config.holiday_rate) ? 1 : 0;
    }

    Rng row_rng(mix_seed(config.seed, 4));
    ds.rows.reserve(static_cast<size_t>(config.n));
    for (Index i = 0; i < config.n; ++i) {
        const int s = static_cast<int>(row_rng.uniform_int(static_cast<uint64_t>(config.n_skus)));
        const int st = static_cast<int>(row_rng.uniform_int(static_cast<uint64_t>(config.n_stores)));
        const int t = static_cast<int>(row_rng.uniform_int(static_cast<uint64_t>(config.n_days)));
        const Sku& sku = skus[static_cast<size_t>(s)];
        Observation o;
        o.sku_id = "SKU" + std::to_string(1000 + s);
        o.store_id = "ST" + std::to_string(100 + st);
        o.date = dates[static_cast<size_t>(t)];
        const CivilDate cd = parse_date(o.date);
        o.year = cd.year;
        o.month = cd.month;
        o.day_of_week = day_of_week(cd);
        o.promotion = row_rng.bernoulli(config.promo_rate) ? 1 : 0;
        double lp = sku.base_log_price + (o.promotion ? -0.10 : 0.0) + row_rng.normal(0.0, 0.12);
        lp = std::clamp(lp, std::log(9.0), std::log(120.0));
        o.price = std::round(std::exp(lp) * 100.0) / 100.0;
        o.weight = sku.weight;
        o.brand = sku.brand;
        o.country = sku.country;
        o.colour = sku.colour;
        o.form = sku.form;
        o.flour = sku.flour;
        o.package_type = sku.package_type;
        o.store_type = store_types[static_cast<size_t>(st)];
        o.holiday = holidays[static_cast<size_t>(t)];
        o.sales = 0;
        ds.rows.push_back(std::move(o));
    }

    // Standardized design on the full generated sample defines the latent
    // scale the coefficients live on.
    SplitIndices all;
    all.train.resize(static_cast<size_t>(config.n));
    std::iota(all.train.begin(), all.train.end(), Index{0});
    auto [dm, plan] = build_design(ds, all);
    const Index k = dm.X.cols();
    const Index price_col = column_index(dm.column_names, "log_price");

    GroundTruth truth;
    truth.column_names = dm.column_names;
    truth.noise_sd = config.noise_sd;
    truth.interactions = config.interactions;
    truth.seed = config.seed;
    truth.beta = Vector::Zero(k);
    truth.beta[price_col] = config.beta_price;
    if (config.beta_other.has_value()) {
        const auto& other = *config.beta_other;
        if (!other.empty() && static_cast<Index>(other.size()) != k - 1)
            throw std::invalid_argument("generate: beta_other must have one entry per non-price "
                                        "design column (" + std::to_string(k - 1) + ") or be empty");
        Index pos = 0;
        for (Index j = 0; j < k && !other.empty(); ++j) {
            if (j == price_col) continue;
            truth.beta[j] = other[static_cast<size_t>(pos++)];
        }
    } else {
        // Default coefficient draw. A share of brands is "dead": their
        // dummies carry a strongly negative effect, so a sizable part of
        // the censoring is structural and separable from covariates, the
        // way delisted or shelf-warmer SKUs behave.
        Rng beta_rng(mix_seed(config.seed, 5));
        for (Index j = 0; j < k; ++j) {
            if (j == price_col) continue;
            const std::string& name = dm.column_names[static_cast<size_t>(j)];
            if (name.rfind("brand=", 0) == 0 && beta_rng.bernoulli(config.dead_brand_share)) {
                truth.beta[j] =
                    config.beta_scale * (-config.dead_brand_effect + beta_rng.normal(0.0, 0.2));
                continue;
            }
            double scale = 0.35;  // dummy columns
            if (name == "weight") scale = 0.8;
            else if (name == "promotion") scale = 1.0;
            else if (name == "holiday") scale = 0.6;
            truth.beta[j] = config.beta_scale * beta_rng.normal(0.0, scale);
        }
    }

    Vector index = dm.X * truth.beta;
    for (const auto& inter : config.interactions) {
        if (inter.col_a == "log_price" || inter.col_b == "log_price")
            throw std::invalid_argument(
                "generate: interactions involving log_price are not supported (the ground-truth "
                "marginal effect assumes a linear price term)");
        const Index a = column_index(dm.column_names, inter.col_a);
        const Index b = column_index(dm.column_names, inter.col_b);
        index.array() += inter.coef * dm.X.col(a).array() * dm.X.col(b).array();
    }

    Rng noise_rng(mix_seed(config.seed, 6));
    Vector noise(config.n);
    for (Index i = 0; i < config.n; ++i) noise[i] = noise_rng.normal(0.0, config.noise_sd);

    double c0;
    if (config.intercept.has_value()) {
        c0 = *config.intercept;
    } else {
        // Empirical-quantile solve: censoring happens below latent 0.5
        // because sales are rounded to whole packs.
        Vector w = index + noise;
        std::vector<double> sorted(w.data(), w.data() + w.size());
        std::sort(sorted.begin(), sorted.end());
        const auto pos = static_cast<size_t>(
            std::clamp<double>(std::floor(config.target_zero_fraction * static_cast<double>(config.n)),
                               0.0, static_cast<double>(config.n - 1)));
        c0 = 0.5 - sorted[pos];
    }
    truth.intercept = c0;
    truth.latent_mean = (index.array() + c0).matrix();

    constexpr double k_sales_cap = 1e6;
    Index zeros = 0;
    for (Index i = 0; i < config.n; ++i) {
        const double latent = truth.latent_mean[i] + noise[i];
        const double clipped = std::min(std::max(0.0, latent), k_sales_cap);
        const long long sales = std::llround(clipped);
        ds.rows[static_cast<size_t>(i)].sales = sales;
        if (sales == 0) ++zeros;
    }
    truth.achieved_zero_fraction = static_cast<double>(zeros) / static_cast<double>(config.n);
    if (!config.intercept.has_value() &&
        std::abs(truth.achieved_zero_fraction - config.target_zero_fraction) > 0.03)
        throw std::runtime_error("generate: intercept solve missed the zero-fraction target (" +
                                 std::to_string(truth.achieved_zero_fraction) + " vs " +
                                 std::to_string(config.target_zero_fraction) +
                                 "); the configuration is infeasible");
    return {std::move(ds), std::move(truth)};
}

MonteCarloEstimate true_marginal_effect(const GroundTruth& truth, const std::vector<Index>& rows,
                                        int replications, uint64_t seed) {
    if (replications < 2) throw std::invalid_argument("true_marginal_effect: need >= 2 replications");
    if (rows.empty()) throw std::invalid_argument("true_marginal_effect: no rows");
    const Index price_col = column_index(truth.column_names, "log_price");
    const double beta_price = truth.beta[price_col];

    Vector draws(replications);
    for (int r = 0; r < replications; ++r) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(r)));
        double acc = 0.0;
        for (Index row : rows) {
            const double latent = truth.latent_mean[row] + rng.normal(0.0, truth.noise_sd);
            if (latent > 0.0) acc += beta_price;
        }
        draws[r] = acc / static_cast<double>(rows.size());
    }
    MonteCarloEstimate est;
    est.value = draws.mean();
    est.se = sample_sd(draws) / std::sqrt(static_cast<double>(replications));
    est.replications = replications;
    return est;
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
    ordered_json j;
    j["format"] = "demand.ground_truth";
    j["seed"] = truth.seed;
    j["intercept"] = truth.intercept;
    j["noise_sd"] = truth.noise_sd;
    j["achieved_zero_fraction"] = truth.achieved_zero_fraction;
    j["columns"] = truth.column_names;
    ordered_json beta = ordered_json::array();
    for (Index i = 0; i < truth.beta.size(); ++i) beta.push_back(truth.beta[i]);
    j["beta"] = std::move(beta);
    ordered_json inters = ordered_json::array();
    for (const auto& it : truth.interactions)
        inters.push_back({{"col_a", it.col_a}, {"col_b", it.col_b}, {"coef", it.coef}});
    j["interactions"] = std::move(inters);
    ordered_json lm = ordered_json::array();
    for (Index i = 0; i < truth.latent_mean.size(); ++i) lm.push_back(truth.latent_mean[i]);
    j["latent_mean"] = std::move(lm);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ground truth file: " + path);
    out << j.dump(2) << "\n";
}

GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open ground truth file: " + path);
    ordered_json j;
    in >> j;
    if (j.value("format", "") != "demand.ground_truth")
        throw std::invalid_argument("not a ground truth file: " + path);
    GroundTruth truth;
    truth.seed = j.at("seed").get<uint64_t>();
    truth.intercept = j.at("intercept").get<double>();
    truth.noise_sd = j.at("noise_sd").get<double>();
    truth.achieved_zero_fraction = j.at("achieved_zero_fraction").get<double>();
    truth.column_names = j.at("columns").get<std::vector<std::string>>();
    const auto& beta = j.at("beta");
    truth.beta.resize(static_cast<Index>(beta.size()));
    for (size_t i = 0; i < beta.size(); ++i)
        truth.beta[static_cast<Index>(i)] = beta[i].get<double>();
    for (const auto& it : j.at("interactions"))
        truth.interactions.push_back({it.at("col_a").get<std::string>(),
                                      it.at("col_b").get<std::string>(),
                                      it.at("coef").get<double>()});
    const auto& lm = j.at("latent_mean");
    truth.latent_mean.resize(static_cast<Index>(lm.size()));
    for (size_t i = 0; i < lm.size(); ++i)
        truth.latent_mean[static_cast<Index>(i)] = lm[i].get<double>();
    return truth;
}

}  // namespace demand
