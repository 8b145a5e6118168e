#include "demand/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <stdexcept>

namespace demand {

namespace {

struct RawColumns {
    Matrix X;
    std::vector<std::string> names;
};

std::string pad2(int v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

// Assembles the pre-standardization columns: log price, weight, the two
// indicator variables, then C-1 dummies per categorical (lexicographically
// first level is the reference).
RawColumns raw_columns(const Dataset& ds, const std::vector<std::string>& year_levels) {
    const Index n = static_cast<Index>(ds.rows.size());
    std::vector<std::string> names = {"log_price", "weight", "promotion", "holiday"};

    struct DummySpec {
        std::string variable;
        std::string level;
        std::function<std::string(const Observation&)> value_of;
    };
    std::vector<DummySpec> dummies;

    auto add_categorical = [&](const std::string& var, std::vector<std::string> levels,
                               std::function<std::string(const Observation&)> value_of) {
        std::sort(levels.begin(), levels.end());
        for (size_t i = 1; i < levels.size(); ++i)  // levels[0] is the reference
            dummies.push_back({var, levels[i], value_of});
    };

    add_categorical("brand", ds.vocab.at("brand"), [](const Observation& o) { return o.brand; });
    add_categorical("country", ds.vocab.at("country"),
                    [](const Observation& o) { return o.country; });
    add_categorical("colour", ds.vocab.at("colour"), [](const Observation& o) { return o.colour; });
    add_categorical("form", ds.vocab.at("form"), [](const Observation& o) { return o.form; });
    add_categorical("flour", ds.vocab.at("flour"), [](const Observation& o) { return o.flour; });
    add_categorical("package_type", ds.vocab.at("package_type"),
                    [](const Observation& o) { return o.package_type; });
    add_categorical("store_type", ds.vocab.at("store_type"),
                    [](const Observation& o) { return o.store_type; });
    add_categorical("year", year_levels,
                    [](const Observation& o) { return std::to_string(o.year); });
    {
        std::vector<std::string> months;
        for (int m = 1; m <= 12; ++m) months.push_back(pad2(m));
        add_categorical("month", months, [](const Observation& o) { return pad2(o.month); });
    }
    {
        std::vector<std::string> dows;
        for (int d = 0; d < 7; ++d) dows.push_back(std::to_string(d));
        add_categorical("day_of_week", dows,
                        [](const Observation& o) { return std::to_string(o.day_of_week); });
    }

    for (const auto& spec : dummies) names.push_back(spec.variable + "=" + spec.level);

    Matrix X(n, static_cast<Index>(names.size()));
    for (Index i = 0; i < n; ++i) {
        const Observation& o = ds.rows[static_cast<size_t>(i)];
        X(i, 0) = std::log(o.price);
        X(i, 1) = o.weight;
        X(i, 2) = o.promotion;
        X(i, 3) = o.holiday;
        for (size_t j = 0; j < dummies.size(); ++j)
            X(i, 4 + static_cast<Index>(j)) = dummies[j].value_of(o) == dummies[j].level ? 1.0 : 0.0;
    }
    return {std::move(X), std::move(names)};
}

std::vector<std::string> observed_year_levels(const Dataset& ds) {
    std::set<int> years;
    for (const auto& o : ds.rows) years.insert(o.year);
    std::vector<std::string> out;
    for (int y : years) out.push_back(std::to_string(y));
    return out;
}

}  // namespace

Index column_index(const std::vector<std::string>& names, const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("column not found: " + name);
    return static_cast<Index>(it - names.begin());
}

std::pair<DesignMatrix, EncodingPlan> build_design(const Dataset& ds, const SplitIndices& split) {
    if (split.train.empty()) throw std::invalid_argument("build_design: empty training split");
    if (ds.rows.empty()) throw std::invalid_argument("build_design: empty dataset");

    EncodingPlan plan;
    plan.year_levels = observed_year_levels(ds);
    RawColumns raw = raw_columns(ds, plan.year_levels);

    const Index n_train = static_cast<Index>(split.train.size());
    const double denom = static_cast<double>(n_train - 1);
    if (n_train < 2) throw std::invalid_argument("build_design: training split too small");

    // Standardization parameters from the training rows only; constant
    // columns never make it into the design.
    std::vector<Index> kept;
    std::vector<ColumnStats> stats;
    for (Index j = 0; j < raw.X.cols(); ++j) {
        double s = 0, ss = 0;
        for (Index r : split.train) {
            const double v = raw.X(r, j);
            s += v;
        }
        const double m = s / static_cast<double>(n_train);
        for (Index r : split.train) {
            const double v = raw.X(r, j) - m;
            ss += v * v;
        }
        const double sd = std::sqrt(ss / denom);
        if (sd < 1e-12) {
            std::cerr << "build_design: dropping constant column '" << raw.names[j] << "'\n";
            plan.dropped_columns.push_back({raw.names[static_cast<size_t>(j)], "constant"});
            continue;
        }
        kept.push_back(j);
        stats.push_back({m, sd});
    }
    if (kept.empty()) throw std::invalid_argument("build_design: no usable columns");

    // Exact collinearity scan on the standardized training columns, in
    // column order so later duplicates are the ones dropped. Modified
    // Gram-Schmidt with reorthogonalization; relative tolerance 1e-10.
    const double tol = 1e-10;
    Matrix q(n_train, static_cast<Index>(kept.size()));
    Index rank = 0;
    std::vector<Index> independent;
    for (size_t kj = 0; kj < kept.size(); ++kj) {
        const Index j = kept[kj];
        Vector v(n_train);
        for (Index i = 0; i < n_train; ++i)
            v[i] = (raw.X(split.train[static_cast<size_t>(i)], j) - stats[kj].mean) / stats[kj].sd;
        const double orig_norm = v.norm();
        for (int pass = 0; pass < 2; ++pass)
            if (rank > 0) v.noalias() -= q.leftCols(rank) * (q.leftCols(rank).transpose() * v);
        if (v.norm() <= tol * orig_norm) {
            plan.dropped_columns.push_back({raw.names[static_cast<size_t>(j)], "collinear"});
            continue;
        }
        q.col(rank) = v / v.norm();
        ++rank;
        independent.push_back(j);
        plan.column_names.push_back(raw.names[static_cast<size_t>(j)]);
        plan.column_stats.push_back(stats[kj]);
    }

    return {build_design(ds, plan), plan};
}

DesignMatrix build_design(const Dataset& ds, const EncodingPlan& plan) {
    RawColumns raw = raw_columns(ds, plan.year_levels);
    const Index n = raw.X.rows();
    const Index k = static_cast<Index>(plan.column_names.size());

    DesignMatrix dm;
    dm.X.resize(n, k);
    dm.column_names = plan.column_names;
    for (Index j = 0; j < k; ++j) {
        const Index src = column_index(raw.names, plan.column_names[static_cast<size_t>(j)]);
        const ColumnStats& cs = plan.column_stats[static_cast<size_t>(j)];
        dm.X.col(j) = ((raw.X.col(src).array() - cs.mean) / cs.sd).matrix();
    }

    dm.y.resize(n);
    dm.d.resize(n);
    dm.row_keys.reserve(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Observation& o = ds.rows[static_cast<size_t>(i)];
        dm.y[i] = static_cast<double>(o.sales);
        dm.d[i] = o.sales == 0 ? 1 : 0;
        dm.row_keys.push_back({o.sku_id, o.store_id, o.date});
    }
    return dm;
}

}  // namespace demand
