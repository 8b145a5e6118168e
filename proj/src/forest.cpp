#include "demand/forest.hpp"

#include "demand/linear.hpp"
#include "demand/parallel.hpp"
#include "demand/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace demand {

double Tree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int node = 0;
    while (nodes[static_cast<size_t>(node)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<size_t>(node)];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<size_t>(node)].value;
}

namespace {

struct TreeBuilder {
    const Eigen::Ref<const Matrix>& x;
    const Eigen::Ref<const Vector>& y;
    const ForestOptions& opts;
    Rng& rng;
    std::vector<Index>& rows;          // bootstrap row ids, partitioned in place
    std::vector<TreeNode> nodes;
    std::vector<int> feature_pool;
    std::vector<std::pair<double, double>> scratch;

    int build(size_t start, size_t end) {
        const size_t m = end - start;
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        double sum = 0.0, sumsq = 0.0;
        for (size_t i = start; i < end; ++i) {
            const double v = y[rows[i]];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / static_cast<double>(m);
        const double sse = sumsq - sum * mean;

        auto make_leaf = [&]() {
            TreeNode& nd = nodes[static_cast<size_t>(id)];
            nd.feature = -1;
            nd.value = opts.classification ? (mean > 0.5 ? 1.0 : 0.0) : mean;
            return id;
        };

        if (m <= static_cast<size_t>(opts.nodesize) || sse <= 1e-12 * static_cast<double>(m))
            return make_leaf();
        if (opts.max_nodes > 0 && static_cast<int>(nodes.size()) + 2 > opts.max_nodes)
            return make_leaf();

        // Sample mtry candidate features without replacement.
        const int k = static_cast<int>(x.cols());
        const int mtry = std::min(opts.mtry, k);
        for (int t = 0; t < mtry; ++t) {
            const int j = t + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(k - t)));
            std::swap(feature_pool[static_cast<size_t>(t)], feature_pool[static_cast<size_t>(j)]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = -std::numeric_limits<double>::infinity();
        scratch.resize(m);
        for (int t = 0; t < mtry; ++t) {
            const int f = feature_pool[static_cast<size_t>(t)];
            for (size_t i = 0; i < m; ++i)
                scratch[i] = {x(rows[start + i], f), y[rows[start + i]]};
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;
            double sum_left = 0.0;
            for (size_t i = 0; i + 1 < m; ++i) {
                sum_left += scratch[i].second;
                if (scratch[i + 1].first <= scratch[i].first) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(m - i - 1);
                const double sum_right = sum - sum_left;
                const double score = sum_left * sum_left / nl + sum_right * sum_right / nr;
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                     rows.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](Index r) { return x(r, best_feature) <= best_threshold; });
        const size_t mid = static_cast<size_t>(mid_it - rows.begin());
        if (mid == start || mid == end) return make_leaf();  // numeric guard

        nodes[static_cast<size_t>(id)].feature = best_feature;
        nodes[static_cast<size_t>(id)].threshold = best_threshold;
        const int left = build(start, mid);
        nodes[static_cast<size_t>(id)].left = left;
        const int right = build(mid, end);
        nodes[static_cast<size_t>(id)].right = right;
        return id;
    }
};

}  // namespace

Forest forest_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                  const ForestOptions& opts) {
    const Index n = X.rows();
    const Index k = X.cols();
    if (n != y.size()) throw std::invalid_argument("forest_fit: size mismatch");
    if (opts.ntree < 1) throw std::invalid_argument("forest_fit: ntree must be >= 1");
    if (opts.mtry < 1 || opts.mtry > k)
        throw std::invalid_argument("forest_fit: mtry must be in [1, k]");
    if (opts.nodesize < 1) throw std::invalid_argument("forest_fit: nodesize must be >= 1");
    // nodesize >= n is an explicit stump request; otherwise the sample must
    // be large enough to split at all.
    if (n < 2 * opts.nodesize && opts.nodesize < n)
        throw std::invalid_argument("forest_fit: need at least 2*nodesize rows");

    Forest forest;
    forest.opts = opts;
    forest.trees.resize(static_cast<size_t>(opts.ntree));
    forest.inbag.assign(static_cast<size_t>(opts.ntree),
                        std::vector<uint16_t>(static_cast<size_t>(n), 0));

    parallel_for(opts.ntree, [&](int64_t t) {
        Rng rng(mix_seed(opts.seed, static_cast<uint64_t>(t)));
        std::vector<Index> rows(static_cast<size_t>(n));
        auto& counts = forest.inbag[static_cast<size_t>(t)];
        for (Index i = 0; i < n; ++i) {
            const Index r = static_cast<Index>(rng.uniform_int(static_cast<uint64_t>(n)));
            rows[static_cast<size_t>(i)] = r;
            if (counts[static_cast<size_t>(r)] < 65535) ++counts[static_cast<size_t>(r)];
        }
        TreeBuilder builder{X, y, opts, rng, rows};
        builder.feature_pool.resize(static_cast<size_t>(k));
        std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);
        builder.nodes.reserve(static_cast<size_t>(2 * n / std::max(1, opts.nodesize) + 4));
        builder.build(0, static_cast<size_t>(n));
        forest.trees[static_cast<size_t>(t)].nodes = std::move(builder.nodes);
    });
    return forest;
}

Vector Forest::predict(const Eigen::Ref<const Matrix>& X) const {
    if (trees.empty()) throw std::runtime_error("forest predict: no trees");
    Vector out(X.rows());
    const double inv = 1.0 / static_cast<double>(trees.size());
    parallel_for(X.rows(), [&](int64_t i) {
        double acc = 0.0;
        for (const auto& tree : trees) acc += tree.predict_row(X.row(i));
        out[i] = acc * inv;
    });
    return out;
}

Vector forest_oob_predictions(const Forest& forest, const Eigen::Ref<const Matrix>& X) {
    if (forest.inbag.empty() || forest.inbag[0].size() != static_cast<size_t>(X.rows()))
        throw std::invalid_argument("forest_oob_predictions: in-bag counts unavailable");
    Vector out(X.rows());
    parallel_for(X.rows(), [&](int64_t i) {
        double acc = 0.0;
        int used = 0;
        for (size_t t = 0; t < forest.trees.size(); ++t) {
            if (forest.inbag[t][static_cast<size_t>(i)] != 0) continue;
            acc += forest.trees[t].predict_row(X.row(i));
            ++used;
        }
        out[i] = used > 0 ? acc / used : std::numeric_limits<double>::quiet_NaN();
    });
    return out;
}

double forest_oob_rmse(const Forest& forest, const Eigen::Ref<const Matrix>& X,
                       const Eigen::Ref<const Vector>& y) {
    const Vector oob = forest_oob_predictions(forest, X);
    double acc = 0.0;
    Index used = 0;
    for (Index i = 0; i < oob.size(); ++i) {
        if (std::isnan(oob[i])) continue;
        const double e = oob[i] - y[i];
        acc += e * e;
        ++used;
    }
    if (used == 0) throw std::runtime_error("forest_oob_rmse: no out-of-bag rows");
    return std::sqrt(acc / static_cast<double>(used));
}

int select_mtry(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                const ForestOptions& opts, std::vector<int> candidates, int folds, uint64_t seed) {
    const Index k = X.cols();
    if (candidates.empty()) {
        for (int c = static_cast<int>(k); c >= 1; c /= 2) candidates.push_back(c);
        if (candidates.back() != 1) candidates.push_back(1);
    }
    for (int c : candidates)
        if (c < 1 || c > k) throw std::invalid_argument("select_mtry: candidate out of range");
    if (candidates.size() == 1) return candidates[0];

    const auto fold = fold_assignment(X.rows(), folds, mix_seed(seed, 0xf05e57));
    double best_rmse = std::numeric_limits<double>::infinity();
    int best_mtry = candidates[0];
    for (size_t ci = 0; ci < candidates.size(); ++ci) {
        double acc = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<Index> tr, ho;
            for (Index i = 0; i < X.rows(); ++i)
                (fold[static_cast<size_t>(i)] == f ? ho : tr).push_back(i);
            ForestOptions o = opts;
            o.mtry = candidates[ci];
            o.seed = mix_seed(seed, ci * static_cast<size_t>(folds) + static_cast<size_t>(f));
            const Forest forest = forest_fit(take_rows(X, tr), take_rows(y, tr), o);
            const Vector pred = forest.predict(take_rows(X, ho));
            const Vector actual = take_rows(y, ho);
            acc += std::sqrt((pred - actual).squaredNorm() / static_cast<double>(ho.size()));
        }
        const double rmse = acc / folds;
        if (rmse < best_rmse - 1e-12 ||
            (std::abs(rmse - best_rmse) <= 1e-12 && candidates[ci] < best_mtry)) {
            best_rmse = rmse;
            best_mtry = candidates[ci];
        }
    }
    return best_mtry;
}

}  // namespace demand
