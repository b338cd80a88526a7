#include "spatecon/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatecon {

namespace {

// Small deterministic generator; per-tree streams derive from the forest
// seed so results do not depend on scheduling.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next()
    {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

struct TreeBuilder {
    const arma::mat& features; // n x p
    const arma::vec& y;
    int max_features;
    int min_leaf;
    SplitMix64 rng;
    RandomForest::Tree tree;
    std::vector<std::uint32_t> scratch_features;

    explicit TreeBuilder(const arma::mat& features_, const arma::vec& y_, int max_features_,
                         int min_leaf_, std::uint64_t seed)
        : features(features_), y(y_), max_features(max_features_), min_leaf(min_leaf_), rng{seed}
    {
        tree.impurity_reduction.zeros(features.n_cols);
        scratch_features.resize(features.n_cols);
        std::iota(scratch_features.begin(), scratch_features.end(), 0u);
    }

    static double node_sse(double sum, double sum_sq, double count)
    {
        return sum_sq - sum * sum / count;
    }

    std::int32_t build(std::vector<std::uint32_t>& samples)
    {
        std::int32_t index = std::int32_t(tree.nodes.size());
        tree.nodes.emplace_back();

        double sum = 0.0, sum_sq = 0.0;
        for (std::uint32_t s : samples) {
            sum += y(s);
            sum_sq += y(s) * y(s);
        }
        double count = double(samples.size());
        double parent_sse = node_sse(sum, sum_sq, count);
        tree.nodes[index].value = sum / count;

        if (samples.size() < std::size_t(2 * min_leaf) || parent_sse <= 1e-12)
            return index;

        // random feature subset via partial Fisher-Yates
        const std::size_t p = features.n_cols;
        const std::size_t take = std::min<std::size_t>(std::size_t(max_features), p);
        for (std::size_t t = 0; t < take; ++t) {
            std::size_t pick = t + std::size_t(rng.below(p - t));
            std::swap(scratch_features[t], scratch_features[pick]);
        }

        int best_feature = -1;
        double best_reduction = 0.0;
        double best_threshold = 0.0;

        std::vector<std::uint32_t> order(samples);
        for (std::size_t t = 0; t < take; ++t) {
            const std::uint32_t f = scratch_features[t];
            std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
                double va = features(a, f), vb = features(b, f);
                return va < vb || (va == vb && a < b);
            });
            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                double yi = y(order[i]);
                left_sum += yi;
                left_sq += yi * yi;
                double va = features(order[i], f), vb = features(order[i + 1], f);
                if (va == vb)
                    continue;
                std::size_t n_left = i + 1, n_right = order.size() - n_left;
                if (n_left < std::size_t(min_leaf) || n_right < std::size_t(min_leaf))
                    continue;
                double right_sum = sum - left_sum, right_sq = sum_sq - left_sq;
                double reduction = parent_sse - node_sse(left_sum, left_sq, double(n_left)) -
                                   node_sse(right_sum, right_sq, double(n_right));
                if (reduction > best_reduction) {
                    best_reduction = reduction;
                    best_feature = int(f);
                    best_threshold = 0.5 * (va + vb);
                }
            }
        }

        if (best_feature < 0)
            return index;

        std::vector<std::uint32_t> left, right;
        left.reserve(samples.size());
        right.reserve(samples.size());
        for (std::uint32_t s : samples)
            (features(s, std::size_t(best_feature)) <= best_threshold ? left : right).push_back(s);

        tree.impurity_reduction(std::size_t(best_feature)) += best_reduction;
        std::int32_t l = build(left);
        std::int32_t r = build(right);
        tree.nodes[index].feature = best_feature;
        tree.nodes[index].threshold = best_threshold;
        tree.nodes[index].left = l;
        tree.nodes[index].right = r;
        return index;
    }
};

} // namespace

double RandomForest::Tree::predict(const arma::rowvec& x) const
{
    std::int32_t at = 0;
    while (nodes[at].feature >= 0)
        at = x(std::size_t(nodes[at].feature)) <= nodes[at].threshold ? nodes[at].left
                                                                      : nodes[at].right;
    return nodes[at].value;
}

double RandomForest::predict(const arma::rowvec& x) const
{
    double sum = 0.0;
    for (const auto& tree : trees)
        sum += tree.predict(x);
    return sum / double(trees.size());
}

arma::vec RandomForest::predict(const arma::mat& X) const
{
    arma::vec out(X.n_rows);
    for (std::size_t i = 0; i < X.n_rows; ++i)
        out(i) = predict(arma::rowvec(X.row(i)));
    return out;
}

RandomForest fit_forest(const DesignMatrix& X, const arma::vec& y, const ForestConfig& cfg,
                        const ExecSpec& exec)
{
    const std::size_t p = X.p();
    const std::size_t n = X.n();
    if (p == 0)
        throw std::invalid_argument("fit_forest: no covariates");
    if (y.n_elem != n)
        throw std::invalid_argument("fit_forest: response length mismatch");
    if (cfg.n_trees < 1)
        throw std::invalid_argument("fit_forest: n_trees must be at least 1");
    if (cfg.min_leaf < 1)
        throw std::invalid_argument("fit_forest: min_leaf must be at least 1");
    if (n < 2 * std::size_t(cfg.min_leaf))
        throw std::runtime_error("fit_forest: need n >= 2 * min_leaf samples");

    int max_features = cfg.max_features > 0 ? cfg.max_features : int((p + 2) / 3);
    max_features = std::clamp(max_features, 1, int(p));

    arma::mat covariates = X.X.cols(1, p);

    RandomForest forest;
    forest.feature_names = X.names;
    forest.config = cfg;
    forest.config.max_features = max_features;
    forest.trees.resize(std::size_t(cfg.n_trees));

    auto train_one = [&](std::size_t t) {
        SplitMix64 seeder{cfg.seed};
        seeder.state += 0x632be59bd9b4e019ULL * (t + 1);
        std::uint64_t tree_seed = seeder.next();

        TreeBuilder builder(covariates, y, max_features, cfg.min_leaf, tree_seed);
        std::vector<std::uint32_t> samples(n);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < n; ++i)
                samples[i] = std::uint32_t(builder.rng.below(n));
        } else {
            std::iota(samples.begin(), samples.end(), 0u);
        }
        builder.build(samples);
        forest.trees[t] = std::move(builder.tree);
    };

    const long tl = long(cfg.n_trees);
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(dynamic) num_threads(exec.resolved_threads())
        for (long t = 0; t < tl; ++t)
            train_one(std::size_t(t));
    } else {
        for (long t = 0; t < tl; ++t)
            train_one(std::size_t(t));
    }
    return forest;
}

ImportanceReport relative_importance(const RandomForest& forest)
{
    if (forest.trees.empty())
        throw std::invalid_argument("relative_importance: forest is not fitted");
    const std::size_t p = forest.feature_names.size();
    arma::vec totals(p, arma::fill::zeros);
    for (const auto& tree : forest.trees)
        totals += tree.impurity_reduction;

    ImportanceReport report;
    report.names = forest.feature_names;
    report.relative_importance.zeros(p);
    report.normalized_importance.zeros(p);
    double grand = arma::accu(totals);
    double top = totals.max();
    if (grand > 0.0)
        report.relative_importance = (totals / grand) * 100.0;
    if (top > 0.0)
        report.normalized_importance = (totals / top) * 100.0;
    return report;
}

} // namespace spatecon
