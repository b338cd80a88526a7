#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "spatecon/importance.hpp"

using namespace spatecon;

namespace {

DesignMatrix noise_design(std::size_t n, std::size_t p, unsigned seed,
                          std::vector<std::string> names = {})
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    arma::mat cols(n, p);
    for (auto& v : cols)
        v = normal(rng);
    if (names.empty())
        for (std::size_t j = 0; j < p; ++j)
            names.push_back("X" + std::to_string(j + 1));
    return DesignMatrix::from_columns(names, cols);
}

} // namespace

TEST_CASE("constant response yields single-leaf trees and exact predictions")
{
    DesignMatrix d = noise_design(60, 3, 1);
    arma::vec y(60);
    y.fill(4.25);
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 9;
    RandomForest forest = fit_forest(d, y, cfg);
    arma::vec pred = forest.predict(arma::mat(d.X.cols(1, 3)));
    for (double v : pred)
        CHECK(v == doctest::Approx(4.25).epsilon(1e-12));
    for (const auto& tree : forest.trees)
        CHECK(tree.nodes.size() == 1);
}

TEST_CASE("deep trees memorize a noise-free signal")
{
    DesignMatrix d = noise_design(300, 3, 2);
    arma::vec y = 3.0 * d.X.col(1);
    ForestConfig cfg;
    cfg.n_trees = 150;
    cfg.min_leaf = 1;
    cfg.seed = 12;
    RandomForest forest = fit_forest(d, y, cfg);
    arma::vec pred = forest.predict(arma::mat(d.X.cols(1, 3)));
    double sse = arma::accu(arma::square(y - pred));
    double sst = arma::accu(arma::square(y - arma::mean(y)));
    CHECK(1.0 - sse / sst >= 0.95);
}

TEST_CASE("identical seeds give bit-identical forests; exec mode does not matter")
{
    DesignMatrix d = noise_design(120, 4, 3);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    arma::vec y(120);
    for (std::size_t i = 0; i < y.n_elem; ++i)
        y(i) = d.X(i, 1) - d.X(i, 2) + 0.5 * normal(rng);

    ForestConfig cfg;
    cfg.n_trees = 60;
    cfg.seed = 4242;
    RandomForest a = fit_forest(d, y, cfg, {Exec::Serial, 1});
    RandomForest b = fit_forest(d, y, cfg, {Exec::OpenMP, 4});
    RandomForest c = fit_forest(d, y, cfg, {Exec::OpenMP, 2});
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        REQUIRE(a.trees[t].nodes.size() == c.trees[t].nodes.size());
        for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
            CHECK(a.trees[t].nodes[k].feature == b.trees[t].nodes[k].feature);
            CHECK(a.trees[t].nodes[k].threshold == b.trees[t].nodes[k].threshold);
            CHECK(a.trees[t].nodes[k].value == c.trees[t].nodes[k].value);
        }
        CHECK(arma::norm(a.trees[t].impurity_reduction - b.trees[t].impurity_reduction) == 0.0);
    }

    ForestConfig other = cfg;
    other.seed = 4243;
    RandomForest different = fit_forest(d, y, other);
    bool any_difference = false;
    for (std::size_t t = 0; t < a.trees.size() && !any_difference; ++t)
        any_difference = a.trees[t].nodes.size() != different.trees[t].nodes.size() ||
                         arma::norm(a.trees[t].impurity_reduction -
                                    different.trees[t].impurity_reduction) > 0.0;
    CHECK(any_difference);
}

TEST_CASE("relative importance finds the single informative variable")
{
    for (unsigned seed : {10u, 11u, 12u, 13u, 14u}) {
        DesignMatrix d = noise_design(250, 6, seed);
        std::mt19937_64 rng(seed * 91u);
        std::normal_distribution<double> normal;
        arma::vec y(250);
        for (std::size_t i = 0; i < y.n_elem; ++i)
            y(i) = 3.0 * d.X(i, 1) + 0.5 * normal(rng); // X1 carries the signal

        ForestConfig cfg;
        cfg.n_trees = 200;
        cfg.seed = seed;
        ImportanceReport report = relative_importance(fit_forest(d, y, cfg));
        CHECK(arma::accu(report.relative_importance) == doctest::Approx(100.0).epsilon(1e-8));
        CHECK(report.normalized_importance.max() == doctest::Approx(100.0));
        CHECK(report.relative_importance(0) > 50.0);
        for (std::size_t j = 1; j < 6; ++j)
            CHECK(report.relative_importance(j) < 15.0);
    }
}

TEST_CASE("all-noise response spreads importance roughly uniformly")
{
    const std::size_t p = 5;
    arma::vec mean_share(p, arma::fill::zeros);
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        DesignMatrix d = noise_design(150, p, 300u + unsigned(seed));
        std::mt19937_64 rng(900u + unsigned(seed));
        std::normal_distribution<double> normal;
        arma::vec y(150);
        for (auto& v : y)
            v = normal(rng);
        ForestConfig cfg;
        cfg.n_trees = 100;
        cfg.seed = std::uint64_t(seed);
        ImportanceReport report = relative_importance(fit_forest(d, y, cfg));
        mean_share += report.relative_importance / double(seeds);
    }
    for (std::size_t j = 0; j < p; ++j) {
        CHECK(mean_share(j) > 100.0 / double(p) - 10.0);
        CHECK(mean_share(j) < 100.0 / double(p) + 10.0);
    }
}

TEST_CASE("importance shares are permutation-equivariant in column order")
{
    // the per-tree feature draws are index-dependent, so equivariance is a
    // statistical statement: mean shares over seeds follow the names
    auto share = [](const ImportanceReport& r, const std::string& name) {
        for (std::size_t j = 0; j < r.names.size(); ++j)
            if (r.names[j] == name)
                return r.relative_importance(j);
        return -1.0;
    };
    std::map<std::string, double> orig_mean, perm_mean;
    const int seeds = 10;
    for (int seed = 0; seed < seeds; ++seed) {
        DesignMatrix d = noise_design(200, 4, 50u + unsigned(seed), {"A", "B", "C", "D"});
        std::mt19937_64 rng(500u + unsigned(seed));
        std::normal_distribution<double> normal;
        arma::vec y(200);
        for (std::size_t i = 0; i < y.n_elem; ++i)
            y(i) = 2.0 * d.X(i, 2) + d.X(i, 4) + 0.3 * normal(rng); // B strong, D weak

        ForestConfig cfg;
        cfg.n_trees = 150;
        cfg.seed = std::uint64_t(seed);
        ImportanceReport orig = relative_importance(fit_forest(d, y, cfg));
        ImportanceReport perm =
            relative_importance(fit_forest(d.with_columns({"D", "B", "A", "C"}), y, cfg));
        for (const std::string name : {"A", "B", "C", "D"}) {
            orig_mean[name] += share(orig, name) / seeds;
            perm_mean[name] += share(perm, name) / seeds;
        }
    }
    for (const auto& [name, value] : orig_mean)
        CHECK(std::fabs(value - perm_mean[name]) < 3.0); // percentage points
    CHECK(orig_mean["B"] > orig_mean["D"]);
}

TEST_CASE("duplicating a strong predictor splits its share")
{
    // hold the feature-sampling odds fixed (every feature offered at every
    // node) so the only change is the duplicated column
    const int seeds = 10;
    double dup_combined = 0.0, orig_share = 0.0;
    double each_copy_low = 100.0, each_copy_high = 0.0;
    arma::vec other_shift(2, arma::fill::zeros);
    for (int seed = 0; seed < seeds; ++seed) {
        DesignMatrix d = noise_design(200, 3, 600u + unsigned(seed), {"S", "N1", "N2"});
        std::mt19937_64 rng(700u + unsigned(seed));
        std::normal_distribution<double> normal;
        arma::vec y(200);
        for (std::size_t i = 0; i < y.n_elem; ++i)
            y(i) = 3.0 * d.X(i, 1) + 0.5 * normal(rng);

        ForestConfig cfg;
        cfg.n_trees = 150;
        cfg.seed = std::uint64_t(seed);
        cfg.max_features = 4;
        ImportanceReport base = relative_importance(fit_forest(d, y, cfg));

        arma::mat cols(200, 4);
        cols.col(0) = d.X.col(1);
        cols.col(1) = d.X.col(1); // duplicate of S
        cols.col(2) = d.X.col(2);
        cols.col(3) = d.X.col(3);
        DesignMatrix dup = DesignMatrix::from_columns({"S", "S_COPY", "N1", "N2"}, cols);
        ImportanceReport with_dup = relative_importance(fit_forest(dup, y, cfg));

        double s1 = with_dup.relative_importance(0), s2 = with_dup.relative_importance(1);
        orig_share += base.relative_importance(0) / seeds;
        dup_combined += (s1 + s2) / seeds;
        double combined = s1 + s2;
        each_copy_low = std::min({each_copy_low, s1 / combined * 100.0, s2 / combined * 100.0});
        each_copy_high = std::max({each_copy_high, s1 / combined * 100.0, s2 / combined * 100.0});
        other_shift(0) += (with_dup.relative_importance(2) - base.relative_importance(1)) / seeds;
        other_shift(1) += (with_dup.relative_importance(3) - base.relative_importance(2)) / seeds;
    }
    CHECK(dup_combined == doctest::Approx(orig_share).epsilon(0.05));
    // each copy holds a substantial part of the pair's share
    CHECK(each_copy_low > 25.0);
    CHECK(each_copy_high < 75.0);
    CHECK(std::fabs(other_shift(0)) < 5.0);
    CHECK(std::fabs(other_shift(1)) < 5.0);
}

TEST_CASE("strengthening a coefficient never lowers its mean share")
{
    const int seeds = 20;
    double weak_mean = 0.0, strong_mean = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
        DesignMatrix d = noise_design(150, 4, 800u + unsigned(seed));
        std::mt19937_64 rng(850u + unsigned(seed));
        std::normal_distribution<double> normal;
        arma::vec noise(150), weak_y(150), strong_y(150);
        for (std::size_t i = 0; i < noise.n_elem; ++i)
            noise(i) = normal(rng);
        for (std::size_t i = 0; i < noise.n_elem; ++i) {
            double common = d.X(i, 2) + noise(i); // fixed nuisance structure
            weak_y(i) = 1.0 * d.X(i, 1) + common;
            strong_y(i) = 3.0 * d.X(i, 1) + common;
        }
        ForestConfig cfg;
        cfg.n_trees = 100;
        cfg.seed = std::uint64_t(seed);
        weak_mean += relative_importance(fit_forest(d, weak_y, cfg)).relative_importance(0) / seeds;
        strong_mean +=
            relative_importance(fit_forest(d, strong_y, cfg)).relative_importance(0) / seeds;
    }
    CHECK(strong_mean >= weak_mean);
}

TEST_CASE("forest error paths and defaults")
{
    DesignMatrix d = noise_design(20, 3, 5);
    arma::vec y(20, arma::fill::randn);
    ForestConfig cfg;
    cfg.min_leaf = 11; // 2 * min_leaf exceeds n
    CHECK_THROWS(fit_forest(d, y, cfg));

    ForestConfig defaults;
    defaults.n_trees = 5;
    RandomForest forest = fit_forest(d, y, defaults);
    CHECK(forest.config.max_features == 1); // ceil(3 / 3)
}
