#ifndef SPATECON_IMPORTANCE_HPP
#define SPATECON_IMPORTANCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <armadillo>

#include "spatecon/global_models.hpp"
#include "spatecon/parallel.hpp"

namespace spatecon {

struct ForestConfig {
    int n_trees = 500;
    int max_features = 0; // 0 = ceil(p / 3)
    int min_leaf = 5;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Regression forest: CART trees on bootstrap resamples with
/// variance-reduction splits over random feature subsets. Training is
/// deterministic for a given seed regardless of thread count.
class RandomForest {
public:
    struct Node {
        int feature = -1; // -1 = leaf
        double threshold = 0.0;
        double value = 0.0; // leaf prediction
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    struct Tree {
        std::vector<Node> nodes;
        arma::vec impurity_reduction; // per feature, summed over split nodes
        double predict(const arma::rowvec& x) const;
    };

    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    ForestConfig config;

    double predict(const arma::rowvec& x) const;
    arma::vec predict(const arma::mat& X) const;
};

/// Trains `cfg.n_trees` trees on the covariate columns of X (the intercept
/// column is ignored).
RandomForest fit_forest(const DesignMatrix& X, const arma::vec& y, const ForestConfig& cfg,
                        const ExecSpec& exec = {});

struct ImportanceReport {
    std::vector<std::string> names;
    arma::vec relative_importance; // percentage shares, sum to 100
    arma::vec normalized_importance; // rescaled so the maximum is 100
};

/// Mean-decrease-in-impurity shares per variable across the forest.
ImportanceReport relative_importance(const RandomForest& forest);

} // namespace spatecon

#endif
