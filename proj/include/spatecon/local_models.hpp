#ifndef SPATECON_LOCAL_MODELS_HPP
#define SPATECON_LOCAL_MODELS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <armadillo>

#include "spatecon/geometry.hpp"
#include "spatecon/global_models.hpp"
#include "spatecon/parallel.hpp"

namespace spatecon {

/// Adaptive bisquare kernel: bandwidth is a neighbor count.
struct KernelSpec {
    int bandwidth = 0;
};

/// Bisquare weights against the k-th nearest distance b in `distances`
/// (the focal point's zero distance counts): w = (1 - (d/b)^2)^2 for d < b,
/// 0 beyond, 1 at the focal point.
arma::vec bisquare_weights(const arma::vec& distances, int k);

/// Pairwise distance matrix between coordinates under `metric`.
arma::mat pairwise_distances(std::span<const LonLat> coords, DistanceMetric metric,
                             const ExecSpec& exec = {});

/// Single weighted least-squares fit; exposed for oracles and reuse.
arma::vec weighted_least_squares(const arma::mat& X, const arma::vec& y, const arma::vec& w);

struct GwrOptions {
    std::optional<int> bandwidth; // absent = golden search under AICc
    DistanceMetric metric = DistanceMetric::Euclidean;
    ExecSpec exec;
    double alpha = 0.05; // for the corrected significance threshold
};

struct GwrFit {
    arma::mat local_coefficients; // n x (p+1), intercept first
    arma::vec local_r2;
    int bandwidth = 0;
    double hat_trace = 0.0;
    arma::vec residuals;
    arma::vec fitted;
    double rss = 0.0;
    double sigma2 = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double aic = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
    double adj_alpha = 0.0;
    double critical_t = 0.0;
};

/// Geographically weighted regression with an adaptive bisquare kernel.
GwrFit fit_gwr(const DesignMatrix& X, const arma::vec& y, std::span<const LonLat> coords,
               const GwrOptions& options = {});

/// Golden-section search over the continuous bandwidth with evaluation at
/// round(k); memoized, terminates when the interval is below one, returns
/// the evaluated k with the smallest objective (ties break low).
int golden_search_bandwidth(const std::function<double(int)>& objective, int k_min, int k_max);

struct MgwrOptions {
    DistanceMetric metric = DistanceMetric::Euclidean;
    ExecSpec exec;
    double alpha = 0.05;
    double soc_tolerance = 1e-5;
    int max_iterations = 200;
    /// Pin every term to a fixed bandwidth (intercept first) instead of
    /// re-searching during backfitting.
    std::optional<std::vector<int>> fixed_bandwidths;
    bool compute_bandwidth_intervals = false;
};

struct MgwrFit {
    arma::mat local_coefficients;
    arma::vec local_r2;
    std::vector<int> covariate_bandwidths; // per term, intercept first
    int init_bandwidth = 0; // single-bandwidth GWR used as the starting fit
    double hat_trace = 0.0;
    arma::vec residuals;
    arma::vec fitted;
    double rss = 0.0;
    double sigma2 = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double aic = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
    double adj_alpha = 0.0;
    double critical_t = 0.0;
    int backfit_iterations = 0;
    bool converged = false;
    std::optional<std::vector<std::pair<int, int>>> bandwidth_intervals;
};

/// Multiscale GWR: additive backfitting with one golden-searched bandwidth
/// per covariate, initialized from the optimal single-bandwidth GWR fit.
/// Convergence is the SOC-f score against `soc_tolerance`.
MgwrFit fit_mgwr(const DesignMatrix& X, const arma::vec& y, std::span<const LonLat> coords,
                 const MgwrOptions& options = {});

struct CorrectedInference {
    double adj_alpha = 0.0;
    double critical_t = 0.0;
};

/// Effective-tests correction: p_e = hat_trace / n_terms, adj_alpha =
/// alpha / p_e, critical t at adj_alpha with n - hat_trace degrees of
/// freedom.
CorrectedInference corrected_inference(double hat_trace, std::size_t n_terms, std::size_t n,
                                       double alpha = 0.05);

struct LocalCollinearityAt {
    double condition_number = 0.0;
    arma::vec vif; // per covariate (intercept excluded)
    arma::mat vdp; // rows = singular components, columns = coefficients; columns sum to 1
    bool degenerate = false; // a column had zero weighted variance
};

/// Collinearity diagnostics of one weighted, column-scaled design.
LocalCollinearityAt local_collinearity_at(const DesignMatrix& X, const arma::vec& weights);

struct LocalCollinearity {
    arma::vec condition_number; // n
    arma::mat local_vif; // n x p
    std::vector<arma::mat> vdp; // per location
    std::vector<bool> flagged; // CN > 30 or any VDP > 0.5
    std::vector<std::uint32_t> degenerate_locations;
};

LocalCollinearity local_collinearity(const DesignMatrix& X, std::span<const LonLat> coords,
                                     KernelSpec kernel, const ExecSpec& exec = {});

/// Widest contiguous integer interval around k_star where objective(k) is
/// within +2 of objective(k_star).
std::pair<int, int> bandwidth_interval(const std::function<double(int)>& objective, int k_star,
                                       int k_min, int k_max);

inline constexpr std::array<double, 9> kLocalR2BinEdges = {0.0, 0.34, 0.66, 0.79, 0.85,
                                                           0.89, 0.93, 0.96, 1.00};

std::array<std::string, 8> local_r2_bin_labels();

/// Right-inclusive histogram of local R^2 over the fixed bin edges.
std::array<std::size_t, 8> bin_local_r2(const arma::vec& local_r2);

} // namespace spatecon

#endif
