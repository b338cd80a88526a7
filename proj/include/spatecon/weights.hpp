#ifndef SPATECON_WEIGHTS_HPP
#define SPATECON_WEIGHTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <armadillo>

#include "spatecon/dataset.hpp"
#include "spatecon/geometry.hpp"
#include "spatecon/parallel.hpp"

namespace spatecon {

enum class WeightKind {
    Queen,
    Rook,
    DistanceBand,
};

std::string_view to_string(WeightKind kind);
std::string_view to_string(DistanceMetric metric);

/// Sparse n x n spatial weight matrix, stored row-wise with sorted column
/// indices. No self-weights; island rows are empty (kept, never dropped).
struct WeightMatrix {
    struct Entry {
        std::uint32_t col = 0;
        double weight = 0.0;
    };

    std::size_t n = 0;
    std::vector<std::vector<Entry>> rows;
    WeightKind kind = WeightKind::Queen;
    std::optional<DistanceMetric> metric; // distance kinds only
    bool row_standardized = false;

    std::size_t degree(std::size_t i) const { return rows[i].size(); }
    std::vector<std::uint32_t> islands() const;
    double row_sum(std::size_t i) const;

    /// y = W * x
    arma::vec spmv(const arma::vec& x) const;
    /// y = W' * x
    arma::vec spmv_transpose(const arma::vec& x) const;
    /// B = W * A (column-wise spmv)
    arma::mat spmm(const arma::mat& a) const;
    arma::mat dense() const;

    /// S0 = sum of all weights; S1 = 1/2 sum (w_ij + w_ji)^2;
    /// S2 = sum_i (row_i + col_i sums)^2. Used by Moran moment formulas.
    void moment_sums(double& s0, double& s1, double& s2) const;

    void validate() const;
};

/// First-order contiguity from polygon boundaries. Queen links features
/// sharing at least one boundary vertex; rook requires a shared edge.
/// Vertices are snapped to a 1e-9 degree grid before comparison.
WeightMatrix contiguity_weights(const SpatialDataset& ds, WeightKind kind, const ExecSpec& exec = {});

/// Binary weights for centroid pairs within `threshold`; rows that would
/// end up with fewer than `min_neighbors` links get their `min_neighbors`
/// nearest centroids instead.
WeightMatrix distance_band_weights(const SpatialDataset& ds, DistanceMetric metric, double threshold,
                                   int min_neighbors = 1, const ExecSpec& exec = {});

/// Divides each row by its sum; islands untouched. Throws if `w` is
/// already standardized.
WeightMatrix row_standardize(const WeightMatrix& w);

struct RhoBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Eigenvalues of W plus the induced stationarity interval for the spatial
/// autoregressive coefficient. Computed once per W and shared across fits.
struct WeightEigen {
    arma::cx_vec eigenvalues;
    RhoBounds bounds;

    /// log|I - rho*W| = sum log|1 - rho*omega_i|
    double log_det(double rho) const;
};

WeightEigen weight_eigenvalues(const WeightMatrix& w);

/// (1/omega_min, 1/omega_max) over the real extreme eigenvalues of W.
RhoBounds rho_bounds(const WeightMatrix& w);

/// GAL-style adjacency text: header line "n", then per feature an
/// "<id> <degree>" line followed by its neighbor ids (1-based).
std::string to_gal(const WeightMatrix& w);
WeightMatrix from_gal(std::string_view text);

} // namespace spatecon

#endif
