#ifndef SPATECON_CONFIG_HPP
#define SPATECON_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatecon/geometry.hpp"
#include "spatecon/weights.hpp"

namespace spatecon {

/// Configuration problems carry the offending field path; the CLI maps
/// them to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct YearMonth {
    int year = 0;
    int month = 0;
    std::string label() const;
};

enum class ResponseSource {
    Cases,
    Deaths,
    Column,
};

enum class Aggregation {
    Cumulative,
    Monthly,
};

struct RunConfig {
    // [inputs]
    std::string geometry_path;
    std::string attributes_path;
    std::string daily_cases_path; // optional
    std::string daily_deaths_path; // optional
    std::string fips_column = "FIPS";
    std::string geometry_fips_property; // optional, auto-detect when empty
    /// Point-sampled sources (NAME:PATH) interpolated to a raster by IDW
    /// and reduced to county means; each becomes attribute column NAME.
    std::vector<std::pair<std::string, std::string>> point_samples;
    double idw_power = 2.0;
    int idw_grid = 100; // cells across the larger bounding-box side

    // [weights]
    WeightKind weights_kind = WeightKind::Queen;
    DistanceMetric weights_metric = DistanceMetric::Euclidean;
    double weights_threshold = 0.0;
    int weights_min_neighbors = 1;
    bool weights_standardize = true;

    // [response]
    ResponseSource response_source = ResponseSource::Column;
    std::string response_column; // when source == Column
    Aggregation aggregation = Aggregation::Cumulative;
    std::optional<std::string> through; // cumulative cutoff date
    std::vector<YearMonth> months; // model4
    bool per_capita = false;
    std::string population_column;
    double per_capita_scale = 10000.0;

    // [covariates]
    std::vector<std::string> covariates;
    std::vector<std::pair<std::string, std::vector<std::string>>> groups; // model3

    // [selection]
    double p_enter = 0.05;
    double vif_cap = 10.0;

    // [local]
    std::optional<int> bandwidth; // absent = auto (golden search under AICc)
    DistanceMetric local_metric = DistanceMetric::Euclidean;
    bool bandwidth_intervals = false;
    bool pin_bandwidths = false; // model4: reuse the first month's bandwidths

    // [forest]
    int forest_trees = 500;
    int forest_max_features = 0;
    int forest_min_leaf = 5;

    // [run]
    std::string model; // optional; must agree with the CLI subcommand when set
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int threads = 0;

    /// Canonical serialization: stable section and key order, normalized
    /// values. Hashing this text identifies the run.
    std::string resolved_text() const;
};

/// Parses and validates the key/value run configuration. Unknown sections
/// or keys are rejected with their field path.
RunConfig parse_run_config(std::string_view text);

/// FNV-1a 64 over bytes; used for config and output hashes in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace spatecon

#endif
