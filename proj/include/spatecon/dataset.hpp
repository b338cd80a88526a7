#ifndef SPATECON_DATASET_HPP
#define SPATECON_DATASET_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <armadillo>

#include "spatecon/geometry.hpp"
#include "spatecon/parallel.hpp"

namespace spatecon {

/// 5-digit county identifier: 2-digit state prefix, 3-digit county suffix.
/// Numeric inputs shorter than 5 digits are zero-padded on parse.
class FipsCode {
public:
    FipsCode() = default;
    static FipsCode parse(std::string_view raw);

    const std::string& value() const { return value_; }
    std::string_view state() const { return std::string_view(value_).substr(0, 2); }
    std::string_view county() const { return std::string_view(value_).substr(2, 3); }

    auto operator<=>(const FipsCode&) const = default;

private:
    explicit FipsCode(std::string v) : value_(std::move(v)) {}
    std::string value_ = "00000";
};

struct Feature {
    FipsCode fips;
    Polygon polygon;
    LonLat centroid;
};

/// County features joined with a numeric attribute table. Feature order is
/// fixed at load time and defines matrix row order everywhere downstream.
struct SpatialDataset {
    std::vector<Feature> features;
    std::vector<std::string> attribute_names;
    arma::mat attributes; // n x m, NaN marks a missing cell

    std::size_t n() const { return features.size(); }
    std::optional<std::size_t> column(std::string_view name) const;
    std::size_t require_column(std::string_view name) const;
    std::optional<std::size_t> feature_index(const FipsCode& fips) const;
    std::vector<LonLat> centroids() const;
};

struct JoinReport {
    std::size_t matched = 0;
    std::vector<FipsCode> unmatched_geometry; // features without an attribute row
    std::vector<FipsCode> unmatched_attributes; // CSV rows without a feature
};

struct LoadOptions {
    /// GeoJSON property holding the FIPS code; empty = auto-detect among
    /// FIPS / fips / GEOID / geoid / STCOFIPS / id.
    std::string geometry_fips_property;
};

/// Inner join of a GeoJSON FeatureCollection with a CSV attribute table on
/// normalized FIPS code. Throws on duplicate FIPS, zero matches, or a
/// non-numeric, non-empty attribute cell.
SpatialDataset load_dataset(std::string_view geojson_text, std::string_view csv_text,
                            const std::string& fips_column, JoinReport* report = nullptr,
                            const LoadOptions& options = {});

/// Serializes the joined dataset back to GeoJSON with attributes embedded
/// as feature properties.
std::string to_geojson(const SpatialDataset& ds);

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    static Date parse(std::string_view iso); // YYYY-MM-DD
    long serial_day() const; // days since civil epoch
    Date next_day() const;
    std::string iso() const;

    auto operator<=>(const Date&) const = default;
};

/// One county's daily count series; dates strictly increasing at daily
/// resolution.
struct DailySeries {
    FipsCode fips;
    std::vector<Date> dates;
    std::vector<double> counts;

    void validate() const;
};

/// Sum of counts with date <= through. Throws if `through` precedes the
/// series start.
double cumulative_total(const DailySeries& series, Date through);

struct MonthlyTotal {
    double total = 0.0;
    bool no_overlap = false; // county reported no data that month
};

MonthlyTotal monthly_total(const DailySeries& series, int year, int month);

double per_capita(double count, double population, double scale = 10000.0);

struct PointSample {
    double lon = 0.0;
    double lat = 0.0;
    double value = 0.0;
};

struct PointSamples {
    std::vector<PointSample> points;
};

/// Inverse-distance-weighted interpolation onto target locations. A target
/// within 1e-12 degrees of a sample returns that sample's value exactly.
std::vector<double> idw_interpolate(const PointSamples& samples, std::span<const LonLat> targets,
                                    double power = 2.0, const ExecSpec& exec = {});

/// Regular grid of interpolated values; origin is the center of cell (0,0).
struct GridSurface {
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 1.0;
    double dy = 1.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values; // row-major: values[j * nx + i]

    LonLat cell_center(std::size_t i, std::size_t j) const
    {
        return {x0 + double(i) * dx, y0 + double(j) * dy};
    }
    double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
};

/// Mean of grid values whose cell centers fall inside the polygon
/// (even-odd rule). Throws when no cell center is interior.
double zonal_mean(const GridSurface& surface, const Polygon& polygon);

/// Parses a long-format daily count CSV (columns fips,date,count) into one
/// series per county, sorted by FIPS.
std::vector<DailySeries> parse_daily_series_csv(std::string_view csv_text);

/// Row subset preserving feature order; used when model runs drop rows
/// with missing values in their selected columns.
SpatialDataset subset_dataset(const SpatialDataset& ds, std::span<const std::uint32_t> keep);

} // namespace spatecon

#endif
