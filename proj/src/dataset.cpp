#include "spatecon/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "spatecon/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatecon {

using json = nlohmann::json;

FipsCode FipsCode::parse(std::string_view raw)
{
    std::string s(raw);
    // trim whitespace
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front()))
        s.erase(s.begin());
    while (!s.empty() && is_space(s.back()))
        s.pop_back();
    if (s.empty())
        throw std::runtime_error("FIPS code: empty input");
    // tolerate a float-formatted numeric code ("1001.0") from spreadsheet exports
    if (auto dot = s.find('.'); dot != std::string::npos) {
        for (std::size_t i = dot + 1; i < s.size(); ++i)
            if (s[i] != '0')
                throw std::runtime_error("FIPS code: non-integer input '" + s + "'");
        s.erase(dot);
    }
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::runtime_error("FIPS code: non-digit input '" + s + "'");
    if (s.size() > 5)
        throw std::runtime_error("FIPS code: too many digits in '" + s + "'");
    while (s.size() < 5)
        s.insert(s.begin(), '0');
    return FipsCode(std::move(s));
}

std::optional<std::size_t> SpatialDataset::column(std::string_view name) const
{
    for (std::size_t j = 0; j < attribute_names.size(); ++j)
        if (attribute_names[j] == name)
            return j;
    return std::nullopt;
}

std::size_t SpatialDataset::require_column(std::string_view name) const
{
    auto j = column(name);
    if (!j)
        throw std::runtime_error("dataset: no attribute column '" + std::string(name) + "'");
    return *j;
}

std::optional<std::size_t> SpatialDataset::feature_index(const FipsCode& fips) const
{
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].fips == fips)
            return i;
    return std::nullopt;
}

std::vector<LonLat> SpatialDataset::centroids() const
{
    std::vector<LonLat> out;
    out.reserve(features.size());
    for (const auto& f : features)
        out.push_back(f.centroid);
    return out;
}

namespace {

Ring parse_ring(const json& coords, bool hole)
{
    Ring ring;
    ring.hole = hole;
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2)
            throw std::runtime_error("geojson: ring vertex is not a [lon, lat] pair");
        ring.points.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    if (ring.points.size() < 4)
        throw std::runtime_error("geojson: ring has fewer than 4 vertices");
    const auto& first = ring.points.front();
    const auto& last = ring.points.back();
    if (first.lon != last.lon || first.lat != last.lat)
        throw std::runtime_error("geojson: ring is not closed");
    return ring;
}

Polygon parse_geometry(const json& geom)
{
    Polygon poly;
    const std::string type = geom.at("type").get<std::string>();
    const json& coords = geom.at("coordinates");
    if (type == "Polygon") {
        for (std::size_t r = 0; r < coords.size(); ++r)
            poly.rings.push_back(parse_ring(coords[r], r > 0));
    } else if (type == "MultiPolygon") {
        for (const auto& part : coords)
            for (std::size_t r = 0; r < part.size(); ++r)
                poly.rings.push_back(parse_ring(part[r], r > 0));
    } else {
        throw std::runtime_error("geojson: unsupported geometry type '" + type + "'");
    }
    return poly;
}

std::string find_fips_property(const json& props, const std::string& preferred)
{
    static const char* kCandidates[] = {"FIPS", "fips", "GEOID", "geoid", "STCOFIPS", "id"};
    if (!preferred.empty()) {
        if (!props.contains(preferred))
            throw std::runtime_error("geojson: feature lacks FIPS property '" + preferred + "'");
        return preferred;
    }
    for (const char* c : kCandidates)
        if (props.contains(c))
            return c;
    throw std::runtime_error("geojson: no FIPS-like property on feature (looked for FIPS/fips/GEOID/geoid/STCOFIPS/id)");
}

FipsCode fips_from_json(const json& v)
{
    if (v.is_string())
        return FipsCode::parse(v.get<std::string>());
    if (v.is_number_integer())
        return FipsCode::parse(std::to_string(v.get<long long>()));
    if (v.is_number_float())
        return FipsCode::parse(format_double(v.get<double>()));
    throw std::runtime_error("geojson: FIPS property has unsupported type");
}

bool is_missing_cell(std::string_view s)
{
    if (s.empty())
        return true;
    static const char* kMissing[] = {"NA", "na", "NaN", "nan", "NULL", "null"};
    for (const char* m : kMissing)
        if (s == m)
            return true;
    return false;
}

} // namespace

SpatialDataset load_dataset(std::string_view geojson_text, std::string_view csv_text,
                            const std::string& fips_column, JoinReport* report,
                            const LoadOptions& options)
{
    json doc = json::parse(geojson_text);
    if (doc.value("type", "") != "FeatureCollection")
        throw std::runtime_error("geojson: expected a FeatureCollection");

    struct RawFeature {
        FipsCode fips;
        Polygon polygon;
    };
    std::vector<RawFeature> raw;
    std::unordered_map<std::string, std::size_t> geom_index;
    for (const auto& feat : doc.at("features")) {
        const json& props = feat.at("properties");
        std::string prop = find_fips_property(props, options.geometry_fips_property);
        FipsCode fips = fips_from_json(props.at(prop));
        if (!geom_index.emplace(fips.value(), raw.size()).second)
            throw std::runtime_error("geojson: duplicate FIPS " + fips.value());
        raw.push_back({fips, parse_geometry(feat.at("geometry"))});
    }

    CsvTable table = parse_csv(csv_text);
    std::size_t fips_col = table.require_column(fips_column);

    std::unordered_map<std::string, std::size_t> attr_index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        FipsCode fips = FipsCode::parse(table.rows[r][fips_col]);
        if (!attr_index.emplace(fips.value(), r).second)
            throw std::runtime_error("csv: duplicate FIPS " + fips.value() + " at row " + std::to_string(r + 2));
    }

    SpatialDataset ds;
    for (std::size_t j = 0; j < table.header.size(); ++j)
        if (j != fips_col)
            ds.attribute_names.push_back(table.header[j]);

    JoinReport local_report;
    std::vector<std::size_t> matched_rows;
    for (const auto& rf : raw) {
        auto it = attr_index.find(rf.fips.value());
        if (it == attr_index.end()) {
            local_report.unmatched_geometry.push_back(rf.fips);
            continue;
        }
        Feature f;
        f.fips = rf.fips;
        f.polygon = rf.polygon;
        f.centroid = polygon_centroid(rf.polygon);
        ds.features.push_back(std::move(f));
        matched_rows.push_back(it->second);
    }
    for (const auto& [key, row] : attr_index)
        if (!geom_index.contains(key))
            local_report.unmatched_attributes.push_back(FipsCode::parse(key));
    std::sort(local_report.unmatched_attributes.begin(), local_report.unmatched_attributes.end());
    local_report.matched = ds.features.size();

    if (ds.features.empty())
        throw std::runtime_error("load_dataset: join produced zero matched rows");

    ds.attributes.set_size(ds.features.size(), ds.attribute_names.size());
    for (std::size_t i = 0; i < matched_rows.size(); ++i) {
        const auto& row = table.rows[matched_rows[i]];
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == fips_col)
                continue;
            const std::string& cell = row[j];
            double value;
            if (is_missing_cell(cell)) {
                value = std::numeric_limits<double>::quiet_NaN();
            } else {
                const char* begin = cell.data();
                const char* end = begin + cell.size();
                auto res = std::from_chars(begin, end, value);
                if (res.ec != std::errc{} || res.ptr != end)
                    throw std::runtime_error("csv: non-numeric cell '" + cell + "' at row " +
                                             std::to_string(matched_rows[i] + 2) + ", column '" +
                                             table.header[j] + "'");
            }
            ds.attributes(i, out_j++) = value;
        }
    }

    if (report)
        *report = std::move(local_report);
    return ds;
}

std::string to_geojson(const SpatialDataset& ds)
{
    json features = json::array();
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const Feature& f = ds.features[i];
        json props;
        props["FIPS"] = f.fips.value();
        for (std::size_t j = 0; j < ds.attribute_names.size(); ++j) {
            double v = ds.attributes(i, j);
            if (std::isnan(v))
                props[ds.attribute_names[j]] = nullptr;
            else
                props[ds.attribute_names[j]] = v;
        }
        // regroup flat rings: an exterior ring starts a new part, holes attach to it
        json coordinates = json::array();
        json part = json::array();
        for (const auto& ring : f.polygon.rings) {
            json pts = json::array();
            for (const auto& p : ring.points)
                pts.push_back(json::array({p.lon, p.lat}));
            if (!ring.hole) {
                if (!part.empty())
                    coordinates.push_back(part);
                part = json::array();
            }
            part.push_back(pts);
        }
        if (!part.empty())
            coordinates.push_back(part);

        json geom;
        if (coordinates.size() == 1) {
            geom["type"] = "Polygon";
            geom["coordinates"] = coordinates[0];
        } else {
            geom["type"] = "MultiPolygon";
            geom["coordinates"] = coordinates;
        }
        features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", geom}});
    }
    json doc = {{"type", "FeatureCollection"}, {"features", features}};
    return doc.dump();
}

Date Date::parse(std::string_view iso)
{
    Date d;
    auto fail = [&] { throw std::runtime_error("date: expected YYYY-MM-DD, got '" + std::string(iso) + "'"); };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        fail();
    auto num = [&](std::string_view s) {
        int v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail();
        return v;
    };
    d.year = num(iso.substr(0, 4));
    d.month = num(iso.substr(5, 2));
    d.day = num(iso.substr(8, 2));
    std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{unsigned(d.month)},
                                    std::chrono::day{unsigned(d.day)}};
    if (!ymd.ok())
        fail();
    return d;
}

long Date::serial_day() const
{
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                    std::chrono::day{unsigned(day)}};
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

Date Date::next_day() const
{
    std::chrono::sys_days sd{std::chrono::year_month_day{
        std::chrono::year{year}, std::chrono::month{unsigned(month)}, std::chrono::day{unsigned(day)}}};
    sd += std::chrono::days{1};
    std::chrono::year_month_day n{sd};
    return {int(n.year()), int(unsigned(n.month())), int(unsigned(n.day()))};
}

std::string Date::iso() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

void DailySeries::validate() const
{
    if (dates.size() != counts.size())
        throw std::runtime_error("daily series " + fips.value() + ": dates/counts length mismatch");
    if (dates.empty())
        throw std::runtime_error("daily series " + fips.value() + ": empty");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (dates[i].serial_day() != dates[i - 1].serial_day() + 1)
            throw std::runtime_error("daily series " + fips.value() + ": dates not strictly daily at " +
                                     dates[i].iso());
}

double cumulative_total(const DailySeries& series, Date through)
{
    series.validate();
    if (through < series.dates.front())
        throw std::runtime_error("cumulative_total: 'through' precedes series start " +
                                 series.dates.front().iso());
    double total = 0.0;
    for (std::size_t i = 0; i < series.dates.size() && series.dates[i] <= through; ++i)
        total += series.counts[i];
    return total;
}

MonthlyTotal monthly_total(const DailySeries& series, int year, int month)
{
    series.validate();
    MonthlyTotal out;
    bool any = false;
    for (std::size_t i = 0; i < series.dates.size(); ++i) {
        if (series.dates[i].year == year && series.dates[i].month == month) {
            out.total += series.counts[i];
            any = true;
        }
    }
    out.no_overlap = !any;
    return out;
}

double per_capita(double count, double population, double scale)
{
    if (!(population > 0.0))
        throw std::runtime_error("per_capita: population must be positive");
    return count / population * scale;
}

std::vector<double> idw_interpolate(const PointSamples& samples, std::span<const LonLat> targets,
                                    double power, const ExecSpec& exec)
{
    if (samples.points.empty())
        throw std::runtime_error("idw_interpolate: no samples");
    if (!(power > 0.0))
        throw std::runtime_error("idw_interpolate: power must be positive");
    for (const auto& s : samples.points)
        if (!std::isfinite(s.value) || !std::isfinite(s.lon) || !std::isfinite(s.lat))
            throw std::runtime_error("idw_interpolate: non-finite sample");

    constexpr double kExactHit = 1e-12; // degrees
    std::vector<double> out(targets.size(), 0.0);

    auto one_target = [&](std::size_t t) {
        const LonLat& p = targets[t];
        double num = 0.0, den = 0.0;
        for (const auto& s : samples.points) {
            double d = point_distance(p, {s.lon, s.lat}, DistanceMetric::Euclidean);
            if (d < kExactHit) {
                out[t] = s.value;
                return;
            }
            double w = std::pow(d, -power);
            num += w * s.value;
            den += w;
        }
        out[t] = num / den;
    };

    const long n = static_cast<long>(targets.size());
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static) num_threads(exec.resolved_threads())
        for (long t = 0; t < n; ++t)
            one_target(std::size_t(t));
    } else {
        for (long t = 0; t < n; ++t)
            one_target(std::size_t(t));
    }
    return out;
}

double zonal_mean(const GridSurface& surface, const Polygon& polygon)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < surface.ny; ++j) {
        for (std::size_t i = 0; i < surface.nx; ++i) {
            if (polygon_contains(polygon, surface.cell_center(i, j))) {
                sum += surface.at(i, j);
                ++count;
            }
        }
    }
    if (count == 0)
        throw std::runtime_error("zonal_mean: no grid cell center inside polygon; use a finer grid");
    return sum / double(count);
}

SpatialDataset subset_dataset(const SpatialDataset& ds, std::span<const std::uint32_t> keep)
{
    SpatialDataset out;
    out.attribute_names = ds.attribute_names;
    out.features.reserve(keep.size());
    out.attributes.set_size(keep.size(), ds.attributes.n_cols);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        if (keep[r] >= ds.n())
            throw std::out_of_range("subset_dataset: row index out of range");
        out.features.push_back(ds.features[keep[r]]);
        out.attributes.row(r) = ds.attributes.row(keep[r]);
    }
    return out;
}

std::vector<DailySeries> parse_daily_series_csv(std::string_view csv_text)
{
    CsvTable table = parse_csv(csv_text);
    std::size_t fips_col = table.require_column("fips");
    std::size_t date_col = table.require_column("date");
    std::size_t count_col = table.require_column("count");

    std::map<std::string, std::map<long, std::pair<Date, double>>> grouped;
    for (const auto& row : table.rows) {
        FipsCode fips = FipsCode::parse(row[fips_col]);
        Date date = Date::parse(row[date_col]);
        double count;
        auto res = std::from_chars(row[count_col].data(), row[count_col].data() + row[count_col].size(), count);
        if (res.ec != std::errc{} || res.ptr != row[count_col].data() + row[count_col].size())
            throw std::runtime_error("daily csv: non-numeric count '" + row[count_col] + "'");
        auto& series = grouped[fips.value()];
        if (!series.emplace(date.serial_day(), std::make_pair(date, count)).second)
            throw std::runtime_error("daily csv: duplicate date " + date.iso() + " for FIPS " + fips.value());
    }

    std::vector<DailySeries> out;
    for (auto& [fips, entries] : grouped) {
        DailySeries s;
        s.fips = FipsCode::parse(fips);
        for (auto& [serial, pair] : entries) {
            s.dates.push_back(pair.first);
            s.counts.push_back(pair.second);
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace spatecon
