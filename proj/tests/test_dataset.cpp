#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "spatecon/csv.hpp"
#include "spatecon/dataset.hpp"

using namespace spatecon;

namespace {

std::string square_geojson(const std::vector<std::pair<std::string, std::pair<double, double>>>& cells)
{
    std::ostringstream out;
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out << ',';
        double x = cells[i].second.first, y = cells[i].second.second;
        out << "{\"type\":\"Feature\",\"properties\":{\"FIPS\":\"" << cells[i].first
            << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[["
            << '[' << x << ',' << y << "],[" << x + 1 << ',' << y << "],[" << x + 1 << ',' << y + 1
            << "],[" << x << ',' << y + 1 << "],[" << x << ',' << y << "]]]}}";
    }
    out << "]}";
    return out.str();
}

DailySeries make_series(Date start, const std::vector<double>& counts)
{
    DailySeries s;
    s.fips = FipsCode::parse("10001");
    Date d = start;
    for (double c : counts) {
        s.dates.push_back(d);
        s.counts.push_back(c);
        d = d.next_day();
    }
    return s;
}

} // namespace

TEST_CASE("fips parsing normalizes and validates")
{
    CHECK(FipsCode::parse("1001").value() == "01001");
    CHECK(FipsCode::parse("01001").value() == "01001");
    CHECK(FipsCode::parse(" 1001 ").value() == "01001");
    CHECK(FipsCode::parse("1001.0").value() == "01001");
    CHECK(FipsCode::parse("01001").state() == "01");
    CHECK(FipsCode::parse("01001").county() == "001");
    CHECK_THROWS(FipsCode::parse("1o001"));
    CHECK_THROWS(FipsCode::parse("123456"));
    CHECK_THROWS(FipsCode::parse(""));
    CHECK_THROWS(FipsCode::parse("10.5"));
}

TEST_CASE("load_dataset joins geometry and attributes on normalized fips")
{
    std::string geo = square_geojson({{"01001", {0, 0}}, {"01002", {1, 0}}, {"01003", {2, 0}}});
    std::string csv = "FIPS,A,B\n1001,1.5,2\n1002,2.5,3\n1003,3.5,4\n";
    JoinReport report;
    SpatialDataset ds = load_dataset(geo, csv, "FIPS", &report);
    CHECK(ds.n() == 3);
    CHECK(report.matched == 3);
    CHECK(report.unmatched_geometry.empty());
    CHECK(report.unmatched_attributes.empty());
    CHECK(ds.attribute_names == std::vector<std::string>{"A", "B"});
    CHECK(ds.attributes(0, 0) == doctest::Approx(1.5));
    CHECK(ds.attributes(2, 1) == doctest::Approx(4.0));
    CHECK(ds.features[1].fips.value() == "01002");
    // unit squares: area-weighted centroid is the cell center
    CHECK(ds.features[0].centroid.lon == doctest::Approx(0.5));
    CHECK(ds.features[0].centroid.lat == doctest::Approx(0.5));
}

TEST_CASE("load_dataset reports unmatched rows and excludes them")
{
    std::string geo = square_geojson({{"01001", {0, 0}}, {"01002", {1, 0}}});
    std::string csv = "FIPS,A\n1001,1\n99999,7\n";
    JoinReport report;
    SpatialDataset ds = load_dataset(geo, csv, "FIPS", &report);
    CHECK(ds.n() == 1);
    REQUIRE(report.unmatched_attributes.size() == 1);
    CHECK(report.unmatched_attributes[0].value() == "99999");
    REQUIRE(report.unmatched_geometry.size() == 1);
    CHECK(report.unmatched_geometry[0].value() == "01002");
}

TEST_CASE("load_dataset error paths")
{
    std::string geo = square_geojson({{"01001", {0, 0}}});
    CHECK_THROWS_WITH_AS(load_dataset(geo, "FIPS,A\n2002,1\n", "FIPS"),
                         doctest::Contains("zero matched"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_dataset(geo, "FIPS,A\n1001,1\n01001,2\n", "FIPS"),
                         doctest::Contains("duplicate FIPS"), std::runtime_error);
    // non-numeric cell names row and column
    CHECK_THROWS_WITH_AS(load_dataset(geo, "FIPS,A\n1001,abc\n", "FIPS"), doctest::Contains("'A'"),
                         std::runtime_error);
    std::string dup_geo = square_geojson({{"01001", {0, 0}}, {"01001", {1, 0}}});
    CHECK_THROWS_WITH_AS(load_dataset(dup_geo, "FIPS,A\n1001,1\n", "FIPS"),
                         doctest::Contains("duplicate FIPS"), std::runtime_error);
}

TEST_CASE("join is order-independent in the csv rows")
{
    std::string geo = square_geojson({{"01001", {0, 0}}, {"01002", {1, 0}}, {"01003", {2, 0}}});
    SpatialDataset a = load_dataset(geo, "FIPS,A\n1001,1\n1002,2\n1003,3\n", "FIPS");
    SpatialDataset b = load_dataset(geo, "FIPS,A\n1003,3\n1001,1\n1002,2\n", "FIPS");
    REQUIRE(a.n() == b.n());
    for (std::size_t i = 0; i < a.n(); ++i) {
        CHECK(a.features[i].fips == b.features[i].fips);
        CHECK(a.attributes(i, 0) == b.attributes(i, 0));
    }
}

TEST_CASE("missing cells become NaN, not errors")
{
    std::string geo = square_geojson({{"01001", {0, 0}}, {"01002", {1, 0}}});
    SpatialDataset ds = load_dataset(geo, "FIPS,A,B\n1001,,3\n1002,NA,4\n", "FIPS");
    CHECK(std::isnan(ds.attributes(0, 0)));
    CHECK(std::isnan(ds.attributes(1, 0)));
    CHECK(ds.attributes(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("geojson round trip preserves join content")
{
    std::string geo = square_geojson({{"01001", {0, 0}}, {"01002", {1, 0}}});
    SpatialDataset ds = load_dataset(geo, "FIPS,A\n1001,1.25\n1002,2.5\n", "FIPS");
    std::string serialized = to_geojson(ds);
    SpatialDataset again = load_dataset(serialized, "FIPS,A\n1001,1.25\n1002,2.5\n", "FIPS");
    REQUIRE(again.n() == ds.n());
    CHECK(again.features[0].fips == ds.features[0].fips);
    CHECK(again.features[1].centroid.lon == doctest::Approx(ds.features[1].centroid.lon));
}

TEST_CASE("polygon with hole gets an area-weighted centroid")
{
    // 4x4 square with a 1x1 hole at [0,1]x[0,1]: mass center shifts away
    // from the hole
    std::string geo =
        "{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\",\"properties\":"
        "{\"FIPS\":\"01001\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":["
        "[[0,0],[4,0],[4,4],[0,4],[0,0]],"
        "[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]}";
    SpatialDataset ds = load_dataset(geo, "FIPS,A\n1001,1\n", "FIPS");
    // centroid = (16*(2,2) - 1*(0.5,0.5)) / 15
    CHECK(ds.features[0].centroid.lon == doctest::Approx((16.0 * 2.0 - 0.5) / 15.0).epsilon(1e-12));
    CHECK(ds.features[0].centroid.lat == doctest::Approx((16.0 * 2.0 - 0.5) / 15.0).epsilon(1e-12));
}

TEST_CASE("cumulative_total sums through the cutoff")
{
    DailySeries s = make_series({2020, 1, 22}, {1, 2, 0, 3});
    CHECK(cumulative_total(s, s.dates.back()) == doctest::Approx(6.0));
    CHECK(cumulative_total(s, s.dates.front()) == doctest::Approx(1.0));

    DailySeries single = make_series({2020, 1, 22}, {5});
    CHECK(cumulative_total(single, single.dates.front()) == doctest::Approx(5.0));

    std::vector<double> ones(184, 1.0);
    DailySeries window = make_series({2020, 1, 22}, ones);
    CHECK(window.dates.back() == Date{2020, 7, 23});
    CHECK(cumulative_total(window, window.dates.back()) == doctest::Approx(184.0));

    CHECK_THROWS(cumulative_total(s, Date{2020, 1, 21}));
}

TEST_CASE("cumulative_total is monotone for non-negative series")
{
    std::mt19937_64 rng(7);
    std::vector<double> counts(60);
    for (auto& c : counts)
        c = double(rng() % 9);
    DailySeries s = make_series({2020, 2, 1}, counts);
    double prev = -1.0;
    Date d = s.dates.front();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        double total = cumulative_total(s, d);
        CHECK(total >= prev);
        prev = total;
        d = d.next_day();
    }
}

TEST_CASE("monthly_total filters by calendar month")
{
    std::vector<double> march(31, 2.0);
    DailySeries s = make_series({2020, 3, 1}, march);
    MonthlyTotal total = monthly_total(s, 2020, 3);
    CHECK(total.total == doctest::Approx(62.0));
    CHECK_FALSE(total.no_overlap);

    MonthlyTotal missing = monthly_total(s, 2020, 1);
    CHECK(missing.total == doctest::Approx(0.0));
    CHECK(missing.no_overlap);
}

TEST_CASE("monthly_total matches a brute-force date filter")
{
    std::mt19937_64 rng(11);
    std::vector<double> counts(90); // spans Feb-Apr 2020
    for (auto& c : counts)
        c = double(rng() % 100) / 10.0;
    DailySeries s = make_series({2020, 2, 5}, counts);

    double oracle = 0.0;
    for (std::size_t i = 0; i < s.dates.size(); ++i)
        if (s.dates[i].year == 2020 && s.dates[i].month == 3)
            oracle += s.counts[i];
    CHECK(monthly_total(s, 2020, 3).total == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("months partition the cumulative total")
{
    std::mt19937_64 rng(13);
    std::vector<double> counts(122); // 2020-03-01 .. 2020-06-30
    for (auto& c : counts)
        c = double(rng() % 50);
    DailySeries s = make_series({2020, 3, 1}, counts);
    double by_months = 0.0;
    for (int m = 3; m <= 6; ++m)
        by_months += monthly_total(s, 2020, m).total;
    CHECK(by_months == doctest::Approx(cumulative_total(s, s.dates.back())).epsilon(1e-12));
}

TEST_CASE("per_capita scales by population")
{
    CHECK(per_capita(50.0, 100000.0) == doctest::Approx(5.0));
    CHECK(per_capita(0.0, 12345.0, 7.0) == doctest::Approx(0.0));
    CHECK(per_capita(7833851.0, 328e6) == doctest::Approx(238.837).epsilon(1e-4));
    CHECK_THROWS(per_capita(1.0, 0.0));
    CHECK_THROWS(per_capita(1.0, -5.0));
    // linear in count
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        double c = double(rng() % 1000), pop = 1.0 + double(rng() % 100000);
        CHECK(per_capita(3.0 * c, pop) == doctest::Approx(3.0 * per_capita(c, pop)).epsilon(1e-12));
    }
}

TEST_CASE("idw interpolation basics")
{
    PointSamples one{{{2.0, 3.0, 3.0}}};
    std::vector<LonLat> targets{{0, 0}, {5, 5}, {2, 3}};
    auto v = idw_interpolate(one, targets);
    CHECK(v[0] == doctest::Approx(3.0));
    CHECK(v[1] == doctest::Approx(3.0));
    CHECK(v[2] == doctest::Approx(3.0)); // exact hit

    PointSamples two{{{0.0, 0.0, 0.0}, {2.0, 0.0, 10.0}}};
    std::vector<LonLat> mid{{1.0, 0.0}};
    CHECK(idw_interpolate(two, mid)[0] == doctest::Approx(5.0));

    CHECK_THROWS(idw_interpolate(PointSamples{}, mid));
    CHECK_THROWS(idw_interpolate(two, mid, 0.0));
}

TEST_CASE("idw matches a direct formula evaluation")
{
    PointSamples samples{{{0.0, 0.0, 1.0}, {4.0, 0.0, 5.0}, {0.0, 3.0, 9.0}}};
    LonLat t{1.0, 1.0};
    double d1 = std::sqrt(2.0), d2 = std::sqrt(10.0), d3 = std::sqrt(5.0);
    double w1 = 1.0 / (d1 * d1), w2 = 1.0 / (d2 * d2), w3 = 1.0 / (d3 * d3);
    double oracle = (w1 * 1.0 + w2 * 5.0 + w3 * 9.0) / (w1 + w2 + w3);
    std::vector<LonLat> targets{t};
    CHECK(idw_interpolate(samples, targets)[0] == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("idw output bounded by sample extremes and deterministic across exec modes")
{
    std::mt19937_64 rng(23);
    PointSamples samples;
    for (int i = 0; i < 40; ++i)
        samples.points.push_back({double(rng() % 100) / 10.0, double(rng() % 100) / 10.0,
                                  double(rng() % 1000) / 10.0});
    std::vector<LonLat> targets;
    for (int i = 0; i < 300; ++i)
        targets.push_back({double(rng() % 120) / 10.0 - 1.0, double(rng() % 120) / 10.0 - 1.0});

    double lo = samples.points[0].value, hi = lo;
    for (const auto& s : samples.points) {
        lo = std::min(lo, s.value);
        hi = std::max(hi, s.value);
    }
    ExecSpec serial{Exec::Serial, 1};
    ExecSpec omp{Exec::OpenMP, 4};
    auto a = idw_interpolate(samples, targets, 2.0, serial);
    auto b = idw_interpolate(samples, targets, 2.0, omp);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        CHECK(a[i] >= lo);
        CHECK(a[i] <= hi);
        CHECK(a[i] == b[i]); // bit-identical
    }
}

TEST_CASE("zonal mean averages interior cell centers")
{
    GridSurface surface;
    surface.x0 = 0.25;
    surface.y0 = 0.25;
    surface.dx = 0.5;
    surface.dy = 0.5;
    surface.nx = 8;
    surface.ny = 8;
    surface.values.resize(64);
    for (std::size_t j = 0; j < 8; ++j)
        for (std::size_t i = 0; i < 8; ++i)
            surface.values[j * 8 + i] = double(i) + 10.0 * double(j);

    Polygon unit_square{{Ring{{{1, 1}, {3, 1}, {3, 3}, {1, 3}, {1, 1}}, false}}};

    // oracle: exhaustive scan with a plain coordinate-bounds test
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < 8; ++j)
        for (std::size_t i = 0; i < 8; ++i) {
            LonLat c = surface.cell_center(i, j);
            if (c.lon > 1 && c.lon < 3 && c.lat > 1 && c.lat < 3) {
                sum += surface.at(i, j);
                ++count;
            }
        }
    REQUIRE(count > 0);
    CHECK(zonal_mean(surface, unit_square) == doctest::Approx(sum / count).epsilon(1e-14));

    GridSurface constant = surface;
    std::fill(constant.values.begin(), constant.values.end(), 6.5);
    CHECK(zonal_mean(constant, unit_square) == doctest::Approx(6.5));

    Polygon outside{{Ring{{{50, 50}, {51, 50}, {51, 51}, {50, 51}, {50, 50}}, false}}};
    CHECK_THROWS_WITH_AS(zonal_mean(surface, outside), doctest::Contains("finer grid"),
                         std::runtime_error);
}

TEST_CASE("daily series csv parsing groups by county and validates gaps")
{
    auto series = parse_daily_series_csv(
        "fips,date,count\n1001,2020-03-01,1\n1001,2020-03-02,2\n1002,2020-03-01,5\n");
    REQUIRE(series.size() == 2);
    CHECK(series[0].fips.value() == "01001");
    CHECK(series[0].counts.size() == 2);
    CHECK(series[1].fips.value() == "01002");

    CHECK_THROWS(parse_daily_series_csv("fips,date,count\n1001,2020-03-01,1\n1001,2020-03-03,2\n"));
    CHECK_THROWS(parse_daily_series_csv("fips,date,count\n1001,2020-03-01,1\n1001,2020-03-01,2\n"));
}

TEST_CASE("subset_dataset keeps order and attributes")
{
    std::string geo = square_geojson({{"01001", {0, 0}}, {"01002", {1, 0}}, {"01003", {2, 0}}});
    SpatialDataset ds = load_dataset(geo, "FIPS,A\n1001,1\n1002,2\n1003,3\n", "FIPS");
    std::vector<std::uint32_t> keep{0, 2};
    SpatialDataset sub = subset_dataset(ds, keep);
    REQUIRE(sub.n() == 2);
    CHECK(sub.features[1].fips.value() == "01003");
    CHECK(sub.attributes(1, 0) == doctest::Approx(3.0));
}

TEST_CASE("csv formatting round-trips doubles")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        double v = std::ldexp(double(rng()) / double(std::mt19937_64::max()), int(rng() % 40) - 20);
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}
