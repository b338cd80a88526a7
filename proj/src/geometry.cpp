#include "spatecon/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace spatecon {

double ring_area(const Ring& ring)
{
    const auto& p = ring.points;
    double twice_area = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        twice_area += p[i].lon * p[i + 1].lat - p[i + 1].lon * p[i].lat;
    return 0.5 * twice_area;
}

LonLat polygon_centroid(const Polygon& poly)
{
    double area_sum = 0.0, cx = 0.0, cy = 0.0;
    for (const auto& ring : poly.rings) {
        const auto& p = ring.points;
        double a2 = 0.0, rx = 0.0, ry = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            double cross = p[i].lon * p[i + 1].lat - p[i + 1].lon * p[i].lat;
            a2 += cross;
            rx += (p[i].lon + p[i + 1].lon) * cross;
            ry += (p[i].lat + p[i + 1].lat) * cross;
        }
        // |area| with an explicit hole sign, so source winding does not matter
        double a = std::fabs(a2) * 0.5;
        double sign = ring.hole ? -1.0 : 1.0;
        if (a <= 0.0)
            continue;
        // ring centroid = (rx, ry) / (3 * a2); carry it with weight sign*|a|
        double inv = 1.0 / (3.0 * a2);
        cx += sign * a * (rx * inv);
        cy += sign * a * (ry * inv);
        area_sum += sign * a;
    }
    if (area_sum == 0.0) {
        // degenerate geometry: fall back to vertex mean
        double sx = 0.0, sy = 0.0;
        std::size_t count = 0;
        for (const auto& ring : poly.rings)
            for (std::size_t i = 0; i + 1 < ring.points.size(); ++i) {
                sx += ring.points[i].lon;
                sy += ring.points[i].lat;
                ++count;
            }
        if (count == 0)
            throw std::runtime_error("polygon_centroid: empty polygon");
        return {sx / double(count), sy / double(count)};
    }
    return {cx / area_sum, cy / area_sum};
}

bool polygon_contains(const Polygon& poly, LonLat p)
{
    bool inside = false;
    for (const auto& ring : poly.rings) {
        const auto& v = ring.points;
        for (std::size_t i = 0, j = v.size() - 2; i + 1 < v.size(); j = i++) {
            bool straddles = (v[i].lat > p.lat) != (v[j].lat > p.lat);
            if (straddles) {
                double x_cross = (v[j].lon - v[i].lon) * (p.lat - v[i].lat) / (v[j].lat - v[i].lat) + v[i].lon;
                if (p.lon < x_cross)
                    inside = !inside;
            }
        }
    }
    return inside;
}

double point_distance(LonLat a, LonLat b, DistanceMetric metric)
{
    switch (metric) {
    case DistanceMetric::Euclidean: {
        double dx = a.lon - b.lon, dy = a.lat - b.lat;
        return std::sqrt(dx * dx + dy * dy);
    }
    case DistanceMetric::Manhattan:
        return std::fabs(a.lon - b.lon) + std::fabs(a.lat - b.lat);
    case DistanceMetric::Arc: {
        constexpr double deg = M_PI / 180.0;
        double phi1 = a.lat * deg, phi2 = b.lat * deg;
        double dphi = (b.lat - a.lat) * deg, dlam = (b.lon - a.lon) * deg;
        double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlam / 2.0);
        double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
        h = std::min(1.0, std::max(0.0, h));
        return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
    }
    }
    throw std::logic_error("point_distance: unknown metric");
}

} // namespace spatecon
