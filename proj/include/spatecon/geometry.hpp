#ifndef SPATECON_GEOMETRY_HPP
#define SPATECON_GEOMETRY_HPP

#include <vector>

namespace spatecon {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

/// Closed ring of lon/lat vertices: first vertex repeated at the end,
/// at least 4 entries.
struct Ring {
    std::vector<LonLat> points;
    bool hole = false;
};

/// One feature geometry. Multi-part shapes are stored as a flat ring list;
/// holes are marked explicitly so area and centroid do not depend on the
/// winding order of the source file.
struct Polygon {
    std::vector<Ring> rings;
};

/// Signed shoelace area of one ring (in squared degrees).
double ring_area(const Ring& ring);

/// Area-weighted centroid over exterior rings minus holes.
LonLat polygon_centroid(const Polygon& poly);

/// Even-odd containment test over every ring (holes punch out interior).
bool polygon_contains(const Polygon& poly, LonLat p);

enum class DistanceMetric {
    Euclidean,
    Arc,
    Manhattan,
};

/// Point distance: euclidean/manhattan act on raw lon/lat coordinates,
/// arc is the great-circle distance in kilometres.
double point_distance(LonLat a, LonLat b, DistanceMetric metric);

} // namespace spatecon

#endif
