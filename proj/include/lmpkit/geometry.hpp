#pragma once

#include <cmath>
#include <vector>

namespace lmpkit {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }

inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

using Polygon = std::vector<Point>;

// Signed area via the shoelace formula (positive for counter-clockwise in a
// y-up frame; sign is irrelevant to callers, they use the absolute value).
double polygonArea(const Polygon& poly);

// Area centroid; falls back to the vertex mean for near-degenerate polygons.
Point polygonCentroid(const Polygon& poly);

// Even-odd rule point-in-polygon test. Boundary points count as inside.
bool pointInPolygon(Point p, const Polygon& poly);

// True if no two non-adjacent edges properly intersect.
bool polygonIsSimple(const Polygon& poly);

// True if the two polygons share interior area (grid-sampling test over the
// intersection of their bounding boxes).
bool polygonsOverlap(const Polygon& a, const Polygon& b, int gridRes = 96);

}  // namespace lmpkit
