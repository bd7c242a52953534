#include "lmpkit/geometry.hpp"

#include <algorithm>
#include <limits>

namespace lmpkit {

double polygonArea(const Polygon& poly) {
    double acc = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

Point polygonCentroid(const Polygon& poly) {
    const size_t n = poly.size();
    const double area = polygonArea(poly);
    if (std::abs(area) < 1e-12) {
        Point mean;
        for (const Point& p : poly) mean = mean + p;
        return mean * (1.0 / static_cast<double>(n));
    }
    double cx = 0.0, cy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        const double cross = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    return {cx / (6.0 * area), cy / (6.0 * area)};
}

bool pointInPolygon(Point p, const Polygon& poly) {
    const size_t n = poly.size();
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xCross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < xCross) inside = !inside;
        }
    }
    return inside;
}

namespace {

int orientation(Point a, Point b, Point c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
}

bool properIntersect(Point p1, Point p2, Point q1, Point q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    return o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 && o1 != o2 && o3 != o4;
}

}  // namespace

bool polygonIsSimple(const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (they share a vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (properIntersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

bool polygonsOverlap(const Polygon& a, const Polygon& b, int gridRes) {
    double minX = std::numeric_limits<double>::max(), minY = minX;
    double maxX = std::numeric_limits<double>::lowest(), maxY = maxX;
    auto extend = [&](const Polygon& poly, double& loX, double& loY, double& hiX, double& hiY) {
        loX = loY = std::numeric_limits<double>::max();
        hiX = hiY = std::numeric_limits<double>::lowest();
        for (const Point& p : poly) {
            loX = std::min(loX, p.x);
            loY = std::min(loY, p.y);
            hiX = std::max(hiX, p.x);
            hiY = std::max(hiY, p.y);
        }
    };
    double aMinX, aMinY, aMaxX, aMaxY, bMinX, bMinY, bMaxX, bMaxY;
    extend(a, aMinX, aMinY, aMaxX, aMaxY);
    extend(b, bMinX, bMinY, bMaxX, bMaxY);
    minX = std::max(aMinX, bMinX);
    minY = std::max(aMinY, bMinY);
    maxX = std::min(aMaxX, bMaxX);
    maxY = std::min(aMaxY, bMaxY);
    if (minX >= maxX || minY >= maxY) return false;
    for (int iy = 0; iy < gridRes; ++iy) {
        for (int ix = 0; ix < gridRes; ++ix) {
            const Point p{minX + (maxX - minX) * (ix + 0.5) / gridRes,
                          minY + (maxY - minY) * (iy + 0.5) / gridRes};
            if (pointInPolygon(p, a) && pointInPolygon(p, b)) return true;
        }
    }
    return false;
}

}  // namespace lmpkit
