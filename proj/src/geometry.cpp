#include "stochfv/geometry.hpp"

#include <algorithm>
#include <limits>

namespace stochfv {

double signed_area(std::span<const Vec2> polygon) {
    const std::size_t n = polygon.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross(polygon[i], polygon[(i + 1) % n]);
    }
    return 0.5 * twice;
}

Vec2 centroid(std::span<const Vec2> polygon) {
    const std::size_t n = polygon.size();
    if (n == 0) return {};
    // Shift to the first vertex to limit cancellation far from the origin.
    const Vec2 o = polygon[0];
    double a = 0.0;
    Vec2 c{};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = polygon[i] - o;
        const Vec2 q = polygon[(i + 1) % n] - o;
        const double w = cross(p, q);
        a += w;
        c += (p + q) * w;
    }
    if (a == 0.0) {
        Vec2 mean{};
        for (const auto& p : polygon) mean += p;
        return mean * (1.0 / static_cast<double>(n));
    }
    return o + c * (1.0 / (3.0 * a));
}

double diameter(std::span<const Vec2> polygon) {
    double d = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        for (std::size_t j = i + 1; j < polygon.size(); ++j) {
            d = std::max(d, distance(polygon[i], polygon[j]));
        }
    }
    return d;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * s);
}

double point_boundary_distance(const Vec2& p, std::span<const Vec2> polygon) {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        d = std::min(d, point_segment_distance(p, polygon[i], polygon[(i + 1) % n]));
    }
    return d;
}

bool convex_contains(std::span<const Vec2> polygon, const Vec2& p, double tol) {
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        // Signed distance to the left of a->b is positive inside.
        if (cross(b - a, p - a) / len < -tol) return false;
    }
    return true;
}

bool is_convex(std::span<const Vec2> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    const double orientation = signed_area(polygon) >= 0.0 ? 1.0 : -1.0;
    const double scale = diameter(polygon);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        const Vec2 c = polygon[(i + 2) % n];
        if (orientation * cross(b - a, c - b) < -1e-12 * scale * scale) return false;
    }
    return true;
}

std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, const Vec2& normal, double offset) {
    std::vector<Vec2> out;
    const std::size_t n = polygon.size();
    if (n == 0) return out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = polygon[i];
        const Vec2& q = polygon[(i + 1) % n];
        const double sp = dot(normal, p) - offset;
        const double sq = dot(normal, q) - offset;
        if (sp <= 0.0) out.push_back(p);
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
            const double s = sp / (sp - sq);
            out.push_back(p + (q - p) * s);
        }
    }
    return out;
}

std::vector<Vec2> convex_intersection(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    std::vector<Vec2> out(subject.begin(), subject.end());
    const std::size_t n = clip.size();
    for (std::size_t i = 0; i < n && !out.empty(); ++i) {
        const Vec2 a = clip[i];
        const Vec2 b = clip[(i + 1) % n];
        const Vec2 edge = b - a;
        // Outward normal of a counter-clockwise edge.
        const Vec2 outward{edge.y, -edge.x};
        out = clip_half_plane(out, outward, dot(outward, a));
    }
    if (out.size() < 3) out.clear();
    return out;
}

}  // namespace stochfv
