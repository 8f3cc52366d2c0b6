#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace stochfv {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(b - a); }

/// Signed area, positive for counter-clockwise loops.
double signed_area(std::span<const Vec2> polygon);

Vec2 centroid(std::span<const Vec2> polygon);

/// Largest distance between two vertices of the polygon.
double diameter(std::span<const Vec2> polygon);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance from p to the boundary of the polygon.
double point_boundary_distance(const Vec2& p, std::span<const Vec2> polygon);

/// True when p lies inside or on the convex counter-clockwise polygon, up to tol.
bool convex_contains(std::span<const Vec2> polygon, const Vec2& p, double tol = 0.0);

bool is_convex(std::span<const Vec2> polygon);

/// Keeps the part of a convex polygon with dot(normal, x) <= offset.
std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, const Vec2& normal, double offset);

/// Intersection of two convex counter-clockwise polygons.
std::vector<Vec2> convex_intersection(std::span<const Vec2> subject, std::span<const Vec2> clip);

}  // namespace stochfv
