#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace soapfilm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline Vec2 normalized(const Vec2& a) {
    double n = norm(a);
    return n > 0 ? a / n : Vec2{0, 0};
}
/// Rotate 90 degrees counterclockwise.
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

/// Distance from p to segment [a,b]; also reports the parameter u in [0,1]
/// of the closest point a + u*(b-a).
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double* u_out = nullptr);

/// Closed polyline (the closing edge last->first is implicit).
struct Polyline {
    std::vector<Vec2> pts;

    std::size_t size() const { return pts.size(); }
    double length_closed() const;
    double length_open() const;

    /// Arclength parameter (in [0, length_closed)) of the point on the closed
    /// polyline nearest to p. Also reports the distance.
    double closest_param_closed(const Vec2& p, double* dist_out = nullptr) const;

    /// Point at arclength parameter t (t taken mod total length).
    Vec2 at_param_closed(double t) const;

    /// Cumulative arclength of vertex i (vertex 0 -> 0).
    double vertex_param(std::size_t i) const;
};

/// Wraps x into [-period/2, period/2).
inline double wrap_centered(double x, double period) {
    double y = std::fmod(x, period);
    if (y < -period / 2) y += period;
    if (y >= period / 2) y -= period;
    return y;
}

}  // namespace soapfilm
