#include "soapfilm/geometry.hpp"

#include <algorithm>
#include <limits>

namespace soapfilm {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double* u_out) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    double u = 0.0;
    if (len2 > 0) u = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    if (u_out) *u_out = u;
    return dist(p, a + ab * u);
}

double Polyline::length_closed() const {
    if (pts.size() < 2) return 0.0;
    double L = length_open();
    return L + dist(pts.back(), pts.front());
}

double Polyline::length_open() const {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) L += dist(pts[i], pts[i + 1]);
    return L;
}

double Polyline::vertex_param(std::size_t i) const {
    double L = 0.0;
    for (std::size_t k = 0; k + 1 <= i && k + 1 < pts.size(); ++k) L += dist(pts[k], pts[k + 1]);
    return L;
}

double Polyline::closest_param_closed(const Vec2& p, double* dist_out) const {
    double best_d = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    double t0 = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        double u;
        double d = point_segment_distance(p, a, b, &u);
        if (d < best_d) {
            best_d = d;
            best_t = t0 + u * dist(a, b);
        }
        t0 += dist(a, b);
    }
    if (dist_out) *dist_out = best_d;
    return best_t;
}

Vec2 Polyline::at_param_closed(double t) const {
    const std::size_t n = pts.size();
    double L = length_closed();
    if (n == 0) return {};
    if (n == 1 || L <= 0) return pts[0];
    t = std::fmod(t, L);
    if (t < 0) t += L;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        double seg = dist(a, b);
        if (t <= seg || i + 1 == n) {
            if (seg <= 0) return a;
            return a + (b - a) * (t / seg);
        }
        t -= seg;
    }
    return pts[0];
}

}  // namespace soapfilm
