#pragma once

// Analytic test configurations rasterized onto the grid: a dry Y (three
// sheets at 120 degrees) and a wet Y (a Plateau border bounded by three
// circular arcs meeting the sheets tangentially). Both are produced by
// rasterizing a labeling of the plane, so arcs and sheets meet exactly at
// shared grid corners.

#include <cmath>
#include <memory>

#include "soapfilm/film.hpp"
#include "soapfilm/partition.hpp"

namespace synthetic {

using namespace soapfilm;

struct Config {
    std::unique_ptr<Domain> dom;
    FilmPair pair;
    Vec2 center;
    double d_t = 0.0;        ///< tip distance (wet) or 0 (dry)
    double arc_radius = 0.0; ///< analytic arc radius
};

inline Vec2 dir_at(double deg) {
    double a = deg * M_PI / 180.0;
    return {std::cos(a), std::sin(a)};
}

/// Labels: -1 = E, 0..2 = air sectors split by rays at 90/210/330 degrees.
/// arc_scale = 1 gives exact tangency at the tips; != 1 breaks it.
inline int wet_y_label(Vec2 p, Vec2 center, double d_t, double arc_scale) {
    Vec2 x = p - center;
    const Vec2 u1 = dir_at(90), u2 = dir_at(210), u3 = dir_at(330);
    const double rho = std::sqrt(3.0) * d_t * arc_scale;
    if (norm(x) <= d_t) {
        Vec2 c12 = (u3 * -2.0 * d_t);
        Vec2 c23 = (u1 * -2.0 * d_t);
        Vec2 c31 = (u2 * -2.0 * d_t);
        if (dist(x, c12) >= rho && dist(x, c23) >= rho && dist(x, c31) >= rho) return -1;
    }
    double ang = std::atan2(x.y, x.x) * 180.0 / M_PI;
    if (ang < 0) ang += 360.0;
    if (ang >= 90.0 && ang < 210.0) return 0;
    if (ang >= 210.0 && ang < 330.0) return 1;
    return 2;
}

inline Config make_wet_y(int n, double d_t, double arc_scale = 1.0, double wire_dist = 0.42,
                         double wire_r = 0.08) {
    Config cfg;
    cfg.center = {0.5, 0.5};
    cfg.d_t = d_t;
    cfg.arc_radius = std::sqrt(3.0) * d_t * arc_scale;
    Vec2 center = cfg.center;
    auto wire = [=](Vec2 p) {
        for (double deg : {90.0, 210.0, 330.0})
            if (dist(p, center + dir_at(deg) * wire_dist) <= wire_r) return true;
        return false;
    };
    cfg.dom = std::make_unique<Domain>(n, n, 1.0 / n, wire);
    const Domain& dom = *cfg.dom;
    cfg.pair = FilmPair(dom);
    std::vector<int> label(dom.cell_count(), 9);
    dom.omega_cells().for_each([&](CellId c) {
        label[c] = wet_y_label(dom.cell_center(c), center, d_t, arc_scale);
    });
    // The wedge between two tangent arcs thins below one cell near the tips,
    // leaving stray disconnected E pockets; keep only the main component.
    {
        CellSet raw(dom);
        dom.omega_cells().for_each([&](CellId c) {
            if (label[c] == -1) raw.set(c);
        });
        if (!raw.empty()) {
            FacetSet none(dom);
            Partition comps = essential_partition(none, raw);
            std::int32_t biggest = 0;
            for (std::int32_t i = 1; i < comps.component_count; ++i)
                if (comps.component_cells[i] > comps.component_cells[biggest]) biggest = i;
            raw.for_each([&](CellId c) {
                if (comps.label_of(c) != biggest) {
                    Vec2 x = dom.cell_center(c) - center;
                    double ang = std::atan2(x.y, x.x) * 180.0 / M_PI;
                    if (ang < 0) ang += 360.0;
                    label[c] =
                        (ang >= 90.0 && ang < 210.0) ? 0 : (ang >= 210.0 && ang < 330.0) ? 1 : 2;
                }
            });
        }
    }
    dom.omega_cells().for_each([&](CellId c) {
        if (label[c] == -1) cfg.pair.E.set(c);
    });
    // Sheets live between the center and the wire disks; the sector labeling
    // would also change across the ray extensions beyond the disks.
    dom.omega_cells().for_each([&](CellId c) {
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (nb < c) return;
            if (label[c] >= 0 && label[nb] >= 0 && label[c] != label[nb] &&
                dist(dom.facet_midpoint(f), center) <= wire_dist)
                cfg.pair.K_extra.set(f);
        });
    });
    return cfg;
}

inline Config make_dry_y(int n, double wire_dist = 0.42, double wire_r = 0.08) {
    Config cfg = make_wet_y(n, 0.0, 1.0, wire_dist, wire_r);
    // d_t = 0: the deltoid is empty, only the three sector sheets remain.
    return cfg;
}

}  // namespace synthetic
