#include "soapfilm/tube.hpp"

#include <cmath>
#include <limits>

#include "soapfilm/errors.hpp"

namespace soapfilm {

namespace {

int winding_increment(double t_from, double t_to, double L) {
    double raw = t_to - t_from;
    double wrapped = wrap_centered(raw, L);
    return static_cast<int>(std::llround((raw - wrapped) / L));
}

}  // namespace

Tube build_tube(const Domain& dom, const Polyline& loop, double radius) {
    if (loop.size() < 3) throw BadSceneError("tube loop needs at least 3 vertices");
    if (radius <= 0) throw BadSceneError("tube radius must be positive");
    const double h = dom.spacing();
    const double L = loop.length_closed();
    if (L <= 0) throw BadSceneError("tube loop has zero length");
    if (M_PI * radius > 0.4 * L)
        throw TubeSelfOverlapError("tube radius too large relative to loop length");

    Tube tube;
    tube.core = loop;
    tube.loop_length = L;
    tube.radius = radius;

    // Skeleton: cells traversed by the loop, sampled densely. The loop must
    // stay inside omega.
    std::vector<CellId> skeleton;
    const int samples = std::max<int>(16, static_cast<int>(std::ceil(4.0 * L / h)));
    for (int i = 0; i < samples; ++i) {
        Vec2 p = loop.at_param_closed(L * i / samples);
        CellId c = dom.cell_at(p);
        if (c < 0) throw TubeTouchesWireError("tube loop leaves the box");
        if (dom.is_wire(c)) throw TubeTouchesWireError("tube loop passes through wire");
        if (skeleton.empty() || skeleton.back() != c) skeleton.push_back(c);
    }

    // Candidate body: omega cells whose center lies within radius of the loop.
    tube.body = CellSet(dom);
    tube.cell_param.assign(dom.cell_count(), std::numeric_limits<double>::quiet_NaN());
    CellSet candidate(dom);
    for (CellId c = 0; c < dom.cell_count(); ++c) {
        if (dom.is_wire(c)) continue;
        double d;
        double t = loop.closest_param_closed(dom.cell_center(c), &d);
        if (d <= radius) {
            candidate.set(c);
            tube.cell_param[c] = t;
        }
    }

    // Trim to the component reachable from the skeleton.
    std::vector<CellId> stack(skeleton.begin(), skeleton.end());
    for (CellId c : skeleton) {
        if (!candidate.test(c)) throw TubeSelfOverlapError("tube radius under-resolved on the grid");
        if (!tube.body.test(c)) tube.body.set(c);
    }
    while (!stack.empty()) {
        CellId c = stack.back();
        stack.pop_back();
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
            if (candidate.test(nb) && !tube.body.test(nb)) {
                tube.body.set(nb);
                stack.push_back(nb);
            }
        });
    }

    // Local indexing.
    tube.local_index.assign(dom.cell_count(), -1);
    tube.body.for_each([&](CellId c) {
        tube.local_index[c] = static_cast<std::int32_t>(tube.body_cells.size());
        tube.body_cells.push_back(c);
    });

    // Edges with winding increments; free-action validation: an adjacent pair
    // with far-apart parameters means two strands of the tube touch.
    const double max_jump = 0.45 * L;
    for (CellId c : tube.body_cells) {
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (nb < c || !tube.body.test(nb)) return;
            double ta = tube.cell_param[c], tb = tube.cell_param[nb];
            if (std::fabs(wrap_centered(tb - ta, L)) > max_jump)
                throw TubeSelfOverlapError("thickened loop self-overlaps");
            Tube::Edge e;
            e.a = tube.local_index[c];
            e.b = tube.local_index[nb];
            e.facet = f;
            e.wind = static_cast<std::int8_t>(winding_increment(ta, tb, L));
            tube.edges.push_back(e);
        });
    }

    // CSR adjacency.
    const std::int32_t n = static_cast<std::int32_t>(tube.body_cells.size());
    tube.adj_start.assign(n + 1, 0);
    for (const auto& e : tube.edges) {
        ++tube.adj_start[e.a + 1];
        ++tube.adj_start[e.b + 1];
    }
    for (std::int32_t i = 0; i < n; ++i) tube.adj_start[i + 1] += tube.adj_start[i];
    tube.adj.resize(tube.edges.size() * 2);
    {
        std::vector<std::int32_t> fill(tube.adj_start.begin(), tube.adj_start.end() - 1);
        for (const auto& e : tube.edges) {
            tube.adj[fill[e.a]++] = {e.b, e.facet, e.wind};
            tube.adj[fill[e.b]++] = {e.a, e.facet, static_cast<std::int8_t>(-e.wind)};
        }
    }

    // The body must wrap: with no facet removed there has to be a cycle of
    // nonzero winding (the cyclic cover is connected with free Z-action).
    {
        std::vector<std::int32_t> pot(n, std::numeric_limits<std::int32_t>::min());
        std::vector<std::int32_t> bfs;
        bool wraps = false;
        for (std::int32_t s = 0; s < n && !wraps; ++s) {
            if (pot[s] != std::numeric_limits<std::int32_t>::min()) continue;
            pot[s] = 0;
            bfs.assign(1, s);
            for (std::size_t qi = 0; qi < bfs.size() && !wraps; ++qi) {
                std::int32_t u = bfs[qi];
                for (std::int32_t k = tube.adj_start[u]; k < tube.adj_start[u + 1]; ++k) {
                    const auto& a = tube.adj[k];
                    std::int32_t want = pot[u] + a.wind;
                    if (pot[a.to] == std::numeric_limits<std::int32_t>::min()) {
                        pot[a.to] = want;
                        bfs.push_back(a.to);
                    } else if (pot[a.to] != want) {
                        wraps = true;
                        break;
                    }
                }
            }
        }
        if (!wraps) throw TubeSelfOverlapError("tube body does not close around the loop");
    }

    // Slices: one transversal cut per loop vertex, pruned to disjointness.
    // The cut at parameter t is the set of all body edges whose endpoint
    // parameters straddle t; by construction it separates before from after.
    for (std::size_t i = 0; i < loop.size(); ++i) {
        double ti = loop.vertex_param(i);
        FacetSet slice(dom);
        for (const auto& e : tube.edges) {
            double u = wrap_centered(tube.cell_param[tube.body_cells[e.a]] - ti, L);
            double v = wrap_centered(tube.cell_param[tube.body_cells[e.b]] - ti, L);
            // A true crossing of t_i has u, v on both sides and close; a sign
            // change with |u - v| ~ L is the wrap branch cut at t_i + L/2.
            if (((u < 0 && v >= 0) || (v < 0 && u >= 0)) && std::fabs(u - v) < 0.5 * L)
                slice.set(e.facet);
        }
        if (slice.empty()) continue;
        bool disjoint = true;
        for (const auto& kept : tube.slices)
            if (slice.intersects(kept)) {
                disjoint = false;
                break;
            }
        if (disjoint) {
            tube.slices.push_back(std::move(slice));
            tube.slice_params.push_back(ti);
        }
    }
    if (tube.slices.empty()) throw TubeSelfOverlapError("tube admits no transversal slice");

    return tube;
}

}  // namespace soapfilm
