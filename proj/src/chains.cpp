#include "soapfilm/chains.hpp"

#include <algorithm>
#include <array>

namespace soapfilm {

namespace {

struct KGraph {
    const Domain& dom;
    std::vector<FacetId> k_facets;
    std::vector<std::int8_t> mult;                    // per facet: 0 none, 1, 2
    std::vector<std::array<FacetId, 4>> corner_inc;   // incident K facets per corner
    std::vector<std::int8_t> corner_deg;

    explicit KGraph(const FilmPair& pair) : dom(pair.domain()) {
        mult.assign(dom.facet_count(), 0);
        corner_inc.assign(dom.corner_count(), {-1, -1, -1, -1});
        corner_deg.assign(dom.corner_count(), 0);
        FacetSet K = pair.derived_K();
        K.for_each([&](FacetId f) {
            auto [a, b] = dom.facet_cells(f);
            mult[f] = (pair.E.test(a) != pair.E.test(b)) ? 1 : 2;
            k_facets.push_back(f);
            auto [ca, cb] = dom.facet_corners(f);
            for (int c : {ca, cb})
                if (corner_deg[c] < 4) corner_inc[c][corner_deg[c]++] = f;
        });
    }

    bool corner_on_wire(int corner) const {
        int cx = corner % (dom.width() + 1);
        int cy = corner / (dom.width() + 1);
        for (int dy : {-1, 0})
            for (int dx : {-1, 0}) {
                int x = cx + dx, y = cy + dy;
                if (x < 0 || y < 0 || x >= dom.width() || y >= dom.height()) return true;
                if (dom.is_wire(dom.cell_id(x, y))) return true;
            }
        return false;
    }

    /// True if the walk stops at this corner coming along facet f.
    bool is_break(int corner, FacetId f) const {
        if (corner_deg[corner] != 2) return true;
        FacetId other = corner_inc[corner][0] == f ? corner_inc[corner][1] : corner_inc[corner][0];
        return mult[other] != mult[f];
    }

    ChainEndpoint classify(int corner, FacetId f) const {
        (void)f;
        if (corner_deg[corner] >= 2) {
            bool has1 = false, has2 = false;
            for (int k = 0; k < corner_deg[corner]; ++k)
                (mult[corner_inc[corner][k]] == 1 ? has1 : has2) = true;
            // A corner where wet boundary meets collapsed sheets is a
            // transition point regardless of its degree.
            if (has1 && has2) return ChainEndpoint::Transition;
            return ChainEndpoint::Junction;
        }
        return corner_on_wire(corner) ? ChainEndpoint::Wire : ChainEndpoint::Open;
    }
};

}  // namespace

std::vector<InterfaceChain> extract_chains(const FilmPair& pair) {
    const Domain& dom = pair.domain();
    KGraph g(pair);
    std::vector<bool> used(dom.facet_count(), false);
    std::vector<InterfaceChain> chains;

    auto other_corner = [&](FacetId f, int corner) {
        auto [ca, cb] = dom.facet_corners(f);
        return ca == corner ? cb : ca;
    };

    auto walk = [&](FacetId f0, int from_corner) {
        InterfaceChain chain;
        chain.multiplicity = g.mult[f0];
        chain.corner_start = from_corner;
        chain.end_start = g.classify(from_corner, f0);
        FacetId f = f0;
        int corner = from_corner;
        while (true) {
            used[f] = true;
            chain.facets.push_back(f);
            chain.midpoints.push_back(dom.facet_midpoint(f));
            corner = other_corner(f, corner);
            if (g.is_break(corner, f)) break;
            FacetId next = g.corner_inc[corner][0] == f ? g.corner_inc[corner][1]
                                                        : g.corner_inc[corner][0];
            if (used[next]) break;  // closed loop came back
            f = next;
        }
        chain.corner_finish = corner;
        chain.end_finish = g.classify(corner, f);
        return chain;
    };

    // Open chains first: start at every break corner.
    for (FacetId f : g.k_facets) {
        if (used[f]) continue;
        auto [ca, cb] = dom.facet_corners(f);
        int start = -1;
        if (g.is_break(ca, f))
            start = ca;
        else if (g.is_break(cb, f))
            start = cb;
        if (start >= 0) chains.push_back(walk(f, start));
    }
    // Remaining facets belong to closed same-multiplicity loops.
    for (FacetId f : g.k_facets) {
        if (used[f]) continue;
        auto [ca, cb] = dom.facet_corners(f);
        InterfaceChain chain = walk(f, ca);
        (void)cb;
        chain.closed = true;
        chain.end_start = ChainEndpoint::None;
        chain.end_finish = ChainEndpoint::None;
        chain.corner_start = chain.corner_finish = -1;
        chains.push_back(std::move(chain));
    }
    return chains;
}

namespace {

/// Projects p onto the total-least-squares line through pts[lo..hi].
Vec2 project_window(const std::vector<Vec2>& pts, int lo, int hi, const Vec2& p) {
    int n = hi - lo + 1;
    if (n < 2) return p;
    Vec2 mean{0, 0};
    for (int i = lo; i <= hi; ++i) mean = mean + pts[i];
    mean = mean / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = lo; i <= hi; ++i) {
        Vec2 d = pts[i] - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // Dominant eigenvector of the 2x2 covariance.
    double tr = sxx + syy, det = sxx * syy - sxy * sxy;
    double lam = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    Vec2 dir = std::fabs(sxy) > 1e-30 ? Vec2{lam - syy, sxy} : (sxx >= syy ? Vec2{1, 0} : Vec2{0, 1});
    dir = normalized(dir);
    return mean + dir * dot(p - mean, dir);
}

}  // namespace

std::vector<Vec2> smoothed_polyline(const InterfaceChain& chain, const Domain& dom) {
    std::vector<Vec2> pts;
    if (!chain.closed && chain.corner_start >= 0) pts.push_back(dom.corner_point(chain.corner_start));
    for (const Vec2& m : chain.midpoints) pts.push_back(m);
    if (!chain.closed && chain.corner_finish >= 0) pts.push_back(dom.corner_point(chain.corner_finish));

    const int n = static_cast<int>(pts.size());
    if (n < 3) return pts;
    std::vector<Vec2> out = pts;
    if (chain.closed) {
        std::vector<Vec2> window(5);
        for (int i = 0; i < n; ++i) {
            for (int k = -2; k <= 2; ++k) window[k + 2] = pts[((i + k) % n + n) % n];
            out[i] = project_window(window, 0, 4, pts[i]);
        }
    } else {
        // Endpoints stay pinned (wire anchors, junctions, transitions).
        for (int i = 1; i + 1 < n; ++i) {
            int lo = std::max(0, i - 2);
            int hi = std::min(n - 1, i + 2);
            out[i] = project_window(pts, lo, hi, pts[i]);
        }
    }
    return out;
}

double corrected_length(const InterfaceChain& chain, const Domain& dom) {
    std::vector<Vec2> pts = smoothed_polyline(chain, dom);
    if (pts.size() < 2) return chain.facets.empty() ? 0.0 : dom.spacing();
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) L += dist(pts[i], pts[i + 1]);
    if (chain.closed) L += dist(pts.back(), pts.front());
    return L;
}

}  // namespace soapfilm
