#include "soapfilm/partition.hpp"

#include <algorithm>

namespace soapfilm {

Partition essential_partition(const FacetSet& S, const CellSet& U) {
    const Domain& dom = U.domain();
    Partition part;
    part.dom = &dom;
    part.base = U;
    part.label.assign(dom.cell_count(), -1);

    // BFS from cells in ascending id order gives the canonical labeling by
    // smallest contained cell index.
    std::vector<CellId> queue;
    U.for_each([&](CellId start) {
        if (part.label[start] != -1) return;
        std::int32_t id = part.component_count++;
        std::int64_t n = 0;
        queue.clear();
        queue.push_back(start);
        part.label[start] = id;
        while (!queue.empty()) {
            CellId c = queue.back();
            queue.pop_back();
            ++n;
            dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
                if (!U.test(nb) || part.label[nb] != -1 || S.test(f)) return;
                part.label[nb] = id;
                queue.push_back(nb);
            });
        }
        part.component_cells.push_back(n);
    });
    return part;
}

DisconnectionWitness essentially_disconnects(const FacetSet& S, const CellSet& U) {
    const Domain& dom = U.domain();
    Partition part = essential_partition(S, U);
    DisconnectionWitness w;
    w.disconnected = part.component_count >= 2;
    w.part1 = CellSet(dom);
    w.part2 = CellSet(dom);
    if (w.disconnected) {
        U.for_each([&](CellId c) {
            (part.label_of(c) == 0 ? w.part1 : w.part2).set(c);
        });
    }
    return w;
}

FacetSet ubep(const Partition& part) {
    const Domain& dom = *part.dom;
    FacetSet out(dom);
    part.base.for_each([&](CellId c) {
        std::int32_t lc = part.label_of(c);
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (nb < c) return;  // visit each facet once
            if (part.base.test(nb) && part.label_of(nb) != lc) out.set(f);
        });
    });
    return out;
}

FacetSet ubep(const FacetSet& S, const CellSet& U) { return ubep(essential_partition(S, U)); }

double partition_interior_perimeter(const Partition& part) {
    const Domain& dom = *part.dom;
    std::int64_t n = 0;
    part.base.for_each([&](CellId c) {
        std::int32_t lc = part.label_of(c);
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
            // Each cross-label facet interior to U is seen from both sides,
            // contributing once to P(U_i;...) and once to P(U_j;...).
            if (part.base.test(nb) && part.label_of(nb) != lc) ++n;
        });
    });
    return static_cast<double>(n) * dom.spacing();
}

std::vector<CellSet> dyadic_covering(const Domain& dom) {
    std::vector<CellSet> covering;
    const int W = dom.width(), H = dom.height();
    for (int s = 2; s <= std::max(W, H); s *= 2) {
        for (int y0 = 0; y0 + s <= H; ++y0) {
            for (int x0 = 0; x0 + s <= W; ++x0) {
                CellSet square(dom);
                bool clean = true;
                for (int y = y0; y < y0 + s && clean; ++y)
                    for (int x = x0; x < x0 + s; ++x) {
                        CellId c = dom.cell_id(x, y);
                        if (dom.is_wire(c)) {
                            clean = false;
                            break;
                        }
                        square.set(c);
                    }
                if (clean) covering.push_back(std::move(square));
            }
        }
    }
    return covering;
}

FacetSet essential_spanning_part(const FacetSet& S, const std::vector<CellSet>& covering) {
    const Domain& dom = S.domain();
    FacetSet out(dom);
    for (const CellSet& U : covering) {
        // Skip covering members that cannot contain any S facet.
        bool touches = false;
        S.for_each([&](FacetId f) {
            if (touches) return;
            auto [a, b] = dom.facet_cells(f);
            if (U.test(a) && U.test(b)) touches = true;
        });
        if (!touches) continue;
        out |= ubep(S, U);
    }
    return out;
}

}  // namespace soapfilm
