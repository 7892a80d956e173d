#include "soapfilm/film.hpp"

#include <cmath>

#include "soapfilm/partition.hpp"

namespace soapfilm {

FacetSet FilmPair::derived_K() const {
    FacetSet K = reduced_boundary(E, domain());
    K |= K_extra;
    return K;
}

int FilmPair::normalize() {
    const Domain& dom = domain();
    int dropped = 0;
    std::vector<FacetId> drop;
    K_extra.for_each([&](FacetId f) {
        auto [a, b] = dom.facet_cells(f);
        if (E.test(a) || E.test(b)) drop.push_back(f);
    });
    for (FacetId f : drop) {
        K_extra.reset(f);
        ++dropped;
    }
    return dropped;
}

bool FilmPair::is_normalized() const {
    const Domain& dom = domain();
    bool ok = true;
    K_extra.for_each([&](FacetId f) {
        auto [a, b] = dom.facet_cells(f);
        if (E.test(a) || E.test(b)) ok = false;
    });
    return ok;
}

namespace {

EnergyReport energy_impl(const FilmPair& pair, const CellSet& region, bool bulk) {
    const Domain& dom = pair.domain();
    const double h = dom.spacing();
    std::int64_t n_boundary = 0;
    std::int64_t n_collapsed = 0;
    region.for_each([&](CellId c) {
        bool cE = pair.E.test(c);
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (nb < c || !region.test(nb)) return;
            bool nE = pair.E.test(nb);
            if (cE != nE) {
                ++n_boundary;
            } else if (pair.K_extra.test(f)) {
                // bulk counts K ∩ E^(0) only; bd counts all of K \ ∂*E.
                if (!bulk || (!cE && !nE)) ++n_collapsed;
            }
        });
    });
    EnergyReport rep;
    rep.perimeter_term = n_boundary * h;
    rep.collapsed_term = n_collapsed * h;
    rep.total = rep.perimeter_term + 2.0 * rep.collapsed_term;
    return rep;
}

}  // namespace

EnergyReport energy_bk(const FilmPair& pair, const CellSet& region) {
    EnergyReport rep = energy_impl(pair, region, true);
    rep.region = "region";
    return rep;
}

EnergyReport energy_bk(const FilmPair& pair) {
    EnergyReport rep = energy_impl(pair, pair.domain().omega_cells(), true);
    rep.region = "omega";
    return rep;
}

EnergyReport energy_bd(const FilmPair& pair, const CellSet& region) {
    EnergyReport rep = energy_impl(pair, region, false);
    rep.region = "region";
    return rep;
}

EnergyReport energy_bd(const FilmPair& pair) {
    EnergyReport rep = energy_impl(pair, pair.domain().omega_cells(), false);
    rep.region = "omega";
    return rep;
}

double representation_check(const FilmPair& pair, const CellSet& U) {
    const Domain& dom = pair.domain();
    const double h = dom.spacing();

    double lhs = energy_bk(pair, U).total;

    CellSet UminusE = U;
    UminusE.subtract(pair.E);
    FacetSet K = pair.derived_K();
    Partition part = essential_partition(K, UminusE);

    // sum_i P(U_i; interior of U): facets with both cells in U and exactly
    // one side in U_i. Count from each component side.
    std::int64_t per_sum = 0;
    std::int64_t collapsed_residue = 0;
    U.for_each([&](CellId c) {
        std::int32_t lc = UminusE.test(c) ? part.label_of(c) : -1;
        bool cE = pair.E.test(c);
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (!U.test(nb)) return;
            std::int32_t ln = UminusE.test(nb) ? part.label_of(nb) : -1;
            bool nE = pair.E.test(nb);
            // perimeter contributions, one per incident component
            if (lc != -1 && ln != lc) ++per_sum;
            if (nb < c) return;  // the rest is per facet
            // (K \ K*) ∩ E^(0): K facet, same-or-no component on both sides,
            // both sides outside E. K* facets are exactly those with
            // lc != ln and at least one side labeled.
            bool inK = pair.K_extra.test(f) || (cE != nE);
            bool inKstar = (lc != ln);
            if (inK && !inKstar && !cE && !nE) ++collapsed_residue;
        });
    });
    double rhs = per_sum * h + 2.0 * collapsed_residue * h;
    return std::fabs(lhs - rhs);
}

}  // namespace soapfilm
