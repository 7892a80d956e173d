#pragma once

#include <string>

#include "soapfilm/grid.hpp"

namespace soapfilm {

/// Generalized soap film (K, E): E a cell set of finite perimeter, K a facet
/// set containing Omega ∩ ∂*E. K is stored as ∂*E (derived from E) plus the
/// extra collapsed part K_extra, kept disjoint from ∂*E.
struct FilmPair {
    CellSet E;
    FacetSet K_extra;

    FilmPair() = default;
    explicit FilmPair(const Domain& dom) : E(dom), K_extra(dom) {}

    const Domain& domain() const { return E.domain(); }

    /// Membership in the derived K = ∂*E ∪ K_extra.
    bool in_K(FacetId f) const {
        if (K_extra.test(f)) return true;
        auto [a, b] = domain().facet_cells(f);
        return E.test(a) != E.test(b);
    }

    FacetSet derived_K() const;

    /// Normalized pairs satisfy K ∩ E^(1) = ∅ at the facet level: K_extra
    /// holds no facet with a side in E. Returns the number of dropped facets.
    int normalize();
    bool is_normalized() const;
};

/// Energy of a pair in a region, split into the multiplicity-one and
/// multiplicity-two contributions. total = perimeter_term + 2*collapsed_term.
struct EnergyReport {
    double perimeter_term = 0.0;  ///< h * |∂*E facets interior to region|
    double collapsed_term = 0.0;  ///< h * |multiplicity-2 facets interior to region|
    double total = 0.0;
    std::string region;
};

/// Bulk-spanning relaxed energy: counts ∂*E once and K ∩ E^(0) twice.
EnergyReport energy_bk(const FilmPair& pair, const CellSet& region);
EnergyReport energy_bk(const FilmPair& pair);

/// Boundary-spanning relaxed energy: counts ∂*E once and K \ ∂*E twice.
EnergyReport energy_bd(const FilmPair& pair, const CellSet& region);
EnergyReport energy_bd(const FilmPair& pair);

/// Representation identity: energy_bk(pair, U) must equal
///   sum_i P(U_i; interior of U) + 2 h |interior ∩ (K \ K*) ∩ E^(0)|
/// where {U_i} is the partition of U \ E induced by K and K* the union of
/// the component boundaries. Returns the absolute residual (0 exactly).
double representation_check(const FilmPair& pair, const CellSet& U);

}  // namespace soapfilm
