#pragma once

#include <vector>

#include "soapfilm/film.hpp"

namespace soapfilm {

enum class ChainEndpoint { Junction, Transition, Wire, Open, None };

/// Maximal facet path of constant multiplicity: multiplicity one along ∂*E,
/// two along the collapsed part K ∩ E^(0). Chains split where three or more
/// K facets meet at a grid corner (junction) and where the multiplicity
/// changes (transition point).
struct InterfaceChain {
    std::vector<FacetId> facets;     ///< ordered
    std::vector<Vec2> midpoints;     ///< facet midpoints, same order
    int multiplicity = 1;            ///< 1 = ∂*E, 2 = collapsed
    bool closed = false;
    ChainEndpoint end_start = ChainEndpoint::None;
    ChainEndpoint end_finish = ChainEndpoint::None;
    int corner_start = -1;  ///< grid corner ids (valid for open chains)
    int corner_finish = -1;
};

/// Decomposes the derived K of a normalized pair into chains. Every K facet
/// lands in exactly one chain.
std::vector<InterfaceChain> extract_chains(const FilmPair& pair);

/// Isotropic length estimate: arclength of the locally line-smoothed
/// midpoint polyline (window 5), with open chains pinned to their endpoint
/// corners. Replaces the facet-count length, which overcounts by up to
/// sqrt(2) on diagonal chains.
double corrected_length(const InterfaceChain& chain, const Domain& dom);

/// Smoothed midpoint polyline used by corrected_length (exposed for fits and
/// rendering).
std::vector<Vec2> smoothed_polyline(const InterfaceChain& chain, const Domain& dom);

}  // namespace soapfilm
