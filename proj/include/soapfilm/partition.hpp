#pragma once

#include <vector>

#include "soapfilm/grid.hpp"

namespace soapfilm {

/// Essential partition of a cell set U induced by a facet set S: the
/// connected components of U's adjacency graph after removing the edges dual
/// to S. Labels are canonical: components numbered by their smallest cell id.
struct Partition {
    const Domain* dom = nullptr;
    CellSet base;                             ///< U
    std::vector<std::int32_t> label;          ///< per cell; -1 outside U
    std::int32_t component_count = 0;
    std::vector<std::int64_t> component_cells;

    std::int32_t label_of(CellId c) const { return label[static_cast<std::size_t>(c)]; }
};

Partition essential_partition(const FacetSet& S, const CellSet& U);

struct DisconnectionWitness {
    bool disconnected = false;
    CellSet part1;  ///< one component
    CellSet part2;  ///< the remaining components
};

/// True iff the essential partition has at least two nonempty components;
/// the witness groups them into two nonempty unions whose mutual interface
/// lies in S.
DisconnectionWitness essentially_disconnects(const FacetSet& S, const CellSet& U);

/// Union of the boundaries of the essential partition, relative to the
/// interior of U: facets with both cells in U whose two sides carry
/// different labels. Always a subset of S.
FacetSet ubep(const FacetSet& S, const CellSet& U);
FacetSet ubep(const Partition& part);

/// Sum over components of P(U_i; interior of U), in length units. Exactly
/// twice the ubep measure.
double partition_interior_perimeter(const Partition& part);

/// Default covering for the essential spanning part: all axis-aligned
/// squares of dyadic side (2, 4, 8, ...) at every position, kept only when
/// entirely wire-free (the covering must stay compactly inside omega).
std::vector<CellSet> dyadic_covering(const Domain& dom);

/// ESP(S) = union over the covering of ubep(S; cover_k). Prunes parts of S
/// (dangling tendrils) that never contribute to disconnecting anything.
FacetSet essential_spanning_part(const FacetSet& S, const std::vector<CellSet>& covering);

}  // namespace soapfilm
