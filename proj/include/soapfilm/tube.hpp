#pragma once

#include <vector>

#include "soapfilm/geometry.hpp"
#include "soapfilm/grid.hpp"

namespace soapfilm {

/// Discrete solid torus around a closed core loop: the body is the set of
/// omega cells within `radius` of the loop (trimmed to the component that
/// carries the loop), each body cell carries the arclength parameter of its
/// nearest core point, and slices are the transversal facet disks cutting
/// the body at a fixed parameter. The parameter field realizes the lift into
/// the infinite cyclic cover: an edge's winding increment is +-1 where the
/// parameter wraps past 0 and 0 elsewhere.
struct Tube {
    CellSet body;
    std::vector<FacetSet> slices;        ///< cyclically ordered, pairwise disjoint
    std::vector<double> slice_params;    ///< parameter of each slice
    Polyline core;                       ///< closed core loop
    double loop_length = 0.0;
    double radius = 0.0;
    std::vector<double> cell_param;      ///< per cell; NaN outside body

    // Body graph in local indices, for the winding checks.
    std::vector<CellId> body_cells;      ///< ascending
    std::vector<std::int32_t> local_index;  ///< cell -> local index or -1
    struct Edge {
        std::int32_t a, b;   ///< local indices
        FacetId facet;
        std::int8_t wind;    ///< winding increment when traversed a -> b
    };
    std::vector<Edge> edges;
    // CSR adjacency over local indices: for cell i, entries adj[adj_start[i] .. adj_start[i+1]).
    struct Arc {
        std::int32_t to;
        FacetId facet;
        std::int8_t wind;
    };
    std::vector<std::int32_t> adj_start;
    std::vector<Arc> adj;

    int slice_count() const { return static_cast<int>(slices.size()); }
    double param_of(CellId c) const { return cell_param[static_cast<std::size_t>(c)]; }
};

/// Builds and validates a tube. Throws TubeTouchesWireError if the loop runs
/// through wire or leaves the box, TubeSelfOverlapError if the thickened
/// loop self-overlaps (adjacent cells with far-apart core parameters, i.e.
/// the cyclic cover action would not be free).
Tube build_tube(const Domain& dom, const Polyline& loop, double radius);

}  // namespace soapfilm
