#pragma once

#include <optional>
#include <string>
#include <vector>

#include "soapfilm/film.hpp"
#include "soapfilm/tube.hpp"

namespace soapfilm {

struct SpanningGenerator {
    std::string id;
    Polyline loop;
    double tube_radius = 0.0;
};

/// Finitely many generator loops, one validated tube each. Certification is
/// per tube; homotopy classes not represented by a generator are the scene
/// author's responsibility.
struct SpanningClass {
    std::vector<SpanningGenerator> generators;
    std::vector<Tube> tubes;
};

SpanningClass build_spanning_class(const Domain& dom, std::vector<SpanningGenerator> generators);

enum class SpanningMode { Bulk, Bd };

struct SliceFailure {
    int slice_index = -1;
    FacetId facet = -1;
};

/// Slice/UBEP spanning check for a bare facet set K: for every slice, every
/// slice facet not itself in K lies in ubep(K ∪ T[s]; body). Facets of
/// T[s] ∩ K are the discrete analog of the measure-zero exceptional slices
/// (a slice contained in K) and are exempt.
bool is_spanning_bd(const FacetSet& K, const Tube& tube, SliceFailure* failure = nullptr);

/// Slice/UBEP check through the bulk: only slice facets exterior to E (both
/// sides outside) are required to lie in ubep(K ∪ T[s]; body); the partition
/// is over the whole body. Requires K ⊇ ∂*E (a film pair) for the checker to
/// agree with the winding oracle.
bool is_spanning_bulk(const FacetSet& K, const CellSet& E, const Tube& tube,
                      SliceFailure* failure = nullptr);

struct WindingWitness {
    bool spanning = true;
    std::vector<CellId> loop;  ///< a winding cell cycle avoiding K and E, when not spanning
};

/// Direct oracle: spanning iff the body graph, with edges dual to K removed
/// and E-cells deleted, has no cycle of nonzero winding (no cell reaches its
/// own translate in the cyclic cover).
WindingWitness winding_oracle(const FacetSet& K, const CellSet* E, const Tube& tube);

struct TubeVerdict {
    std::string generator_id;
    bool spanning = false;
    int failing_slice = -1;
    FacetId failing_facet = -1;
    std::vector<CellId> witness_loop;
};

struct SpanningCertificate {
    bool spanning = false;
    SpanningMode mode = SpanningMode::Bulk;
    std::vector<TubeVerdict> tubes;
};

/// Conjunction of the per-tube slice/UBEP checks. Bulk mode certifies
/// K ∪ E^(1); bd mode certifies K alone (E ignored). Fills witness loops
/// from the winding oracle for failing tubes.
SpanningCertificate is_spanning(const FilmPair& pair, const SpanningClass& cls, SpanningMode mode);

/// Fast per-tube constraint check used inside the optimizer (winding oracle;
/// equivalent to the slice/UBEP check, tested). Bd mode ignores E.
bool tube_spanning_fast(const FilmPair& pair, const Tube& tube, SpanningMode mode);

/// Reusable winding-consistency checker with per-tube scratch buffers, for
/// the optimizer's inner loop.
class TubeOracle {
  public:
    explicit TubeOracle(const Tube& tube);
    bool check(const FilmPair& pair, SpanningMode mode);
    const Tube& tube() const { return *tube_; }

  private:
    const Tube* tube_;
    std::vector<std::int32_t> pot_;
    std::vector<std::int32_t> order_;
};

}  // namespace soapfilm
