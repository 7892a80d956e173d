#pragma once

#include <cstdint>
#include <vector>

#include "soapfilm/film.hpp"
#include "soapfilm/spanning.hpp"

namespace soapfilm {

/// Simulated annealing schedule. Temperatures are in units of the facet
/// energy quantum h; the trajectory is fully determined by the seed.
struct AnnealParams {
    std::uint64_t seed = 1;
    double t_initial = 2.0;
    double t_final = 0.02;
    double cooling = 0.96;
    int moves_per_temperature = 4000;
    int restarts = 4;
    /// Per-cell volume penalty weight (units of h) ramped over the soft
    /// phase; the final third of the schedule uses exact paired swaps.
    double volume_penalty_initial = 0.25;
    double volume_penalty_final = 4.0;
    bool exact_swap = true;
    int trace_stride = 1024;
};

struct TraceRow {
    std::int64_t step = 0;
    double temperature = 0.0;
    double energy = 0.0;
    std::int64_t volume_error_cells = 0;
};

struct MinimizeResult {
    FilmPair pair;
    EnergyReport energy;
    std::vector<TraceRow> trace;
    SpanningCertificate certificate;
    std::int64_t volume_error_cells = 0;
    std::uint64_t seed = 0;  ///< seed of the winning restart
    /// Foam only: per-cell chamber label (0 = liquid, 1..N = chambers).
    std::vector<std::int32_t> chamber_label;
};

/// Anisotropy-corrected film cost, the objective the optimizer minimizes:
/// each facet of the derived K is weighted by its corner pattern (no turn /
/// one turn / two turns = 1 : 0.76448 : 0.70711) and by its multiplicity.
/// Straight and diagonal staircases then cost their Euclidean length exactly
/// and intermediate slopes within about 3%; a plain facet count would drive
/// minimizers to rectilinear trees instead of the Plateau geometry. Reported
/// energies stay exact counting measures.
double anisotropic_cost(const FilmPair& pair);

/// Plateau problem: minimize the film cost over facet sets K spanning every
/// tube. E stays empty; moves are facet toggles plus greedy pruning sweeps.
/// The result is single-facet-removal minimal.
MinimizeResult minimize_plateau(const Domain& dom, const SpanningClass& cls,
                                const AnnealParams& params);

/// Volume-constrained relaxed capillarity: minimize the bulk energy over
/// film pairs with |E| = v (rounded to cells) under the bulk spanning
/// constraint. v = 0 reduces to minimize_plateau.
MinimizeResult minimize_bulk(const Domain& dom, const SpanningClass& cls, double volume,
                             const AnnealParams& params);

/// Wet foam relaxation: chambers keep their volumes (paired swaps), the
/// liquid region E is the complement, no spanning constraint. The energy
/// counts chamber-chamber interfaces twice and liquid boundary once.
MinimizeResult foam_relax(const Domain& dom, const std::vector<CellSet>& initial_chambers,
                          double liquid_fraction, double lambda0, double r0,
                          const AnnealParams& params);

}  // namespace soapfilm
