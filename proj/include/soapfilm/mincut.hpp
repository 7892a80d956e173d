#pragma once

#include <cstdint>
#include <vector>

#include "soapfilm/film.hpp"
#include "soapfilm/grid.hpp"

namespace soapfilm {

/// Minimizes  h * |cut facets inside ball|  +  lambda * h^2 * |V Δ U inside ball|
/// over cell sets V that agree with U outside the ball and on the ball's rim
/// (the cells of the ball adjacent to its complement). Cut facets are the
/// facets with both cells in the ball and different V-membership, plus the
/// rim-internal facets, i.e. P(V; open ball) with compactly supported
/// perturbations. Exhaustive enumeration when at most 20 cells are free,
/// max-flow minimum cut otherwise.
CellSet local_min_cut(const CellSet& U, const CellSet& ball, double lambda);

/// Value of the local objective for a given V (for reporting/tests).
double local_cut_energy(const CellSet& U, const CellSet& V, const CellSet& ball, double lambda);

struct BallReport {
    CellId center = -1;
    int radius_cells = 0;
    int component = -1;
    double margin = 0.0;  ///< min_V objective - objective(U_i); negative = fails
    bool pass = true;
};

struct LambdaMinimalityReport {
    bool all_pass = true;
    double worst_margin = 0.0;
    std::vector<BallReport> balls;
    double lambda = 0.0;
    double r0 = 0.0;
};

/// Samples balls of radius < r0 inside omega and checks each component of
/// ball \ (K ∪ E) for (Λ, r0)-minimality against the local min-cut oracle.
LambdaMinimalityReport lambda_minimality_check(const FilmPair& pair, double lambda, double r0,
                                               int samples, std::uint64_t seed);

/// Smallest Λ (from a doubling/bisection search over [lo, hi]) that passes
/// lambda_minimality_check; +inf if even hi fails.
double smallest_passing_lambda(const FilmPair& pair, double r0, int samples, std::uint64_t seed,
                               double lo, double hi);

}  // namespace soapfilm
