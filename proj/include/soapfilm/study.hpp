#pragma once

#include <vector>

#include "soapfilm/anneal.hpp"

namespace soapfilm {

struct ConvergenceRow {
    double v = 0.0;
    double psi_hat = 0.0;      ///< computed upper bound for the volume-constrained minimum
    double two_ell_hat = 0.0;  ///< 2 * Plateau estimate
    double gap = 0.0;
    double wetting_distance = 0.0;  ///< max over dry junctions of dist(junction, E)
};

/// Runs the Plateau problem once and minimize_bulk for each volume; rows
/// report the vanishing-volume gap and the wetting distance. v = 0 rows
/// reuse the Plateau result (gap exactly 0).
std::vector<ConvergenceRow> convergence_study(const Domain& dom, const SpanningClass& cls,
                                              const std::vector<double>& volumes,
                                              const AnnealParams& params);

/// Max over junctions of the dry solution of the distance to E; 0 when the
/// junction is covered by E, +inf when E is empty (sentinel).
double wetting_report(const FilmPair& pair, const FacetSet& dry_solution);

}  // namespace soapfilm
