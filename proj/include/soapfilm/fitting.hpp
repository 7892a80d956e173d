#pragma once

#include <vector>

#include "soapfilm/chains.hpp"

namespace soapfilm {

enum class FitKind { Segment, Arc, Unfit };

struct ChainFit {
    FitKind kind = FitKind::Unfit;
    Vec2 p0, p1;            ///< fitted endpoints (on the primitive)
    Vec2 center;            ///< arc only
    double radius = 0.0;    ///< arc only
    /// Signed curvature with respect to the outer normal of E: positive when
    /// the center of curvature lies on the E side (a droplet boundary),
    /// negative when it lies on the dry side (a Plateau border arc). Zero
    /// for segments.
    double curvature = 0.0;
    double rms = 0.0;
    double line_rms = 0.0;
    /// Unconstrained circle fit (kept when the reported circle is the
    /// tangency-constrained refit); transition mismatches are measured
    /// against this one so the tangency check stays independent.
    Vec2 free_center;
    double free_radius = 0.0;
};

struct TransitionReport {
    int corner = -1;
    Vec2 point;
    int chain_a = -1;
    int chain_b = -1;
    double mismatch = 0.0;  ///< tangent angle mismatch, radians in [0, pi/2]
};

struct JunctionReport {
    int corner = -1;
    Vec2 point;
    std::vector<int> chains;
    std::vector<double> pairwise_angles;  ///< radians in [0, pi]
};

struct FitReport {
    std::vector<ChainFit> fits;  ///< parallel to the chain list
    std::vector<TransitionReport> transitions;
    std::vector<JunctionReport> junctions;
};

/// Fits every chain (total-least-squares line, algebraic + geometric circle),
/// classifies segment vs arc by the 2h residual rule, computes tangent
/// mismatches at transition points from the one-sided fits and incident
/// tangent angles at junctions. Chains with fewer than 6 midpoints are
/// reported Unfit.
FitReport fit_and_check(const FilmPair& pair, const std::vector<InterfaceChain>& chains);

struct EulerLagrangeReport {
    bool curvature_consistent = true;  ///< all wet arc curvatures within 10% of the mean
    double lambda_mean = 0.0;
    double lambda_spread = 0.0;
    bool sheets_straight = true;  ///< every multiplicity-2 chain: |curvature| <= 2/length
    double worst_sheet_curvature = 0.0;
    bool stationary = true;
    double first_variation = 0.0;  ///< max |dL| first-order part under +-h node shifts
    double threshold = 0.0;
};

/// Checks the discrete consequences of the Euler-Lagrange equation: a single
/// negative λ across the wet arcs, straight dry sheets, and vanishing first
/// variation of the fitted continuum configuration under +-h perturbations
/// of its junction and transition nodes.
EulerLagrangeReport euler_lagrange_check(const FilmPair& pair,
                                         const std::vector<InterfaceChain>& chains,
                                         const FitReport& fit);

/// Pairwise tangent angles at the unique 3-chain junction (degrees would be
/// angles*180/pi). Throws NoJunctionError when no 3-chain junction exists.
std::vector<double> junction_angles(const FitReport& fit);

}  // namespace soapfilm
