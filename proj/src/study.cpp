#include "soapfilm/study.hpp"

#include <cmath>
#include <limits>

namespace soapfilm {

double wetting_report(const FilmPair& pair, const FacetSet& dry_solution) {
    const Domain& dom = pair.domain();
    if (pair.E.empty()) return std::numeric_limits<double>::infinity();

    std::vector<std::uint8_t> deg(dom.corner_count(), 0);
    dry_solution.for_each([&](FacetId f) {
        auto [a, b] = dom.facet_corners(f);
        ++deg[a];
        ++deg[b];
    });
    double worst = 0.0;
    bool any = false;
    const double half_diag = dom.spacing() * std::sqrt(0.5);
    for (int c = 0; c < dom.corner_count(); ++c) {
        if (deg[c] < 3) continue;
        any = true;
        Vec2 p = dom.corner_point(c);
        double best = std::numeric_limits<double>::infinity();
        pair.E.for_each([&](CellId cell) {
            best = std::min(best, dist(p, dom.cell_center(cell)));
        });
        worst = std::max(worst, std::max(0.0, best - half_diag));
    }
    return any ? worst : std::numeric_limits<double>::infinity();
}

std::vector<ConvergenceRow> convergence_study(const Domain& dom, const SpanningClass& cls,
                                              const std::vector<double>& volumes,
                                              const AnnealParams& params) {
    MinimizeResult plateau = minimize_plateau(dom, cls, params);
    const double two_ell = plateau.energy.total;
    FacetSet dry_K = plateau.pair.derived_K();

    std::vector<ConvergenceRow> rows;
    for (double v : volumes) {
        ConvergenceRow row;
        row.v = v;
        row.two_ell_hat = two_ell;
        if (v <= 0.0) {
            row.psi_hat = two_ell;
            row.gap = 0.0;
            row.wetting_distance = std::numeric_limits<double>::infinity();
        } else {
            MinimizeResult res = minimize_bulk(dom, cls, v, params);
            row.psi_hat = res.energy.total;
            row.gap = row.psi_hat - two_ell;
            row.wetting_distance = wetting_report(res.pair, dry_K);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace soapfilm
