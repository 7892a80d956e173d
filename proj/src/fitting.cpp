#include "soapfilm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "soapfilm/errors.hpp"

namespace soapfilm {

namespace {

struct LineFit {
    Vec2 mean, dir;
    double rms = 0.0;
};

LineFit fit_line(const std::vector<Vec2>& pts) {
    LineFit lf;
    const double n = static_cast<double>(pts.size());
    for (const Vec2& p : pts) lf.mean = lf.mean + p;
    lf.mean = lf.mean / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const Vec2& p : pts) {
        Vec2 d = p - lf.mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    double tr = sxx + syy, det = sxx * syy - sxy * sxy;
    double lam = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    lf.dir = std::fabs(sxy) > 1e-30 ? normalized(Vec2{lam - syy, sxy})
                                    : (sxx >= syy ? Vec2{1, 0} : Vec2{0, 1});
    double ss = 0;
    for (const Vec2& p : pts) {
        Vec2 d = p - lf.mean;
        double off = cross(lf.dir, d);
        ss += off * off;
    }
    lf.rms = std::sqrt(ss / n);
    return lf;
}

struct CircleFit {
    Vec2 center;
    double radius = 0.0;
    double rms = 1e300;
    bool ok = false;
};

/// Kasa algebraic fit followed by a few Gauss-Newton refinement steps.
CircleFit fit_circle(const std::vector<Vec2>& pts) {
    CircleFit cf;
    const std::size_t n = pts.size();
    if (n < 3) return cf;
    // Solve [x y 1] [D E F]^T = -(x^2+y^2) in least squares (3x3 normal eqs).
    double a11 = 0, a12 = 0, a13 = 0, a22 = 0, a23 = 0, a33 = static_cast<double>(n);
    double b1 = 0, b2 = 0, b3 = 0;
    for (const Vec2& p : pts) {
        double z = p.x * p.x + p.y * p.y;
        a11 += p.x * p.x;
        a12 += p.x * p.y;
        a13 += p.x;
        a22 += p.y * p.y;
        a23 += p.y;
        b1 += -z * p.x;
        b2 += -z * p.y;
        b3 += -z;
    }
    // Cramer on the symmetric 3x3 system.
    double det = a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
                 a13 * (a12 * a23 - a22 * a13);
    if (std::fabs(det) < 1e-30) return cf;
    double D = (b1 * (a22 * a33 - a23 * a23) - a12 * (b2 * a33 - a23 * b3) +
                a13 * (b2 * a23 - a22 * b3)) /
               det;
    double E = (a11 * (b2 * a33 - b3 * a23) - b1 * (a12 * a33 - a23 * a13) +
                a13 * (a12 * b3 - b2 * a13)) /
               det;
    double F = (a11 * (a22 * b3 - a23 * b2) - a12 * (a12 * b3 - b2 * a13) +
                b1 * (a12 * a23 - a22 * a13)) /
               det;
    cf.center = {-D / 2, -E / 2};
    double r2 = dot(cf.center, cf.center) - F;
    if (r2 <= 0) return cf;
    cf.radius = std::sqrt(r2);
    // Geometric refinement.
    for (int it = 0; it < 12; ++it) {
        double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double jtr[3] = {0, 0, 0};
        for (const Vec2& p : pts) {
            Vec2 d = p - cf.center;
            double dist_i = norm(d);
            if (dist_i < 1e-12) continue;
            double res = dist_i - cf.radius;
            double jx = -d.x / dist_i, jy = -d.y / dist_i, jr = -1.0;
            double J[3] = {jx, jy, jr};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) jtj[i][j] += J[i] * J[j];
                jtr[i] += J[i] * res;
            }
        }
        for (int i = 0; i < 3; ++i) jtj[i][i] += 1e-12;
        // Solve 3x3 via Gaussian elimination.
        double m[3][4];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) m[i][j] = jtj[i][j];
            m[i][3] = -jtr[i];
        }
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
            std::swap(m[piv], m[col]);
            if (std::fabs(m[col][col]) < 1e-30) break;
            for (int r = 0; r < 3; ++r) {
                if (r == col) continue;
                double f = m[r][col] / m[col][col];
                for (int j = col; j < 4; ++j) m[r][j] -= f * m[col][j];
            }
        }
        double step[3];
        bool good = true;
        for (int i = 0; i < 3; ++i) {
            if (std::fabs(m[i][i]) < 1e-30) {
                good = false;
                break;
            }
            step[i] = m[i][3] / m[i][i];
        }
        if (!good) break;
        cf.center.x += step[0];
        cf.center.y += step[1];
        cf.radius += step[2];
        if (cf.radius <= 0) {
            cf.radius = std::max(1e-9, cf.radius);
            break;
        }
        if (std::fabs(step[0]) + std::fabs(step[1]) + std::fabs(step[2]) < 1e-14) break;
    }
    double ss = 0;
    for (const Vec2& p : pts) {
        double res = norm(p - cf.center) - cf.radius;
        ss += res * res;
    }
    cf.rms = std::sqrt(ss / static_cast<double>(n));
    cf.ok = true;
    return cf;
}

Vec2 project_to_primitive(const ChainFit& fit, const Vec2& p) {
    if (fit.kind == FitKind::Arc) return fit.center + normalized(p - fit.center) * fit.radius;
    Vec2 dir = normalized(fit.p1 - fit.p0);
    return fit.p0 + dir * dot(p - fit.p0, dir);
}

/// Undirected tangent of the fitted primitive at (or near) point p.
Vec2 fit_tangent(const ChainFit& fit, const Vec2& p) {
    if (fit.kind == FitKind::Arc) return normalized(perp(p - fit.center));
    return normalized(fit.p1 - fit.p0);
}

/// Tangent at the chain end touching `corner`, oriented away from it.
Vec2 away_tangent(const ChainFit& fit, const InterfaceChain& chain, const Domain& dom,
                  int corner) {
    Vec2 cp = dom.corner_point(corner);
    Vec2 t;
    if (fit.kind == FitKind::Unfit) {
        std::size_t k = std::min<std::size_t>(2, chain.midpoints.size() - 1);
        bool at_start = chain.corner_start == corner;
        Vec2 ref = at_start ? chain.midpoints[k] : chain.midpoints[chain.midpoints.size() - 1 - k];
        return normalized(ref - cp);
    }
    t = fit_tangent(fit, cp);
    std::size_t k = std::min<std::size_t>(4, chain.midpoints.size() - 1);
    bool at_start = chain.corner_start == corner;
    Vec2 ref = at_start ? chain.midpoints[k] : chain.midpoints[chain.midpoints.size() - 1 - k];
    if (dot(t, ref - cp) < 0) t = t * -1.0;
    return t;
}

double line_angle(const Vec2& a, const Vec2& b) {
    double c = std::fabs(dot(normalized(a), normalized(b)));
    return std::acos(std::clamp(c, 0.0, 1.0));
}

/// Tangency defect between two fitted primitives, as an angle: the radial
/// gap between the line and the circle, normalized by the radius. Zero iff
/// the primitives touch tangentially; it reduces to the crossing angle for
/// small transversal crossings and converges linearly under grid refinement
/// (the crossing angle acos(d/R) is sqrt-sensitive to the O(h) fit noise
/// near tangency and would not).
double primitive_tangency_angle(const ChainFit& a, const ChainFit& b) {
    const ChainFit* line = nullptr;
    const ChainFit* arc = nullptr;
    if (a.kind == FitKind::Segment && b.kind == FitKind::Arc) {
        line = &a;
        arc = &b;
    } else if (b.kind == FitKind::Segment && a.kind == FitKind::Arc) {
        line = &b;
        arc = &a;
    }
    if (line && arc) {
        Vec2 center = arc->free_radius > 0 ? arc->free_center : arc->center;
        double radius = arc->free_radius > 0 ? arc->free_radius : arc->radius;
        Vec2 dir = normalized(line->p1 - line->p0);
        double d = std::fabs(cross(dir, center - line->p0));
        return std::asin(std::clamp(std::fabs(d - radius) / radius, 0.0, 1.0));
    }
    if (a.kind == FitKind::Arc && b.kind == FitKind::Arc) {
        Vec2 ca = a.free_radius > 0 ? a.free_center : a.center;
        double ra = a.free_radius > 0 ? a.free_radius : a.radius;
        Vec2 cb = b.free_radius > 0 ? b.free_center : b.center;
        double rb = b.free_radius > 0 ? b.free_radius : b.radius;
        double d = dist(ca, cb);
        double gap = std::min(std::fabs(d - (ra + rb)), std::fabs(d - std::fabs(ra - rb)));
        return std::asin(std::clamp(gap / std::min(ra, rb), 0.0, 1.0));
    }
    // Two lines (or an unfit side handled by the caller).
    return line_angle(a.p1 - a.p0, b.p1 - b.p0);
}

/// +1 when the given center of curvature lies on the E side of the chain.
double curvature_sign(const FilmPair& pair, const InterfaceChain& chain, const Vec2& center) {
    const Domain& dom = pair.domain();
    FacetId fmid = chain.facets[chain.facets.size() / 2];
    auto [a, b] = dom.facet_cells(fmid);
    bool aE = pair.E.test(a), bE = pair.E.test(b);
    if (aE == bE) return 1.0;
    Vec2 m = dom.facet_midpoint(fmid);
    Vec2 e_side = dom.cell_center(aE ? a : b);
    return dot(center - m, e_side - m) >= 0 ? 1.0 : -1.0;
}

/// Circle fit constrained to be tangent to two sheet lines: the center runs
/// along an angle bisector through the lines' intersection and the radius is
/// the common distance to the lines. One-dimensional least squares over the
/// bisector parameter.
struct ConstrainedArc {
    bool ok = false;
    Vec2 center;
    double radius = 0.0;
    double rms = 0.0;
};

ConstrainedArc fit_circle_tangent_to(const std::vector<Vec2>& pts, const ChainFit& sheet_a,
                                     const ChainFit& sheet_b) {
    ConstrainedArc out;
    if (sheet_a.kind != FitKind::Segment || sheet_b.kind != FitKind::Segment) return out;
    Vec2 va = normalized(sheet_a.p1 - sheet_a.p0);
    Vec2 vb = normalized(sheet_b.p1 - sheet_b.p0);
    double denom = cross(va, vb);
    if (std::fabs(denom) < 1e-9) return out;
    // Intersection X of the two lines.
    Vec2 dp = sheet_b.p0 - sheet_a.p0;
    double t_line = cross(dp, vb) / denom;
    Vec2 X = sheet_a.p0 + va * t_line;

    Vec2 bis[2] = {normalized(va + vb), normalized(va - vb)};
    auto objective = [&](const Vec2& b, double t, double& radius) {
        Vec2 c = X + b * t;
        radius = std::fabs(t) * std::fabs(cross(va, b));
        double ss = 0.0;
        for (const Vec2& p : pts) {
            double r = dist(p, c) - radius;
            ss += r * r;
        }
        return ss;
    };
    double span = 0.0;
    for (const Vec2& p : pts) span = std::max(span, dist(p, X));
    double best_ss = 1e300, best_t = 0.0, best_r = 0.0;
    Vec2 best_b;
    for (const Vec2& b : bis) {
        if (std::fabs(cross(va, b)) < 1e-9) continue;
        // Coarse scan then golden-section refinement.
        double lo = -6.0 * span, hi = 6.0 * span;
        double scan_best = 0.0, scan_val = 1e300;
        for (int i = 0; i <= 240; ++i) {
            double t = lo + (hi - lo) * i / 240.0;
            double r;
            double v = objective(b, t, r);
            if (v < scan_val) {
                scan_val = v;
                scan_best = t;
            }
        }
        double a0 = scan_best - (hi - lo) / 240.0, b0 = scan_best + (hi - lo) / 240.0;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b0 - phi * (b0 - a0), x2 = a0 + phi * (b0 - a0);
        double r_tmp;
        double f1 = objective(b, x1, r_tmp), f2 = objective(b, x2, r_tmp);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                b0 = x2;
                x2 = x1;
                f2 = f1;
                x1 = b0 - phi * (b0 - a0);
                f1 = objective(b, x1, r_tmp);
            } else {
                a0 = x1;
                x1 = x2;
                f1 = f2;
                x2 = a0 + phi * (b0 - a0);
                f2 = objective(b, x2, r_tmp);
            }
        }
        double t = 0.5 * (a0 + b0);
        double r;
        double v = objective(b, t, r);
        if (v < best_ss) {
            best_ss = v;
            best_t = t;
            best_r = r;
            best_b = b;
        }
    }
    if (best_r <= 0.0) return out;
    out.ok = true;
    out.center = X + best_b * best_t;
    out.radius = best_r;
    out.rms = std::sqrt(best_ss / static_cast<double>(pts.size()));
    return out;
}

}  // namespace

FitReport fit_and_check(const FilmPair& pair, const std::vector<InterfaceChain>& chains) {
    const Domain& dom = pair.domain();
    const double h = dom.spacing();
    FitReport report;
    report.fits.resize(chains.size());

    for (std::size_t i = 0; i < chains.size(); ++i) {
        const InterfaceChain& chain = chains[i];
        ChainFit& fit = report.fits[i];
        std::vector<Vec2> pts = smoothed_polyline(chain, dom);
        if (chain.midpoints.size() < 6) {
            fit.kind = FitKind::Unfit;
            if (!pts.empty()) {
                fit.p0 = pts.front();
                fit.p1 = pts.back();
            }
            continue;
        }
        LineFit lf = fit_line(pts);
        // Open wet chains approach the sheets tangentially: near the ends the
        // chain hugs the sheet in a sub-cell wedge, which biases the circle.
        // Fit the circle on the middle of the chain.
        std::vector<Vec2> arc_pts = pts;
        if (!chain.closed && chain.multiplicity == 1 && pts.size() >= 10) {
            std::size_t cut = pts.size() / 5;
            arc_pts.assign(pts.begin() + cut, pts.end() - cut);
        }
        CircleFit cf = fit_circle(arc_pts);
        fit.line_rms = lf.rms;
        double kappa_est = (cf.ok && cf.radius > 1e-9) ? 1.0 / cf.radius : 0.0;
        // Wet boundary chains carry the constant-curvature law and are fitted
        // by circles; collapsed sheets are fitted by lines unless they are
        // genuinely curved (residual beyond 2h).
        bool want_line = chain.multiplicity == 2 ? (lf.rms <= 2.0 * h)
                                                 : (lf.rms <= 0.25 * h);
        if (want_line || !cf.ok || cf.rms > lf.rms) {
            fit.kind = FitKind::Segment;
            fit.rms = lf.rms;
            fit.curvature = 0.0;
            // Endpoints projected on the line, spanning the chain extent.
            double lo = 1e300, hi = -1e300;
            for (const Vec2& p : pts) {
                double s = dot(p - lf.mean, lf.dir);
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            fit.p0 = lf.mean + lf.dir * lo;
            fit.p1 = lf.mean + lf.dir * hi;
        } else {
            fit.kind = FitKind::Arc;
            fit.center = cf.center;
            fit.radius = cf.radius;
            fit.free_center = cf.center;
            fit.free_radius = cf.radius;
            fit.rms = cf.rms;
            fit.curvature = kappa_est;
            fit.p0 = project_to_primitive(fit, pts.front());
            fit.p1 = project_to_primitive(fit, pts.back());
        }
        // Signed curvature: positive when the center of curvature lies on
        // the E side of the chain.
        if (fit.kind == FitKind::Arc)
            fit.curvature = curvature_sign(pair, chain, fit.center) * kappa_est;
    }

    // Corner incidence of chain ends.
    std::map<int, std::vector<std::size_t>> ends;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (chains[i].closed) continue;
        if (chains[i].corner_start >= 0) ends[chains[i].corner_start].push_back(i);
        if (chains[i].corner_finish >= 0) ends[chains[i].corner_finish].push_back(i);
    }

    // Plateau-border arcs flanked by two fitted sheet lines: refit the circle
    // constrained to the tangency law (center on the bisector). The sheets
    // are long and straight, so this pins the curvature much better than the
    // unconstrained fit of a shallow arc.
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const InterfaceChain& chain = chains[i];
        if (chain.closed || chain.multiplicity != 1 || report.fits[i].kind != FitKind::Arc)
            continue;
        const ChainFit* sheet_at[2] = {nullptr, nullptr};
        int which = 0;
        for (int corner : {chain.corner_start, chain.corner_finish}) {
            if (corner < 0) continue;
            for (std::size_t cj : ends[corner]) {
                if (cj == i || chains[cj].multiplicity != 2) continue;
                if (report.fits[cj].kind == FitKind::Segment) sheet_at[which] = &report.fits[cj];
            }
            ++which;
        }
        if (!sheet_at[0] || !sheet_at[1] || sheet_at[0] == sheet_at[1]) continue;
        std::vector<Vec2> pts = smoothed_polyline(chain, dom);
        ConstrainedArc ca = fit_circle_tangent_to(pts, *sheet_at[0], *sheet_at[1]);
        if (ca.ok && ca.rms <= 2.0 * report.fits[i].rms + 0.5 * h) {
            ChainFit& fit = report.fits[i];
            fit.center = ca.center;
            fit.radius = ca.radius;
            fit.rms = ca.rms;
            fit.curvature = curvature_sign(pair, chain, ca.center) / ca.radius;
            fit.p0 = project_to_primitive(fit, pts.front());
            fit.p1 = project_to_primitive(fit, pts.back());
        }
    }

    for (auto& [corner, incident] : ends) {
        if (incident.size() < 2) continue;
        bool has1 = false, has2 = false;
        for (std::size_t ci : incident) {
            (chains[ci].multiplicity == 1 ? has1 : has2) = true;
        }
        Vec2 cp = dom.corner_point(corner);
        if (has1 && has2) {
            // Transition: tangent mismatch for every (sheet, arc) pair.
            for (std::size_t ci : incident) {
                if (chains[ci].multiplicity != 2) continue;
                for (std::size_t cj : incident) {
                    if (chains[cj].multiplicity != 1) continue;
                    TransitionReport tr;
                    tr.corner = corner;
                    tr.point = cp;
                    tr.chain_a = static_cast<int>(ci);
                    tr.chain_b = static_cast<int>(cj);
                    if (report.fits[ci].kind != FitKind::Unfit &&
                        report.fits[cj].kind != FitKind::Unfit) {
                        tr.mismatch = primitive_tangency_angle(report.fits[ci], report.fits[cj]);
                    } else {
                        Vec2 ta = away_tangent(report.fits[ci], chains[ci], dom, corner);
                        Vec2 tb = away_tangent(report.fits[cj], chains[cj], dom, corner);
                        tr.mismatch = line_angle(ta, tb);
                    }
                    report.transitions.push_back(tr);
                }
            }
        } else if (incident.size() >= 3) {
            JunctionReport jr;
            jr.corner = corner;
            jr.point = cp;
            std::vector<Vec2> dirs;
            for (std::size_t ci : incident) {
                jr.chains.push_back(static_cast<int>(ci));
                dirs.push_back(away_tangent(report.fits[ci], chains[ci], dom, corner));
            }
            for (std::size_t i = 0; i < dirs.size(); ++i)
                for (std::size_t j = i + 1; j < dirs.size(); ++j) {
                    double c = std::clamp(dot(dirs[i], dirs[j]), -1.0, 1.0);
                    jr.pairwise_angles.push_back(std::acos(c));
                }
            report.junctions.push_back(std::move(jr));
        }
    }
    return report;
}

std::vector<double> junction_angles(const FitReport& fit) {
    for (const auto& j : fit.junctions)
        if (j.chains.size() == 3) return j.pairwise_angles;
    throw NoJunctionError("no junction with exactly three incident chains");
}

namespace {

double arc_length_between(const Vec2& p, const Vec2& q, double kappa) {
    double c = dist(p, q);
    if (std::fabs(kappa) < 1e-9) return c;
    double half = 0.5 * c * std::fabs(kappa);
    if (half >= 1.0) return c * M_PI / 2.0;  // degenerate half-circle
    return 2.0 * std::asin(half) / std::fabs(kappa);
}

/// Area between the chord p->q and the arc of curvature kappa, positive when
/// the arc bulges to the left of p->q.
double segment_area(const Vec2& p, const Vec2& q, double kappa, bool bulge_left) {
    double c = dist(p, q);
    if (std::fabs(kappa) < 1e-9 || c < 1e-12) return 0.0;
    double R = 1.0 / std::fabs(kappa);
    double half = std::min(1.0, 0.5 * c / R);
    double theta = 2.0 * std::asin(half);
    double area = 0.5 * R * R * (theta - std::sin(theta));
    return bulge_left ? area : -area;
}

}  // namespace

EulerLagrangeReport euler_lagrange_check(const FilmPair& pair,
                                         const std::vector<InterfaceChain>& chains,
                                         const FitReport& fit) {
    const Domain& dom = pair.domain();
    const double h = dom.spacing();
    EulerLagrangeReport rep;

    // (a) single lambda across the wet arcs.
    std::vector<double> kappas;
    for (std::size_t i = 0; i < chains.size(); ++i)
        if (chains[i].multiplicity == 1 && fit.fits[i].kind == FitKind::Arc)
            kappas.push_back(fit.fits[i].curvature);
    if (!kappas.empty()) {
        double mean = 0;
        for (double k : kappas) mean += k;
        mean /= static_cast<double>(kappas.size());
        rep.lambda_mean = mean;
        double worst = 0;
        for (double k : kappas) worst = std::max(worst, std::fabs(k - mean));
        rep.lambda_spread = worst;
        rep.curvature_consistent = worst <= 0.1 * std::fabs(mean) + 1e-12;
    }

    // (b) multiplicity-2 chains straight.
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (chains[i].multiplicity != 2 || chains[i].midpoints.size() < 6) continue;
        double len = corrected_length(chains[i], dom);
        double kappa;
        if (fit.fits[i].kind == FitKind::Arc)
            kappa = std::fabs(fit.fits[i].curvature);
        else {
            // Circle-fit estimate for a segment-classified chain.
            CircleFit cf = fit_circle(smoothed_polyline(chains[i], dom));
            kappa = (cf.ok && cf.radius > 1e-9) ? 1.0 / cf.radius : 0.0;
        }
        rep.worst_sheet_curvature = std::max(rep.worst_sheet_curvature, kappa);
        if (kappa > 2.0 / len + 1e-12) rep.sheets_straight = false;
    }

    // (c) stationarity of the fitted continuum configuration: finite
    // difference of  sum w_e len_e - lambda * Area(E)  under +-h node moves.
    // Nodes are placed at the intersections of the fitted primitives, not at
    // the discrete meeting corners: the corner sits where the tangential
    // wedge reaches one cell, O(sqrt(h/kappa)) away from the continuum node,
    // which would contaminate the first variation.
    struct Edge {
        int a, b;         // node ids
        double weight;    // 1 wet, 2 dry
        double kappa;     // fitted curvature magnitude (0 for segments)
        bool bulge_left;  // arc side relative to a->b
        bool wet;
    };

    // Corner incidence (chain index, end classification).
    std::map<int, std::vector<std::size_t>> corner_chains;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (chains[i].closed) continue;
        if (chains[i].corner_start >= 0) corner_chains[chains[i].corner_start].push_back(i);
        if (chains[i].corner_finish >= 0) corner_chains[chains[i].corner_finish].push_back(i);
    }
    auto reconstructed_node = [&](int corner) -> Vec2 {
        Vec2 cp = dom.corner_point(corner);
        std::vector<const ChainFit*> lines, arcs;
        double min_len = 1e300;
        for (std::size_t ci : corner_chains[corner]) {
            const ChainFit& f = fit.fits[ci];
            min_len = std::min(min_len, corrected_length(chains[ci], dom));
            if (f.kind == FitKind::Segment) lines.push_back(&f);
            if (f.kind == FitKind::Arc) arcs.push_back(&f);
        }
        Vec2 pos = cp;
        if (!lines.empty() && !arcs.empty()) {
            // Transition: contact = foot of the arc center on the sheet line.
            Vec2 v = normalized(lines[0]->p1 - lines[0]->p0);
            Vec2 acc{0, 0};
            for (const ChainFit* a : arcs) {
                Vec2 foot = lines[0]->p0 + v * dot(a->center - lines[0]->p0, v);
                acc = acc + foot;
            }
            pos = acc / static_cast<double>(arcs.size());
        } else if (lines.size() >= 2) {
            // Junction: least-squares intersection of the incident lines.
            double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
            for (const ChainFit* l : lines) {
                Vec2 v = normalized(l->p1 - l->p0);
                double pxx = 1 - v.x * v.x, pxy = -v.x * v.y, pyy = 1 - v.y * v.y;
                a11 += pxx;
                a12 += pxy;
                a22 += pyy;
                b1 += pxx * l->p0.x + pxy * l->p0.y;
                b2 += pxy * l->p0.x + pyy * l->p0.y;
            }
            double det = a11 * a22 - a12 * a12;
            if (std::fabs(det) > 1e-12)
                pos = {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det};
        } else if (arcs.size() >= 2) {
            // Contact of two circles: along the center line.
            Vec2 d = normalized(arcs[1]->center - arcs[0]->center);
            pos = (arcs[0]->center + d * arcs[0]->radius +
                   (arcs[1]->center - d * arcs[1]->radius)) /
                  2.0;
        }
        if (dist(pos, cp) > std::max(0.25 * min_len, 4 * h)) pos = cp;  // reject wild feet
        return pos;
    };

    std::map<int, int> node_of_corner;
    std::vector<Vec2> nodes;
    std::vector<bool> free_node;
    auto node_id = [&](int corner, bool movable, const InterfaceChain& chain) {
        auto it = node_of_corner.find(corner);
        if (it != node_of_corner.end()) {
            if (movable) free_node[it->second] = free_node[it->second] || movable;
            return it->second;
        }
        int id = static_cast<int>(nodes.size());
        node_of_corner[corner] = id;
        Vec2 pos;
        if (movable) {
            pos = reconstructed_node(corner);
        } else {
            // Anchors (wire/open ends): the chain endpoint on its primitive.
            std::size_t ci = corner_chains[corner].empty() ? 0 : corner_chains[corner][0];
            const ChainFit& f = fit.fits[ci];
            Vec2 cp = dom.corner_point(corner);
            pos = (f.kind == FitKind::Unfit)
                      ? cp
                      : (dist(f.p0, cp) < dist(f.p1, cp) ? f.p0 : f.p1);
        }
        nodes.push_back(pos);
        free_node.push_back(movable);
        return id;
        (void)chain;
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const InterfaceChain& c = chains[i];
        if (c.closed || c.corner_start < 0 || c.corner_finish < 0) continue;
        bool movable_s = c.end_start == ChainEndpoint::Junction || c.end_start == ChainEndpoint::Transition;
        bool movable_f = c.end_finish == ChainEndpoint::Junction || c.end_finish == ChainEndpoint::Transition;
        Edge e;
        e.a = node_id(c.corner_start, movable_s, c);
        e.b = node_id(c.corner_finish, movable_f, c);
        e.weight = c.multiplicity == 2 ? 2.0 : 1.0;
        e.wet = c.multiplicity == 1;
        e.kappa = fit.fits[i].kind == FitKind::Arc ? std::fabs(fit.fits[i].curvature) : 0.0;
        if (e.kappa > 0) {
            Vec2 p = nodes[e.a], q = nodes[e.b];
            Vec2 m = c.midpoints[c.midpoints.size() / 2];
            e.bulge_left = cross(q - p, m - p) > 0;
        } else {
            e.bulge_left = true;
        }
        edges.push_back(e);
    }

    // E-blob boundary cycles over wet edges (for the area term).
    std::vector<std::vector<int>> adj(nodes.size());
    for (std::size_t ei = 0; ei < edges.size(); ++ei)
        if (edges[ei].wet) {
            adj[edges[ei].a].push_back(static_cast<int>(ei));
            adj[edges[ei].b].push_back(static_cast<int>(ei));
        }
    std::vector<std::vector<int>> cycles;  // edge index sequences
    {
        std::vector<bool> used(edges.size(), false);
        for (std::size_t start = 0; start < nodes.size(); ++start) {
            if (adj[start].size() != 2) continue;
            for (int e0 : adj[start]) {
                if (used[e0]) continue;
                std::vector<int> cyc;
                int node = static_cast<int>(start), eid = e0;
                bool closed_cycle = false;
                while (!used[eid]) {
                    used[eid] = true;
                    cyc.push_back(eid);
                    node = edges[eid].a == node ? edges[eid].b : edges[eid].a;
                    if (node == static_cast<int>(start)) {
                        closed_cycle = true;
                        break;
                    }
                    if (adj[node].size() != 2) break;
                    eid = adj[node][0] == eid ? adj[node][1] : adj[node][0];
                }
                if (closed_cycle) cycles.push_back(std::move(cyc));
            }
        }
    }

    double lambda = rep.lambda_mean;
    auto model_energy = [&](const std::vector<Vec2>& pos) {
        double total = 0.0;
        for (const Edge& e : edges)
            total += e.weight * arc_length_between(pos[e.a], pos[e.b], e.kappa);
        // Signed blob areas.
        for (const auto& cyc : cycles) {
            // Walk the cycle accumulating shoelace + bulge segments.
            int node = edges[cyc[0]].a;
            // Choose orientation: follow edges in sequence.
            if (cyc.size() > 1) {
                int second = edges[cyc[1]].a;
                int second_b = edges[cyc[1]].b;
                if (edges[cyc[0]].a == second || edges[cyc[0]].a == second_b)
                    node = edges[cyc[0]].b;  // start so that edge 0 leads into edge 1
            }
            double shoelace = 0.0;
            double segments = 0.0;
            int cur = node;
            for (int eid : cyc) {
                const Edge& e = edges[eid];
                int nxt = e.a == cur ? e.b : e.a;
                shoelace += cross(pos[cur], pos[nxt]);
                bool left = e.a == cur ? e.bulge_left : !e.bulge_left;
                // An arc bulging left along the walk carves the lens out of
                // the region, independent of the walk orientation.
                segments += segment_area(pos[cur], pos[nxt], e.kappa, left);
                cur = nxt;
            }
            double area = 0.5 * shoelace - segments;
            total -= lambda * std::fabs(area);
        }
        return total;
    };

    double base = model_energy(nodes);
    (void)base;
    double worst = 0.0;
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
        if (!free_node[ni]) continue;
        for (Vec2 dir : {Vec2{1, 0}, Vec2{0, 1}}) {
            std::vector<Vec2> plus = nodes, minus = nodes;
            plus[ni] = plus[ni] + dir * h;
            minus[ni] = minus[ni] - dir * h;
            double first_order = std::fabs(model_energy(plus) - model_energy(minus)) / 2.0;
            worst = std::max(worst, first_order);
        }
    }
    rep.first_variation = worst;
    rep.threshold = 40.0 * h * h;
    rep.stationary = worst <= rep.threshold;
    return rep;
}

}  // namespace soapfilm
