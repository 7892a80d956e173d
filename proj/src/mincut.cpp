#include "soapfilm/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soapfilm/partition.hpp"

namespace soapfilm {

namespace {

constexpr double kInf = 1e18;

/// Dinic max-flow on a small graph. Deterministic for a fixed arc order.
class MaxFlow {
  public:
    explicit MaxFlow(int n) : head_(n, -1), level_(n), iter_(n) {}

    void add_edge(int from, int to, double cap) {
        arcs_.push_back({to, head_[from], cap});
        head_[from] = static_cast<int>(arcs_.size()) - 1;
        arcs_.push_back({from, head_[to], 0.0});
        head_[to] = static_cast<int>(arcs_.size()) - 1;
    }

    double solve(int s, int t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            iter_ = head_;
            double f;
            while ((f = dfs(s, t, kInf)) > 0) flow += f;
        }
        return flow;
    }

    /// After solve: true iff v is reachable from s in the residual graph.
    bool source_side(int v) const { return level_[v] >= 0; }

  private:
    struct Arc {
        int to;
        int next;
        double cap;
    };

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        queue_.assign(1, s);
        level_[s] = 0;
        for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
            int u = queue_[qi];
            for (int e = head_[u]; e != -1; e = arcs_[e].next) {
                if (arcs_[e].cap > 1e-12 && level_[arcs_[e].to] < 0) {
                    level_[arcs_[e].to] = level_[u] + 1;
                    queue_.push_back(arcs_[e].to);
                }
            }
        }
        return level_[t] >= 0;
    }

    double dfs(int u, int t, double limit) {
        if (u == t) return limit;
        for (int& e = iter_[u]; e != -1; e = arcs_[e].next) {
            Arc& a = arcs_[e];
            if (a.cap > 1e-12 && level_[a.to] == level_[u] + 1) {
                double f = dfs(a.to, t, std::min(limit, a.cap));
                if (f > 0) {
                    a.cap -= f;
                    arcs_[e ^ 1].cap += f;
                    return f;
                }
            }
        }
        return 0.0;
    }

    std::vector<Arc> arcs_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> iter_;
    std::vector<int> queue_;
};

/// Rim of the ball: ball cells with a grid neighbor outside the ball (or on
/// the box edge); these stay fixed so perturbations are compactly supported.
CellSet ball_rim(const CellSet& ball) {
    const Domain& dom = ball.domain();
    CellSet rim(dom);
    ball.for_each([&](CellId c) {
        int x = dom.cell_x(c), y = dom.cell_y(c);
        bool edge = x == 0 || y == 0 || x + 1 == dom.width() || y + 1 == dom.height();
        if (!edge) {
            for (auto [dx, dy] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
                CellId nb = dom.cell_id(x + dx, y + dy);
                if (!ball.test(nb)) {
                    edge = true;
                    break;
                }
            }
        }
        if (edge) rim.set(c);
    });
    return rim;
}

}  // namespace

double local_cut_energy(const CellSet& U, const CellSet& V, const CellSet& ball, double lambda) {
    const Domain& dom = U.domain();
    const double h = dom.spacing();
    std::int64_t cut = 0, delta = 0;
    ball.for_each([&](CellId c) {
        if (V.test(c) != U.test(c)) ++delta;
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
            if (nb < c || !ball.test(nb)) return;
            if (V.test(c) != V.test(nb)) ++cut;
        });
    });
    return cut * h + lambda * h * h * static_cast<double>(delta);
}

CellSet local_min_cut(const CellSet& U, const CellSet& ball, double lambda) {
    const Domain& dom = U.domain();
    const double h = dom.spacing();
    CellSet rim = ball_rim(ball);

    std::vector<CellId> free_cells;
    ball.for_each([&](CellId c) {
        if (!rim.test(c)) free_cells.push_back(c);
    });

    CellSet best = U;
    if (ball.count() <= 20) {
        // Exhaustive over the free cells.
        const int nf = static_cast<int>(free_cells.size());
        double best_val = std::numeric_limits<double>::infinity();
        CellSet V = U;
        for (std::uint32_t mask = 0; mask < (1u << nf); ++mask) {
            for (int i = 0; i < nf; ++i) V.mutable_bits().assign(free_cells[i], (mask >> i) & 1);
            V.recount();
            double val = local_cut_energy(U, V, ball, lambda);
            if (val < best_val - 1e-15) {
                best_val = val;
                best = V;
            }
        }
        return best;
    }

    // Max-flow formulation: source side = inside V.
    std::vector<std::int32_t> idx(dom.cell_count(), -1);
    std::vector<CellId> cells;
    ball.for_each([&](CellId c) {
        idx[c] = static_cast<std::int32_t>(cells.size());
        cells.push_back(c);
    });
    const int n = static_cast<int>(cells.size());
    const int s = n, t = n + 1;
    MaxFlow mf(n + 2);
    for (CellId c : cells) {
        bool fixed = rim.test(c);
        double w = fixed ? kInf : lambda * h * h;
        if (U.test(c))
            mf.add_edge(s, idx[c], w);
        else
            mf.add_edge(idx[c], t, w);
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
            if (nb < c || !ball.test(nb)) return;
            mf.add_edge(idx[c], idx[nb], h);
            mf.add_edge(idx[nb], idx[c], h);
        });
    }
    mf.solve(s, t);
    for (CellId c : cells) best.mutable_bits().assign(c, mf.source_side(idx[c]));
    best.recount();
    return best;
}

namespace {

struct SampledBall {
    CellId center;
    int radius_cells;
    CellSet cells;
};

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<SampledBall> sample_balls(const Domain& dom, double r0, int samples,
                                      std::uint64_t seed) {
    std::vector<SampledBall> balls;
    const double h = dom.spacing();
    int rc = std::max(2, static_cast<int>(std::floor(r0 / h)) - 1);
    std::uint64_t state = seed ^ 0x5eedba11ULL;
    int tries = samples * 64;
    while (static_cast<int>(balls.size()) < samples && tries-- > 0) {
        CellId c0 = static_cast<CellId>(splitmix64(state) % dom.cell_count());
        int x0 = dom.cell_x(c0), y0 = dom.cell_y(c0);
        if (x0 - rc < 0 || y0 - rc < 0 || x0 + rc >= dom.width() || y0 + rc >= dom.height())
            continue;
        SampledBall ball;
        ball.center = c0;
        ball.radius_cells = rc;
        ball.cells = CellSet(dom);
        bool ok = true;
        for (int y = y0 - rc; y <= y0 + rc && ok; ++y)
            for (int x = x0 - rc; x <= x0 + rc; ++x) {
                if ((x - x0) * (x - x0) + (y - y0) * (y - y0) > rc * rc) continue;
                CellId c = dom.cell_id(x, y);
                if (dom.is_wire(c)) {
                    ok = false;
                    break;
                }
                ball.cells.set(c);
            }
        if (ok) balls.push_back(std::move(ball));
    }
    return balls;
}

}  // namespace

LambdaMinimalityReport lambda_minimality_check(const FilmPair& pair, double lambda, double r0,
                                               int samples, std::uint64_t seed) {
    const Domain& dom = pair.domain();
    LambdaMinimalityReport rep;
    rep.lambda = lambda;
    rep.r0 = r0;
    FacetSet K = pair.derived_K();
    const double eps = 1e-9 * dom.spacing();
    for (const SampledBall& ball : sample_balls(dom, r0, samples, seed)) {
        CellSet dry = ball.cells;
        dry.subtract(pair.E);
        Partition part = essential_partition(K, dry);
        BallReport br;
        br.center = ball.center;
        br.radius_cells = ball.radius_cells;
        double worst = 0.0;
        for (std::int32_t i = 0; i < part.component_count; ++i) {
            CellSet Ui(dom);
            dry.for_each([&](CellId c) {
                if (part.label_of(c) == i) Ui.set(c);
            });
            CellSet V = local_min_cut(Ui, ball.cells, lambda);
            double margin =
                local_cut_energy(Ui, V, ball.cells, lambda) - local_cut_energy(Ui, Ui, ball.cells, lambda);
            if (margin < worst) {
                worst = margin;
                br.component = i;
            }
        }
        br.margin = worst;
        br.pass = worst >= -eps;
        if (!br.pass) rep.all_pass = false;
        rep.worst_margin = std::min(rep.worst_margin, worst);
        rep.balls.push_back(std::move(br));
    }
    return rep;
}

double smallest_passing_lambda(const FilmPair& pair, double r0, int samples, std::uint64_t seed,
                               double lo, double hi) {
    auto passes = [&](double lambda) {
        return lambda_minimality_check(pair, lambda, r0, samples, seed).all_pass;
    };
    if (!passes(hi)) return std::numeric_limits<double>::infinity();
    if (passes(lo)) return lo;
    for (int it = 0; it < 24; ++it) {
        double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace soapfilm
