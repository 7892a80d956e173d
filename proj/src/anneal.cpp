#include "soapfilm/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "soapfilm/errors.hpp"

namespace soapfilm {

namespace {

/// Portable deterministic RNG (splitmix64).
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }
};

int env_thread_count() {
    if (const char* s = std::getenv("SOAPFILM_THREADS")) {
        int n = std::atoi(s);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(r) for r in [0, n) on up to thread-count workers; exceptions are
/// rethrown in restart order.
template <class Fn>
void parallel_restarts(int n, Fn&& fn) {
    int workers = std::min(n, env_thread_count());
    if (workers <= 1) {
        for (int r = 0; r < n; ++r) fn(r);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int r = w; r < n; r += workers) {
                try {
                    fn(r);
                } catch (...) {
                    errors[r] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Corner-pattern weights of the anisotropy-corrected cost: a facet whose
// chain continues straight on both sides costs 1.0, a 45-degree staircase
// facet (turns on both sides) costs sqrt(1/2), one turn costs the value that
// makes slope-1/2 staircases exact.
constexpr double kWeightStraight = 1.0;
constexpr double kWeightOneTurn = 0.76448;  // (sqrt(5) - sqrt(1/2)) / 2
constexpr double kWeightTwoTurns = 0.70711;

/// Facets incident to a grid corner (up to 4).
int facets_at_corner(const Domain& dom, int corner, FacetId out[4]) {
    int cx = corner % (dom.width() + 1);
    int cy = corner / (dom.width() + 1);
    int n = 0;
    if (cx >= 1 && cx <= dom.width() - 1) {
        if (cy >= 1) out[n++] = dom.vertical_facet(cx - 1, cy - 1);
        if (cy <= dom.height() - 1) out[n++] = dom.vertical_facet(cx - 1, cy);
    }
    if (cy >= 1 && cy <= dom.height() - 1) {
        if (cx >= 1) out[n++] = dom.horizontal_facet(cx - 1, cy - 1);
        if (cx <= dom.width() - 1) out[n++] = dom.horizontal_facet(cx, cy - 1);
    }
    return n;
}

/// Pattern weight of facet f within the film structure described by in_k.
template <class InK>
double pattern_weight(const Domain& dom, FacetId f, InK&& in_k) {
    bool f_vertical = dom.facet_is_vertical(f);
    auto [ca, cb] = dom.facet_corners(f);
    int turns = 0;
    for (int corner : {ca, cb}) {
        FacetId others[4];
        int n = facets_at_corner(dom, corner, others);
        bool straight = false, any = false;
        for (int i = 0; i < n; ++i) {
            FacetId g = others[i];
            if (g == f || !dom.facet_interior(g) || !in_k(g)) continue;
            any = true;
            if (dom.facet_is_vertical(g) == f_vertical) straight = true;
        }
        if (any && !straight) ++turns;
    }
    return turns == 0 ? kWeightStraight : turns == 1 ? kWeightOneTurn : kWeightTwoTurns;
}

/// Film pair with incremental cost bookkeeping and index lists for O(1)
/// sampling. Under the normalization invariant K_extra never touches E, so
/// every K_extra facet carries multiplicity 2 and every ∂*E facet carries 1.
/// The maintained objective is the anisotropy-corrected cost.
struct FilmState {
    const Domain& dom;
    FilmPair pair;
    std::int64_t n_boundary = 0;
    double wsum = 0.0;  // sum of multiplicity * pattern weight over derived K
    std::vector<CellId> e_list;
    std::vector<std::int32_t> e_pos;
    std::vector<FacetId> k_list;
    std::vector<std::int32_t> k_pos;

    explicit FilmState(const Domain& d)
        : dom(d), pair(d), e_pos(d.cell_count(), -1), k_pos(d.facet_count(), -1) {}

    double energy() const {
        return dom.spacing() * (static_cast<double>(n_boundary) + 2.0 * k_list.size());
    }
    /// Anisotropy-corrected objective (what the annealer minimizes).
    double objective() const { return dom.spacing() * wsum; }
    std::int64_t volume_cells() const { return pair.E.count(); }

    int facet_mult(FacetId f) const {
        auto [a, b] = dom.facet_cells(f);
        if (pair.E.test(a) != pair.E.test(b)) return 1;
        return pair.K_extra.test(f) ? 2 : 0;
    }
    double weighted_term(FacetId f) const {
        int mult = facet_mult(f);
        if (mult == 0) return 0.0;
        return mult * pattern_weight(dom, f, [&](FacetId g) { return facet_mult(g) != 0; });
    }

    enum OpKind : std::uint8_t { CellOn, CellOff, KOn, KOff };
    struct Op {
        OpKind kind;
        std::int32_t id;
    };

    /// Facets whose weighted terms may change when `seed` facets flip: the
    /// seeds plus everything sharing a corner with them.
    void affected_facets(const FacetId* seed, int n_seed, std::vector<FacetId>& out) const {
        out.clear();
        for (int i = 0; i < n_seed; ++i) {
            FacetId f = seed[i];
            out.push_back(f);
            auto [ca, cb] = dom.facet_corners(f);
            for (int corner : {ca, cb}) {
                FacetId others[4];
                int n = facets_at_corner(dom, corner, others);
                for (int k = 0; k < n; ++k)
                    if (others[k] != f && dom.facet_interior(others[k])) out.push_back(others[k]);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }

    template <class Mutate>
    void with_weight_update(const FacetId* seed, int n_seed, Mutate&& mutate) {
        affected_facets(seed, n_seed, scratch_);
        double before = 0.0;
        for (FacetId f : scratch_) before += weighted_term(f);
        mutate();
        double after = 0.0;
        for (FacetId f : scratch_) after += weighted_term(f);
        wsum += after - before;
    }

    void k_on(FacetId f, std::vector<Op>* undo) {
        with_weight_update(&f, 1, [&] {
            pair.K_extra.set(f);
            k_pos[f] = static_cast<std::int32_t>(k_list.size());
            k_list.push_back(f);
        });
        if (undo) undo->push_back({KOn, f});
    }
    void k_off(FacetId f, std::vector<Op>* undo) {
        with_weight_update(&f, 1, [&] {
            pair.K_extra.reset(f);
            std::int32_t p = k_pos[f];
            k_pos[k_list.back()] = p;
            std::swap(k_list[p], k_list.back());
            k_list.pop_back();
            k_pos[f] = -1;
        });
        if (undo) undo->push_back({KOff, f});
    }
    void cell_on(CellId c, std::vector<Op>* undo) {
        // Keep K_extra off E first (journaled separately).
        dom.for_each_interior_neighbor(c, [&](CellId, FacetId f) {
            if (pair.K_extra.test(f)) k_off(f, undo);
        });
        FacetId seed[4];
        int n_seed = 0;
        dom.for_each_incident_facet(c, [&](FacetId f) {
            if (dom.facet_interior(f)) seed[n_seed++] = f;
        });
        with_weight_update(seed, n_seed, [&] {
            dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
                n_boundary += pair.E.test(nb) ? -1 : +1;
            });
            pair.E.set(c);
            e_pos[c] = static_cast<std::int32_t>(e_list.size());
            e_list.push_back(c);
        });
        if (undo) undo->push_back({CellOn, c});
    }
    void cell_off(CellId c, std::vector<Op>* undo) {
        FacetId seed[4];
        int n_seed = 0;
        dom.for_each_incident_facet(c, [&](FacetId f) {
            if (dom.facet_interior(f)) seed[n_seed++] = f;
        });
        with_weight_update(seed, n_seed, [&] {
            pair.E.reset(c);
            dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
                n_boundary += pair.E.test(nb) ? +1 : -1;
            });
            std::int32_t p = e_pos[c];
            e_pos[e_list.back()] = p;
            std::swap(e_list[p], e_list.back());
            e_list.pop_back();
            e_pos[c] = -1;
        });
        if (undo) undo->push_back({CellOff, c});
    }

    void undo(const std::vector<Op>& ops) {
        for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
            switch (it->kind) {
                case CellOn: cell_off(it->id, nullptr); break;
                case CellOff: cell_on(it->id, nullptr); break;
                case KOn: k_off(it->id, nullptr); break;
                case KOff: k_on(it->id, nullptr); break;
            }
        }
    }

    void snapshot_counts() {
        // Rebuild counters from the pair (used after loading an initial pair).
        n_boundary = static_cast<std::int64_t>(reduced_boundary(pair.E, dom).count());
        e_list.clear();
        std::fill(e_pos.begin(), e_pos.end(), -1);
        pair.E.for_each([&](CellId c) {
            e_pos[c] = static_cast<std::int32_t>(e_list.size());
            e_list.push_back(c);
        });
        k_list.clear();
        std::fill(k_pos.begin(), k_pos.end(), -1);
        pair.K_extra.for_each([&](FacetId f) {
            k_pos[f] = static_cast<std::int32_t>(k_list.size());
            k_list.push_back(f);
        });
        wsum = 0.0;
        for (FacetId f = 0; f < dom.facet_count(); ++f)
            if (dom.facet_interior(f)) wsum += weighted_term(f);
    }

  private:
    std::vector<FacetId> scratch_;
};

/// Per-run spanning machinery: one oracle per tube plus facet-in-body masks.
struct SpanningGuard {
    const SpanningClass& cls;
    SpanningMode mode;
    std::vector<TubeOracle> oracles;
    std::vector<DynamicBitset> facet_in_body;

    SpanningGuard(const Domain& dom, const SpanningClass& c, SpanningMode m) : cls(c), mode(m) {
        for (const Tube& tube : cls.tubes) {
            oracles.emplace_back(tube);
            DynamicBitset mask(dom.facet_count());
            for (const auto& e : tube.edges) mask.set(e.facet);
            facet_in_body.push_back(std::move(mask));
        }
    }

    bool tube_has_cell(std::size_t i, CellId c) const {
        return cls.tubes[i].local_index[c] != -1;
    }
    bool tube_has_facet(std::size_t i, FacetId f) const { return facet_in_body[i].test(f); }

    /// Rechecks the tubes affected by removed blockers. Cells in
    /// `risky_cells` were removed from E, facets in `risky_facets` from K.
    bool still_spanning(const FilmState& st, const std::vector<CellId>& risky_cells,
                        const std::vector<FacetId>& risky_facets) {
        for (std::size_t i = 0; i < oracles.size(); ++i) {
            bool affected = false;
            for (CellId c : risky_cells)
                if (tube_has_cell(i, c)) {
                    affected = true;
                    break;
                }
            if (!affected)
                for (FacetId f : risky_facets)
                    if (tube_has_facet(i, f)) {
                        affected = true;
                        break;
                    }
            if (affected && !oracles[i].check(st.pair, mode)) return false;
        }
        return true;
    }

    bool all_spanning(const FilmState& st) {
        for (auto& o : oracles)
            if (!o.check(st.pair, mode)) return false;
        return true;
    }
};

/// Facets sharing a corner with f (including f's own slots), for the
/// locality-biased toggle proposal.
int corner_facets(const Domain& dom, int corner, FacetId out[4]) {
    int cx = corner % (dom.width() + 1);
    int cy = corner / (dom.width() + 1);
    int n = 0;
    if (cx >= 1 && cx <= dom.width() - 1) {
        if (cy >= 1) out[n++] = dom.vertical_facet(cx - 1, cy - 1);
        if (cy <= dom.height() - 1) out[n++] = dom.vertical_facet(cx - 1, cy);
    }
    if (cy >= 1 && cy <= dom.height() - 1) {
        if (cx >= 1) out[n++] = dom.horizontal_facet(cx - 1, cy - 1);
        if (cx <= dom.width() - 1) out[n++] = dom.horizontal_facet(cx, cy - 1);
    }
    return n;
}

/// Greedy pruning sweep: removes, in ascending facet order, every K facet
/// whose removal preserves spanning. Repeats until a fixpoint.
void prune_k(FilmState& st, SpanningGuard& guard) {
    bool changed = true;
    std::vector<FacetId> risky(1);
    while (changed) {
        changed = false;
        std::vector<FacetId> order = st.k_list;
        std::sort(order.begin(), order.end());
        for (FacetId f : order) {
            if (!st.pair.K_extra.test(f)) continue;
            st.k_off(f, nullptr);
            risky[0] = f;
            if (guard.still_spanning(st, {}, risky)) {
                changed = true;
            } else {
                st.k_on(f, nullptr);
            }
        }
    }
}

struct RestartOutcome {
    FilmPair pair;
    double energy = 0.0;
    std::vector<TraceRow> trace;
    std::uint64_t seed = 0;
};

int stage_count(const AnnealParams& p) {
    if (p.t_final >= p.t_initial || p.cooling >= 1.0 || p.cooling <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(p.t_final / p.t_initial) /
                                                  std::log(p.cooling))));
}

// ---------------------------------------------------------------- plateau --

/// Initial spanning set: one full cut per tube. Among a tube's slices, take
/// the one whose facets sit closest to the wire centroid (films collapse
/// inward, so this seeds the shared-junction region), with the facet count
/// as tiebreaker.
void plateau_initial_cuts(const Domain& dom, const SpanningClass& cls, FilmState& st) {
    Vec2 centroid{0, 0};
    if (dom.wire_cells().count() > 0) {
        dom.wire_cells().for_each([&](CellId c) { centroid = centroid + dom.cell_center(c); });
        centroid = centroid / static_cast<double>(dom.wire_cells().count());
    } else {
        centroid = {dom.width() * dom.spacing() / 2, dom.height() * dom.spacing() / 2};
    }
    for (const Tube& tube : cls.tubes) {
        int best = -1;
        double best_score = 0.0;
        for (int si = 0; si < tube.slice_count(); ++si) {
            Vec2 mean{0, 0};
            std::int64_t n = tube.slices[si].count();
            if (n == 0) continue;
            tube.slices[si].for_each([&](FacetId f) { mean = mean + dom.facet_midpoint(f); });
            mean = mean / static_cast<double>(n);
            double score = dist(mean, centroid) + 1e-6 * static_cast<double>(n);
            if (best < 0 || score < best_score) {
                best = si;
                best_score = score;
            }
        }
        tube.slices[best].for_each([&](FacetId f) {
            if (!st.pair.K_extra.test(f)) st.k_on(f, nullptr);
        });
    }
}

RestartOutcome run_plateau_restart(const Domain& dom, const SpanningClass& cls,
                                   const AnnealParams& params, std::uint64_t seed) {
    Rng rng(seed);
    FilmState st(dom);
    SpanningGuard guard(dom, cls, SpanningMode::Bd);
    plateau_initial_cuts(dom, cls, st);
    if (!guard.all_spanning(st)) throw NoInitialSpanningError("initial tube cuts do not span");
    prune_k(st, guard);

    const double h = dom.spacing();
    const int stages = stage_count(params);
    const int prune_from = stages * 2 / 3;
    std::int64_t step = 0;
    RestartOutcome out;
    out.seed = seed;
    FilmPair best = st.pair;
    double best_cost = st.objective();

    std::vector<FilmState::Op> journal;
    std::vector<FacetId> risky(1);
    double T = params.t_initial;
    for (int stage = 0; stage < stages; ++stage, T *= params.cooling) {
        for (int mv = 0; mv < params.moves_per_temperature; ++mv, ++step) {
            if (step % params.trace_stride == 0)
                out.trace.push_back({step, T * h, st.objective(), 0});
            // Proposal: uniform facet, or a corner-neighbor of a random K facet.
            FacetId f;
            if (!st.k_list.empty() && rng.uniform() < 0.5) {
                FacetId base = st.k_list[rng.below(st.k_list.size())];
                auto [ca, cb] = dom.facet_corners(base);
                FacetId slots[4];
                int n = corner_facets(dom, rng.uniform() < 0.5 ? ca : cb, slots);
                f = slots[rng.below(static_cast<std::uint64_t>(n))];
            } else {
                f = static_cast<FacetId>(rng.below(dom.facet_count()));
            }
            if (!dom.facet_interior(f)) continue;
            journal.clear();
            double before = st.objective();
            if (st.pair.K_extra.test(f)) {
                st.k_off(f, &journal);
                double dE = st.objective() - before;
                if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h))) {
                    st.undo(journal);
                    continue;
                }
                risky[0] = f;
                if (!guard.still_spanning(st, {}, risky)) st.undo(journal);
            } else {
                st.k_on(f, &journal);
                double dE = st.objective() - before;
                if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h))) st.undo(journal);
            }
        }
        if (stage >= prune_from) prune_k(st, guard);
        if (st.objective() < best_cost) {
            best_cost = st.objective();
            best = st.pair;
        }
    }
    // Finish from the best state seen; final pruning gives single-facet
    // removal minimality.
    st.pair = best;
    st.snapshot_counts();
    prune_k(st, guard);
    out.trace.push_back({step, params.t_final * h, st.objective(), 0});
    out.pair = st.pair;
    out.energy = st.objective();
    return out;
}

// ------------------------------------------------------------------- bulk --

/// Highest-degree corner of the derived K (>= 3 incident facets), or -1.
int highest_degree_junction(const Domain& dom, const FacetSet& K) {
    std::vector<std::uint8_t> deg(dom.corner_count(), 0);
    K.for_each([&](FacetId f) {
        auto [a, b] = dom.facet_corners(f);
        ++deg[a];
        ++deg[b];
    });
    int best = -1, best_deg = 2;
    for (int c = 0; c < dom.corner_count(); ++c)
        if (deg[c] > best_deg) {
            best_deg = deg[c];
            best = c;
        }
    return best;
}

/// Places a ball of `target` cells greedily around a point (cells sorted by
/// distance, ties by id).
void place_ball(FilmState& st, Vec2 center, std::int64_t target) {
    const Domain& dom = st.dom;
    std::vector<std::pair<double, CellId>> order;
    order.reserve(dom.omega_cell_count());
    dom.omega_cells().for_each([&](CellId c) {
        Vec2 d = dom.cell_center(c) - center;
        order.push_back({dot(d, d), c});
    });
    std::sort(order.begin(), order.end());
    for (std::int64_t i = 0; i < target && i < static_cast<std::int64_t>(order.size()); ++i)
        st.cell_on(order[i].second, nullptr);
}

/// Deterministic greedy volume fix to hit the target cell count exactly.
void fix_volume_exact(FilmState& st, SpanningGuard& guard, std::int64_t target) {
    const Domain& dom = st.dom;
    std::vector<FilmState::Op> journal;
    auto count_added_boundary = [&](CellId c) {
        int d = 0;
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) { d += st.pair.E.test(nb) ? -1 : 1; });
        return d;
    };
    while (st.volume_cells() < target) {
        CellId bestc = -1;
        int best_d = 0;
        bool empty = st.e_list.empty();
        dom.omega_cells().for_each([&](CellId c) {
            if (st.pair.E.test(c)) return;
            if (!empty) {
                bool adj = false;
                dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) { adj |= st.pair.E.test(nb); });
                if (!adj) return;
            }
            int d = count_added_boundary(c);
            if (bestc < 0 || d < best_d) {
                bestc = c;
                best_d = d;
            }
        });
        if (bestc < 0) throw VolumeInfeasibleError("cannot reach target volume");
        st.cell_on(bestc, nullptr);
    }
    while (st.volume_cells() > target) {
        std::vector<std::pair<int, CellId>> candidates;
        for (CellId c : st.e_list) {
            bool boundary = false;
            dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) { boundary |= !st.pair.E.test(nb); });
            if (boundary) candidates.push_back({-count_added_boundary(c), c});
        }
        std::sort(candidates.begin(), candidates.end());
        bool done = false;
        for (auto [d, c] : candidates) {
            journal.clear();
            st.cell_off(c, &journal);
            if (guard.still_spanning(st, {c}, {})) {
                done = true;
                break;
            }
            st.undo(journal);
        }
        if (!done) throw VolumeInfeasibleError("cannot reach target volume under spanning");
    }
}

/// Final bulk polish: improving paired swaps in canonical order.
void improve_swaps(FilmState& st, SpanningGuard& guard, int max_passes) {
    const Domain& dom = st.dom;
    const double h = dom.spacing();
    std::vector<FilmState::Op> journal;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        std::vector<CellId> removals = st.e_list;
        std::sort(removals.begin(), removals.end());
        for (CellId crem : removals) {
            if (!st.pair.E.test(crem)) continue;
            bool boundary = false;
            dom.for_each_interior_neighbor(crem, [&](CellId nb, FacetId) { boundary |= !st.pair.E.test(nb); });
            if (!boundary) continue;
            // Candidate additions: non-E cells adjacent to E.
            std::vector<CellId> adds;
            for (CellId e : st.e_list)
                dom.for_each_interior_neighbor(e, [&](CellId nb, FacetId) {
                    if (!st.pair.E.test(nb)) adds.push_back(nb);
                });
            std::sort(adds.begin(), adds.end());
            adds.erase(std::unique(adds.begin(), adds.end()), adds.end());
            double e0 = st.objective();
            double best_dE = -1e-12 * h;
            CellId best_add = -1;
            for (CellId cadd : adds) {
                if (cadd == crem) continue;
                journal.clear();
                st.cell_off(crem, &journal);
                st.cell_on(cadd, &journal);
                double dE = st.objective() - e0;
                st.undo(journal);
                if (dE < best_dE) {
                    best_dE = dE;
                    best_add = cadd;
                }
            }
            if (best_add >= 0) {
                journal.clear();
                st.cell_off(crem, &journal);
                st.cell_on(best_add, &journal);
                if (guard.still_spanning(st, {crem}, {})) {
                    improved = true;
                } else {
                    st.undo(journal);
                }
            }
        }
        prune_k(st, guard);
        if (!improved) break;
    }
}

RestartOutcome run_bulk_restart(const Domain& dom, const SpanningClass& cls,
                                const FilmPair& init, std::int64_t target,
                                const AnnealParams& params, std::uint64_t seed) {
    Rng rng(seed);
    FilmState st(dom);
    st.pair = init;
    st.snapshot_counts();
    SpanningGuard guard(dom, cls, SpanningMode::Bulk);
    if (!guard.all_spanning(st)) throw NoInitialSpanningError("bulk initial state does not span");

    const double h = dom.spacing();
    const int stages = stage_count(params);
    const int exact_from = params.exact_swap ? stages * 2 / 3 : stages;
    std::int64_t step = 0;
    RestartOutcome out;
    out.seed = seed;
    FilmPair best = st.pair;
    double best_cost = 1e300;
    bool exact_phase = false;

    std::vector<FilmState::Op> journal;
    auto penalty = [&](double w, std::int64_t vol) {
        return w * h * static_cast<double>(std::llabs(vol - target));
    };

    double T = params.t_initial;
    for (int stage = 0; stage < stages; ++stage, T *= params.cooling) {
        double progress = stages > 1 ? static_cast<double>(stage) / (stages - 1) : 1.0;
        double w = params.volume_penalty_initial +
                   (params.volume_penalty_final - params.volume_penalty_initial) * progress;
        if (!exact_phase && stage >= exact_from) {
            fix_volume_exact(st, guard, target);
            exact_phase = true;
        }
        for (int mv = 0; mv < params.moves_per_temperature; ++mv, ++step) {
            if (step % params.trace_stride == 0)
                out.trace.push_back({step, T * h, st.objective(), st.volume_cells() - target});
            double r = rng.uniform();
            journal.clear();
            if (r < 0.45) {
                // K_extra toggle (multiplicity-2 facets live in E^(0)).
                FacetId f;
                if (!st.k_list.empty() && rng.uniform() < 0.5) {
                    FacetId base = st.k_list[rng.below(st.k_list.size())];
                    auto [ca, cb] = dom.facet_corners(base);
                    FacetId slots[4];
                    int n = corner_facets(dom, rng.uniform() < 0.5 ? ca : cb, slots);
                    f = slots[rng.below(static_cast<std::uint64_t>(n))];
                } else {
                    f = static_cast<FacetId>(rng.below(dom.facet_count()));
                }
                if (!dom.facet_interior(f)) continue;
                journal.clear();
                double before = st.objective();
                if (st.pair.K_extra.test(f)) {
                    st.k_off(f, &journal);
                    double dE = st.objective() - before;
                    if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h))) {
                        st.undo(journal);
                        continue;
                    }
                    if (!guard.still_spanning(st, {}, {f})) st.undo(journal);
                } else {
                    auto [a, b] = dom.facet_cells(f);
                    if (st.pair.E.test(a) || st.pair.E.test(b)) continue;
                    st.k_on(f, &journal);
                    double dE = st.objective() - before;
                    if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h))) st.undo(journal);
                }
            } else if (!exact_phase && r < 0.85) {
                // Soft phase: single-cell toggle on the E boundary.
                bool add = rng.uniform() < 0.5;
                CellId c = -1;
                if (st.e_list.empty()) {
                    if (!add) continue;
                    c = static_cast<CellId>(rng.below(dom.cell_count()));
                    if (dom.is_wire(c)) continue;
                } else {
                    CellId base = st.e_list[rng.below(st.e_list.size())];
                    if (add) {
                        FacetId slots[4];
                        CellId nbs[4];
                        int n = 0;
                        dom.for_each_interior_neighbor(base, [&](CellId nb, FacetId f2) {
                            nbs[n] = nb;
                            slots[n] = f2;
                            ++n;
                        });
                        if (n == 0) continue;
                        c = nbs[rng.below(static_cast<std::uint64_t>(n))];
                        if (st.pair.E.test(c)) continue;
                    } else {
                        c = base;
                    }
                }
                double before = st.objective() + penalty(w, st.volume_cells());
                if (add)
                    st.cell_on(c, &journal);
                else
                    st.cell_off(c, &journal);
                double dE = st.objective() + penalty(w, st.volume_cells()) - before;
                if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h))) {
                    st.undo(journal);
                    continue;
                }
                if (!add && !guard.still_spanning(st, {c}, {})) st.undo(journal);
            } else if (exact_phase && !st.e_list.empty()) {
                // Exact paired swap: remove one boundary cell, add another.
                CellId crem = st.e_list[rng.below(st.e_list.size())];
                bool boundary = false;
                dom.for_each_interior_neighbor(crem, [&](CellId nb, FacetId) { boundary |= !st.pair.E.test(nb); });
                if (!boundary) continue;
                CellId base = st.e_list[rng.below(st.e_list.size())];
                CellId nbs[4];
                int n = 0;
                dom.for_each_interior_neighbor(base, [&](CellId nb, FacetId) {
                    if (!st.pair.E.test(nb)) nbs[n++] = nb;
                });
                if (n == 0) continue;
                CellId cadd = nbs[rng.below(static_cast<std::uint64_t>(n))];
                if (cadd == crem) continue;
                double before = st.objective();
                st.cell_off(crem, &journal);
                st.cell_on(cadd, &journal);
                double dE = st.objective() - before;
                if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h))) {
                    st.undo(journal);
                    continue;
                }
                if (!guard.still_spanning(st, {crem}, {})) st.undo(journal);
            }
        }
        if (stage >= exact_from) prune_k(st, guard);
        if (exact_phase && st.volume_cells() == target && st.objective() < best_cost) {
            best_cost = st.objective();
            best = st.pair;
        }
    }
    st.pair = best;
    st.snapshot_counts();
    fix_volume_exact(st, guard, target);
    prune_k(st, guard);
    improve_swaps(st, guard, 40);
    out.trace.push_back({step, params.t_final * h, st.objective(), st.volume_cells() - target});
    out.pair = st.pair;
    out.energy = st.objective();
    return out;
}

}  // namespace

double anisotropic_cost(const FilmPair& pair) {
    const Domain& dom = pair.domain();
    auto mult = [&](FacetId f) -> int {
        auto [a, b] = dom.facet_cells(f);
        if (pair.E.test(a) != pair.E.test(b)) return 1;
        return pair.K_extra.test(f) ? 2 : 0;
    };
    double sum = 0.0;
    for (FacetId f = 0; f < dom.facet_count(); ++f) {
        if (!dom.facet_interior(f)) continue;
        int m = mult(f);
        if (m == 0) continue;
        sum += m * pattern_weight(dom, f, [&](FacetId g) { return mult(g) != 0; });
    }
    return dom.spacing() * sum;
}

MinimizeResult minimize_plateau(const Domain& dom, const SpanningClass& cls,
                                const AnnealParams& params) {
    std::vector<RestartOutcome> outcomes(std::max(1, params.restarts));
    parallel_restarts(static_cast<int>(outcomes.size()), [&](int r) {
        outcomes[r] = run_plateau_restart(dom, cls, params, params.seed + static_cast<std::uint64_t>(r));
    });
    int win = 0;
    for (int r = 1; r < static_cast<int>(outcomes.size()); ++r)
        if (outcomes[r].energy < outcomes[win].energy) win = r;

    MinimizeResult res;
    res.pair = outcomes[win].pair;
    res.trace = std::move(outcomes[win].trace);
    res.seed = outcomes[win].seed;
    res.energy = energy_bk(res.pair);
    res.certificate = is_spanning(res.pair, cls, SpanningMode::Bd);
    res.volume_error_cells = res.pair.E.count();
    return res;
}

MinimizeResult minimize_bulk(const Domain& dom, const SpanningClass& cls, double volume,
                             const AnnealParams& params) {
    const double h = dom.spacing();
    if (volume < 0) throw VolumeInfeasibleError("negative volume");
    std::int64_t target = static_cast<std::int64_t>(std::llround(volume / (h * h)));
    if (target > dom.omega_cell_count())
        throw VolumeInfeasibleError("volume exceeds the area of omega");

    if (target == 0) {
        MinimizeResult res = minimize_plateau(dom, cls, params);
        res.certificate = is_spanning(res.pair, cls, SpanningMode::Bulk);
        return res;
    }

    MinimizeResult plateau = minimize_plateau(dom, cls, params);

    // Initialization: Plateau solution plus a ball at the highest-degree
    // junction of K (or, with no junction, as far from K and wire as it gets).
    FilmState init(dom);
    init.pair = plateau.pair;
    init.snapshot_counts();
    FacetSet K = init.pair.derived_K();
    int junction = highest_degree_junction(dom, K);
    Vec2 center;
    if (junction >= 0) {
        center = dom.corner_point(junction);
    } else {
        double best_d = -1.0;
        CellId best_c = 0;
        dom.omega_cells().for_each([&](CellId c) {
            Vec2 p = dom.cell_center(c);
            double d = 1e300;
            K.for_each([&](FacetId f) { d = std::min(d, dist(p, dom.facet_midpoint(f))); });
            dom.wire_cells().for_each([&](CellId wc) { d = std::min(d, dist(p, dom.cell_center(wc))); });
            if (d > best_d) {
                best_d = d;
                best_c = c;
            }
        });
        center = dom.cell_center(best_c);
    }
    place_ball(init, center, target);
    {
        SpanningGuard check(dom, cls, SpanningMode::Bulk);
        if (!check.all_spanning(init)) throw NoInitialSpanningError("ball placement broke spanning");
    }

    std::vector<RestartOutcome> outcomes(std::max(1, params.restarts));
    parallel_restarts(static_cast<int>(outcomes.size()), [&](int r) {
        outcomes[r] = run_bulk_restart(dom, cls, init.pair, target, params,
                                       params.seed + 7919 + static_cast<std::uint64_t>(r));
    });
    int win = 0;
    for (int r = 1; r < static_cast<int>(outcomes.size()); ++r)
        if (outcomes[r].energy < outcomes[win].energy) win = r;

    MinimizeResult res;
    res.pair = outcomes[win].pair;
    res.trace = std::move(outcomes[win].trace);
    res.seed = outcomes[win].seed;
    res.energy = energy_bk(res.pair);
    res.certificate = is_spanning(res.pair, cls, SpanningMode::Bulk);
    res.volume_error_cells = res.pair.E.count() - target;
    return res;
}

// ------------------------------------------------------------------- foam --

namespace {

struct FoamState {
    const Domain& dom;
    std::vector<std::int32_t> label;  ///< 0 = liquid, 1..N = chambers; -1 = wire
    std::vector<CellId> omega_list;

    explicit FoamState(const Domain& d) : dom(d), label(d.cell_count(), -1) {
        dom.omega_cells().for_each([&](CellId c) { omega_list.push_back(c); });
    }

    /// Multiplicity: 0 same label, 1 against liquid, 2 between chambers.
    int facet_mult(FacetId f) const {
        auto [a, b] = dom.facet_cells(f);
        std::int32_t la = label[a], lb = label[b];
        if (la == lb) return 0;
        return (la == 0 || lb == 0) ? 1 : 2;
    }

    double weighted_term(FacetId f) const {
        int mult = facet_mult(f);
        if (mult == 0) return 0.0;
        return mult * pattern_weight(dom, f, [&](FacetId g) { return facet_mult(g) != 0; });
    }

    /// Anisotropy-corrected total (the annealing objective).
    double total_objective() const {
        double sum = 0.0;
        for (FacetId f = 0; f < dom.facet_count(); ++f)
            if (dom.facet_interior(f)) sum += weighted_term(f);
        return sum * dom.spacing();
    }

    /// Objective restricted to facets whose pattern can change when the
    /// given cells swap labels: their incident facets plus corner neighbors.
    double local_objective(const std::vector<CellId>& cells, std::vector<FacetId>& scratch) const {
        scratch.clear();
        for (CellId c : cells)
            dom.for_each_incident_facet(c, [&](FacetId f) {
                if (!dom.facet_interior(f)) return;
                scratch.push_back(f);
                auto [ca, cb] = dom.facet_corners(f);
                for (int corner : {ca, cb}) {
                    FacetId others[4];
                    int n = facets_at_corner(dom, corner, others);
                    for (int k = 0; k < n; ++k)
                        if (dom.facet_interior(others[k])) scratch.push_back(others[k]);
                }
            });
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        double sum = 0.0;
        for (FacetId f : scratch) sum += weighted_term(f);
        return sum * dom.spacing();
    }
};

}  // namespace

MinimizeResult foam_relax(const Domain& dom, const std::vector<CellSet>& initial_chambers,
                          double liquid_fraction, double lambda0, double r0,
                          const AnnealParams& params) {
    (void)lambda0;  // recorded by the caller; the minimality check is external
    (void)r0;
    const double h = dom.spacing();
    std::int64_t chamber_total = 0;
    for (const auto& ch : initial_chambers) chamber_total += ch.count();
    std::int64_t liquid_cells = dom.omega_cell_count() - chamber_total;
    if (liquid_cells < 0 ||
        std::fabs(liquid_cells * h * h - liquid_fraction) > 0.5 * h * h + 1e-12)
        throw VolumeInfeasibleError("chamber volumes plus liquid fraction must fill omega");

    FoamState base(dom);
    for (std::size_t i = 0; i < initial_chambers.size(); ++i) {
        initial_chambers[i].for_each([&](CellId c) {
            if (base.label[c] != -1 && base.label[c] != 0)
                throw BadSceneError("overlapping chambers");
            base.label[c] = static_cast<std::int32_t>(i + 1);
        });
    }
    for (CellId c : base.omega_list)
        if (base.label[c] == -1) base.label[c] = 0;

    const int stages = stage_count(params);
    struct FoamOutcome {
        std::vector<std::int32_t> label;
        double energy = 0.0;
        std::vector<TraceRow> trace;
        std::uint64_t seed = 0;
    };
    std::vector<FoamOutcome> outcomes(std::max(1, params.restarts));

    parallel_restarts(static_cast<int>(outcomes.size()), [&](int r) {
        Rng rng(params.seed + 104729 + static_cast<std::uint64_t>(r));
        FoamState st = base;
        double energy = st.total_objective();
        FoamOutcome out;
        out.seed = params.seed + 104729 + static_cast<std::uint64_t>(r);
        std::int64_t step = 0;
        double T = params.t_initial;
        std::vector<CellId> pairc(2);
        std::vector<FacetId> scratch;
        std::vector<std::int32_t> best_label = st.label;
        double best_energy = energy;
        for (int stage = 0; stage < stages; ++stage, T *= params.cooling) {
            for (int mv = 0; mv < params.moves_per_temperature; ++mv, ++step) {
                if (step % params.trace_stride == 0) out.trace.push_back({step, T * h, energy, 0});
                CellId c1 = st.omega_list[rng.below(st.omega_list.size())];
                CellId c2 = -1;
                if (rng.uniform() < 0.8) {
                    CellId nbs[4];
                    int n = 0;
                    dom.for_each_interior_neighbor(c1, [&](CellId nb, FacetId) { nbs[n++] = nb; });
                    if (n == 0) continue;
                    c2 = nbs[rng.below(static_cast<std::uint64_t>(n))];
                } else {
                    c2 = st.omega_list[rng.below(st.omega_list.size())];
                }
                if (c2 < 0 || st.label[c1] == st.label[c2]) continue;
                pairc[0] = c1;
                pairc[1] = c2;
                double before = st.local_objective(pairc, scratch);
                std::swap(st.label[c1], st.label[c2]);
                double dE = st.local_objective(pairc, scratch) - before;
                if (dE > 0 && rng.uniform() >= std::exp(-dE / (T * h)))
                    std::swap(st.label[c1], st.label[c2]);
                else
                    energy += dE;
            }
            energy = st.total_objective();  // resync accumulated drift
            if (energy < best_energy) {
                best_energy = energy;
                best_label = st.label;
            }
        }
        st.label = best_label;
        energy = best_energy;
        // Zero-temperature local sweeps to a fixpoint.
        bool improved = true;
        int passes = 0;
        while (improved && passes++ < 64) {
            improved = false;
            for (CellId c1 : st.omega_list) {
                dom.for_each_interior_neighbor(c1, [&](CellId c2, FacetId) {
                    if (st.label[c1] == st.label[c2]) return;
                    pairc[0] = c1;
                    pairc[1] = c2;
                    double before = st.local_objective(pairc, scratch);
                    std::swap(st.label[c1], st.label[c2]);
                    double dE = st.local_objective(pairc, scratch) - before;
                    if (dE < -1e-12) {
                        energy += dE;
                        improved = true;
                    } else {
                        std::swap(st.label[c1], st.label[c2]);
                    }
                });
            }
        }
        out.label = st.label;
        out.energy = st.total_objective();
        out.trace.push_back({step, params.t_final * h, out.energy, 0});
        outcomes[r] = std::move(out);
    });

    int win = 0;
    for (int r = 1; r < static_cast<int>(outcomes.size()); ++r)
        if (outcomes[r].energy < outcomes[win].energy) win = r;

    MinimizeResult res;
    res.pair = FilmPair(dom);
    for (CellId c : base.omega_list)
        if (outcomes[win].label[c] == 0) res.pair.E.set(c);
    for (CellId c : base.omega_list) {
        std::int32_t lc = outcomes[win].label[c];
        if (lc == 0) continue;
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (nb > c && outcomes[win].label[nb] != 0 && outcomes[win].label[nb] != lc)
                res.pair.K_extra.set(f);
        });
    }
    res.chamber_label = std::move(outcomes[win].label);
    res.trace = std::move(outcomes[win].trace);
    res.seed = outcomes[win].seed;
    res.energy = energy_bk(res.pair);
    res.certificate.spanning = true;  // no spanning constraint in the foam model
    res.volume_error_cells = 0;
    return res;
}

}  // namespace soapfilm
