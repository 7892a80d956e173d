#include "soapfilm/spanning.hpp"

#include <algorithm>
#include <limits>

namespace soapfilm {

SpanningClass build_spanning_class(const Domain& dom, std::vector<SpanningGenerator> generators) {
    SpanningClass cls;
    cls.generators = std::move(generators);
    cls.tubes.reserve(cls.generators.size());
    for (const auto& g : cls.generators) cls.tubes.push_back(build_tube(dom, g.loop, g.tube_radius));
    return cls;
}

namespace {

constexpr std::int32_t kUnseen = std::numeric_limits<std::int32_t>::min();

/// Potential BFS over the body graph with edges filtered by `blocked` and
/// cells filtered by `skip`. Returns true iff no winding inconsistency; on
/// inconsistency optionally reconstructs the witness cycle.
template <class FacetBlocked, class CellSkipped>
bool winding_consistent(const Tube& tube, FacetBlocked&& blocked, CellSkipped&& skip,
                        std::vector<CellId>* witness) {
    const std::int32_t n = static_cast<std::int32_t>(tube.body_cells.size());
    std::vector<std::int32_t> pot(n, kUnseen);
    std::vector<std::int32_t> parent(witness ? n : 0, -1);
    std::vector<std::int32_t> order;
    order.reserve(64);
    for (std::int32_t s = 0; s < n; ++s) {
        if (pot[s] != kUnseen || skip(tube.body_cells[s])) continue;
        pot[s] = 0;
        order.assign(1, s);
        if (witness) parent[s] = -1;
        for (std::size_t qi = 0; qi < order.size(); ++qi) {
            std::int32_t u = order[qi];
            for (std::int32_t k = tube.adj_start[u]; k < tube.adj_start[u + 1]; ++k) {
                const auto& arc = tube.adj[k];
                if (skip(tube.body_cells[arc.to]) || blocked(arc.facet)) continue;
                std::int32_t want = pot[u] + arc.wind;
                if (pot[arc.to] == kUnseen) {
                    pot[arc.to] = want;
                    if (witness) parent[arc.to] = u;
                    order.push_back(arc.to);
                } else if (pot[arc.to] != want) {
                    if (witness) {
                        // Cycle: tree path root..u, then the arc, then the
                        // reverse tree path arc.to..root.
                        std::vector<std::int32_t> up;
                        for (std::int32_t x = u; x != -1; x = parent[x]) up.push_back(x);
                        std::reverse(up.begin(), up.end());
                        witness->clear();
                        for (std::int32_t x : up) witness->push_back(tube.body_cells[x]);
                        for (std::int32_t x = arc.to; x != -1; x = parent[x])
                            witness->push_back(tube.body_cells[x]);
                    }
                    return false;
                }
            }
        }
    }
    return true;
}

/// Component labels of the body graph with blocked facets removed. E cells
/// are kept: with K ⊇ ∂*E every component is automatically E-pure.
void body_partition_labels(const Tube& tube, const FacetSet& K, const FacetSet& slice,
                           std::vector<std::int32_t>& label) {
    const std::int32_t n = static_cast<std::int32_t>(tube.body_cells.size());
    label.assign(n, -1);
    std::vector<std::int32_t> stack;
    std::int32_t next = 0;
    for (std::int32_t s = 0; s < n; ++s) {
        if (label[s] != -1) continue;
        std::int32_t id = next++;
        label[s] = id;
        stack.assign(1, s);
        while (!stack.empty()) {
            std::int32_t u = stack.back();
            stack.pop_back();
            for (std::int32_t k = tube.adj_start[u]; k < tube.adj_start[u + 1]; ++k) {
                const auto& arc = tube.adj[k];
                if (label[arc.to] != -1) continue;
                if (K.test(arc.facet) || slice.test(arc.facet)) continue;
                label[arc.to] = id;
                stack.push_back(arc.to);
            }
        }
    }
}

enum class SliceCheckKind { Bd, Bulk };

bool slice_check(const FacetSet& K, const CellSet* E, const Tube& tube, SliceCheckKind kind,
                 SliceFailure* failure) {
    const Domain& dom = tube.body.domain();
    std::vector<std::int32_t> label;
    for (int si = 0; si < tube.slice_count(); ++si) {
        const FacetSet& slice = tube.slices[si];
        body_partition_labels(tube, K, slice, label);
        bool ok = true;
        FacetId bad = -1;
        slice.for_each([&](FacetId f) {
            if (!ok) return;
            if (K.test(f)) return;  // exceptional: slice facet covered by K itself
            auto [a, b] = dom.facet_cells(f);
            if (kind == SliceCheckKind::Bulk) {
                // Only the E^(0) part of the slice must be cut.
                if (E->test(a) || E->test(b)) return;
            }
            if (label[tube.local_index[a]] == label[tube.local_index[b]]) {
                ok = false;
                bad = f;
            }
        });
        if (!ok) {
            if (failure) {
                failure->slice_index = si;
                failure->facet = bad;
            }
            return false;
        }
    }
    return true;
}

}  // namespace

bool is_spanning_bd(const FacetSet& K, const Tube& tube, SliceFailure* failure) {
    return slice_check(K, nullptr, tube, SliceCheckKind::Bd, failure);
}

bool is_spanning_bulk(const FacetSet& K, const CellSet& E, const Tube& tube,
                      SliceFailure* failure) {
    return slice_check(K, &E, tube, SliceCheckKind::Bulk, failure);
}

WindingWitness winding_oracle(const FacetSet& K, const CellSet* E, const Tube& tube) {
    WindingWitness w;
    auto blocked = [&](FacetId f) { return K.test(f); };
    auto skip = [&](CellId c) { return E && E->test(c); };
    w.spanning = winding_consistent(tube, blocked, skip, &w.loop);
    if (w.spanning) w.loop.clear();
    return w;
}

SpanningCertificate is_spanning(const FilmPair& pair, const SpanningClass& cls,
                                SpanningMode mode) {
    SpanningCertificate cert;
    cert.mode = mode;
    cert.spanning = true;
    FacetSet K = pair.derived_K();
    for (std::size_t i = 0; i < cls.tubes.size(); ++i) {
        const Tube& tube = cls.tubes[i];
        TubeVerdict verdict;
        verdict.generator_id = i < cls.generators.size() ? cls.generators[i].id : "";
        SliceFailure fail;
        if (mode == SpanningMode::Bd)
            verdict.spanning = is_spanning_bd(K, tube, &fail);
        else
            verdict.spanning = is_spanning_bulk(K, pair.E, tube, &fail);
        if (!verdict.spanning) {
            verdict.failing_slice = fail.slice_index;
            verdict.failing_facet = fail.facet;
            WindingWitness w =
                winding_oracle(K, mode == SpanningMode::Bulk ? &pair.E : nullptr, tube);
            if (!w.spanning) verdict.witness_loop = std::move(w.loop);
            cert.spanning = false;
        }
        cert.tubes.push_back(std::move(verdict));
    }
    return cert;
}

bool tube_spanning_fast(const FilmPair& pair, const Tube& tube, SpanningMode mode) {
    const Domain& dom = pair.domain();
    auto blocked = [&](FacetId f) {
        if (pair.K_extra.test(f)) return true;
        auto [a, b] = dom.facet_cells(f);
        return pair.E.test(a) != pair.E.test(b);
    };
    auto skip = [&](CellId c) { return mode == SpanningMode::Bulk && pair.E.test(c); };
    return winding_consistent(tube, blocked, skip, nullptr);
}

TubeOracle::TubeOracle(const Tube& tube) : tube_(&tube) {
    pot_.resize(tube.body_cells.size());
    order_.reserve(tube.body_cells.size());
}

bool TubeOracle::check(const FilmPair& pair, SpanningMode mode) {
    const Tube& tube = *tube_;
    const Domain& dom = pair.domain();
    const bool bulk = mode == SpanningMode::Bulk;
    const std::int32_t n = static_cast<std::int32_t>(tube.body_cells.size());
    std::fill(pot_.begin(), pot_.end(), kUnseen);
    for (std::int32_t s = 0; s < n; ++s) {
        if (pot_[s] != kUnseen) continue;
        if (bulk && pair.E.test(tube.body_cells[s])) continue;
        pot_[s] = 0;
        order_.assign(1, s);
        for (std::size_t qi = 0; qi < order_.size(); ++qi) {
            std::int32_t u = order_[qi];
            for (std::int32_t k = tube.adj_start[u]; k < tube.adj_start[u + 1]; ++k) {
                const auto& arc = tube.adj[k];
                CellId to_cell = tube.body_cells[arc.to];
                if (bulk && pair.E.test(to_cell)) continue;
                if (pair.K_extra.test(arc.facet)) continue;
                auto [a, b] = dom.facet_cells(arc.facet);
                if (pair.E.test(a) != pair.E.test(b)) continue;  // ∂*E blocks
                std::int32_t want = pot_[u] + arc.wind;
                if (pot_[arc.to] == kUnseen) {
                    pot_[arc.to] = want;
                    order_.push_back(arc.to);
                } else if (pot_[arc.to] != want) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace soapfilm
