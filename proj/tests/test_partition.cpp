#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "soapfilm/partition.hpp"

using namespace soapfilm;

namespace {

Domain empty_box(int n, double h = 1.0) {
    return Domain(n, n, h, [](Vec2) { return false; });
}

struct TestRng {
    std::uint64_t s;
    explicit TestRng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

FacetSet random_facets(const Domain& dom, TestRng& rng, double p) {
    FacetSet out(dom);
    for (FacetId f = 0; f < dom.facet_count(); ++f)
        if (dom.facet_interior(f) && (rng.next() >> 40) < p * (1ULL << 24)) out.set(f);
    return out;
}

CellSet random_cells(const Domain& dom, TestRng& rng, double p) {
    CellSet out(dom);
    dom.omega_cells().for_each([&](CellId c) {
        if ((rng.next() >> 40) < p * (1ULL << 24)) out.set(c);
    });
    return out;
}

/// Independent component oracle: plain flood fill over an explicit adjacency
/// list (no shared code with essential_partition).
int oracle_component_count(const Domain& dom, const FacetSet& S, const CellSet& U) {
    std::map<CellId, int> comp;
    int n = 0;
    U.for_each([&](CellId c) {
        if (comp.count(c)) return;
        std::vector<CellId> stack{c};
        comp[c] = n;
        while (!stack.empty()) {
            CellId u = stack.back();
            stack.pop_back();
            int x = dom.cell_x(u), y = dom.cell_y(u);
            const int dx[4] = {1, -1, 0, 0};
            const int dy[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || ny < 0 || nx >= dom.width() || ny >= dom.height()) continue;
                CellId v = dom.cell_id(nx, ny);
                if (!U.test(v) || comp.count(v)) continue;
                FacetId f = dom.facet_between(u, v);
                if (!dom.facet_interior(f) || S.test(f)) continue;
                comp[v] = n;
                stack.push_back(v);
            }
        }
        ++n;
    });
    return n;
}

}  // namespace

TEST_CASE("S empty, connected U: one component") {
    Domain dom = empty_box(4);
    FacetSet S(dom);
    Partition part = essential_partition(S, dom.omega_cells());
    CHECK(part.component_count == 1);
    CHECK(part.component_cells[0] == 16);
    CHECK_FALSE(essentially_disconnects(S, dom.omega_cells()).disconnected);
}

TEST_CASE("2x2 block split by both vertical facets") {
    Domain dom = empty_box(2);
    FacetSet S(dom);
    S.set(dom.vertical_facet(0, 0));
    S.set(dom.vertical_facet(0, 1));
    Partition part = essential_partition(S, dom.omega_cells());
    CHECK(part.component_count == 2);  // two single-column components
    CHECK(part.component_cells[0] == 2);
    CHECK(part.component_cells[1] == 2);
    // Canonical labels: component 0 contains cell 0.
    CHECK(part.label_of(dom.cell_id(0, 0)) == 0);
    CHECK(part.label_of(dom.cell_id(1, 0)) == 1);

    auto witness = essentially_disconnects(S, dom.omega_cells());
    CHECK(witness.disconnected);
    CHECK(witness.part1.count() == 2);
    CHECK(witness.part2.count() == 2);
    // The witness interface lies inside S.
    witness.part1.for_each([&](CellId a) {
        dom.for_each_interior_neighbor(a, [&](CellId b, FacetId f) {
            if (witness.part2.test(b)) CHECK(S.test(f));
        });
    });

    FacetSet u = ubep(S, dom.omega_cells());
    CHECK(u.count() == 2);  // exactly the two cutting facets
    CHECK(u.test(dom.vertical_facet(0, 0)));
    CHECK(u.test(dom.vertical_facet(0, 1)));
}

TEST_CASE("4x4 cut with a gap reconnects") {
    Domain dom = empty_box(4);
    FacetSet S(dom);
    // Middle-column vertical facets with one omitted.
    S.set(dom.vertical_facet(1, 0));
    S.set(dom.vertical_facet(1, 1));
    S.set(dom.vertical_facet(1, 3));
    Partition part = essential_partition(S, dom.omega_cells());
    CHECK(part.component_count == 1);
    CHECK(part.component_count == oracle_component_count(dom, S, dom.omega_cells()));
    CHECK_FALSE(essentially_disconnects(S, dom.omega_cells()).disconnected);
}

TEST_CASE("facets forming no cut do not disconnect") {
    Domain dom = empty_box(4);
    FacetSet S(dom);
    S.set(dom.horizontal_facet(1, 1));
    S.set(dom.vertical_facet(1, 2));
    CHECK_FALSE(essentially_disconnects(S, dom.omega_cells()).disconnected);
    CHECK(oracle_component_count(dom, S, dom.omega_cells()) == 1);
}

TEST_CASE("ubep drops dangling facets") {
    Domain dom = empty_box(4);
    FacetSet S(dom);
    for (int y = 0; y < 4; ++y) S.set(dom.vertical_facet(1, y));  // full cut
    S.set(dom.horizontal_facet(0, 1));                            // dangling extra
    FacetSet u = ubep(S, dom.omega_cells());
    CHECK(u.count() == 4);
    CHECK_FALSE(u.test(dom.horizontal_facet(0, 1)));
    CHECK(u.is_subset_of(S));
}

TEST_CASE("ubep of empty S is empty") {
    Domain dom = empty_box(3);
    FacetSet S(dom);
    CHECK(ubep(S, dom.omega_cells()).count() == 0);
}

TEST_CASE("perimeter bound and Caccioppoli identity, exact") {
    Domain dom = empty_box(8, 0.125);
    TestRng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        FacetSet S = random_facets(dom, rng, 0.3);
        CellSet U = random_cells(dom, rng, 0.7);
        Partition part = essential_partition(S, U);
        FacetSet u = ubep(part);
        // sum_i P(U_i; interior of U) = 2 h |ubep| <= 2 h |S ∩ interior facets of U|
        double lhs = partition_interior_perimeter(part);
        CHECK(lhs == doctest::Approx(2.0 * u.measure()));
        std::int64_t s_interior = 0;
        S.for_each([&](FacetId f) {
            auto [a, b] = dom.facet_cells(f);
            if (U.test(a) && U.test(b)) ++s_interior;
        });
        CHECK(u.count() <= s_interior);
        CHECK(u.is_subset_of(S));
        // Every ubep facet touches exactly two components.
        u.for_each([&](FacetId f) {
            auto [a, b] = dom.facet_cells(f);
            CHECK(part.label_of(a) != part.label_of(b));
            CHECK(part.label_of(a) >= 0);
            CHECK(part.label_of(b) >= 0);
        });
    }
}

TEST_CASE("monotonicity: ubep of a subset is contained after refinement") {
    Domain dom = empty_box(8);
    TestRng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        FacetSet S = random_facets(dom, rng, 0.35);
        CellSet U = random_cells(dom, rng, 0.8);
        // S* random subset of S
        FacetSet Sstar(dom);
        S.for_each([&](FacetId f) {
            if (rng.next() & 1) Sstar.set(f);
        });
        FacetSet u_star = ubep(Sstar, U);
        FacetSet u = ubep(S, U);
        CHECK(u_star.is_subset_of(u));
    }
}

TEST_CASE("idempotence: partition induced by ubep equals the original") {
    Domain dom = empty_box(8);
    TestRng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        FacetSet S = random_facets(dom, rng, 0.4);
        CellSet U = random_cells(dom, rng, 0.75);
        Partition p1 = essential_partition(S, U);
        FacetSet u = ubep(p1);
        Partition p2 = essential_partition(u, U);
        CHECK(p1.component_count == p2.component_count);
        U.for_each([&](CellId c) { CHECK(p1.label_of(c) == p2.label_of(c)); });
    }
}

TEST_CASE("component count matches the flood-fill oracle") {
    Domain dom = empty_box(6);
    TestRng rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        FacetSet S = random_facets(dom, rng, 0.45);
        CellSet U = random_cells(dom, rng, 0.8);
        Partition part = essential_partition(S, U);
        CHECK(part.component_count == oracle_component_count(dom, S, U));
    }
}

TEST_CASE("empty U yields empty partition") {
    Domain dom = empty_box(3);
    FacetSet S(dom);
    CellSet U(dom);
    Partition part = essential_partition(S, U);
    CHECK(part.component_count == 0);
}

TEST_CASE("ESP: isolated facet pruned, full cut kept") {
    Domain dom = empty_box(8);
    std::vector<CellSet> covering = dyadic_covering(dom);

    FacetSet isolated(dom);
    isolated.set(dom.vertical_facet(3, 3));
    CHECK(essential_spanning_part(isolated, covering).count() == 0);

    FacetSet cut(dom);
    for (int y = 0; y < 8; ++y) cut.set(dom.vertical_facet(3, y));
    FacetSet esp = essential_spanning_part(cut, covering);
    CHECK(esp == cut);

    FacetSet none(dom);
    CHECK(essential_spanning_part(none, covering).count() == 0);
}

TEST_CASE("ESP is always contained in S") {
    Domain dom = empty_box(8);
    std::vector<CellSet> covering = dyadic_covering(dom);
    TestRng rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        FacetSet S = random_facets(dom, rng, 0.3);
        FacetSet esp = essential_spanning_part(S, covering);
        CHECK(esp.is_subset_of(S));
    }
}

TEST_CASE("partition labels are canonical by smallest cell index") {
    Domain dom = empty_box(4);
    FacetSet S(dom);
    for (int y = 0; y < 4; ++y) {
        S.set(dom.vertical_facet(0, y));
        S.set(dom.vertical_facet(2, y));
    }
    Partition part = essential_partition(S, dom.omega_cells());
    REQUIRE(part.component_count == 3);
    // Component ids ordered by first cell id: column 0 -> 0, columns 1-2 -> 1, column 3 -> 2.
    CHECK(part.label_of(dom.cell_id(0, 0)) == 0);
    CHECK(part.label_of(dom.cell_id(1, 0)) == 1);
    CHECK(part.label_of(dom.cell_id(3, 0)) == 2);
}
