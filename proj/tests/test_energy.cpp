#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "soapfilm/film.hpp"
#include "soapfilm/partition.hpp"

using namespace soapfilm;

namespace {

Domain empty_box(int n, double h = 0.125) {
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

FilmPair random_pair(const Domain& dom, TestRng& rng, double pe, double pk) {
    FilmPair pair(dom);
    dom.omega_cells().for_each([&](CellId c) {
        if ((rng.next() >> 40) < pe * (1ULL << 24)) pair.E.set(c);
    });
    for (FacetId f = 0; f < dom.facet_count(); ++f)
        if (dom.facet_interior(f) && (rng.next() >> 40) < pk * (1ULL << 24)) pair.K_extra.set(f);
    return pair;
}

}  // namespace

TEST_CASE("empty pair has zero energy") {
    Domain dom = empty_box(4);
    FilmPair pair(dom);
    CHECK(energy_bk(pair).total == 0.0);
    CHECK(energy_bd(pair).total == 0.0);
}

TEST_CASE("single cell droplet with K = its boundary") {
    Domain dom = empty_box(4);
    FilmPair pair(dom);
    pair.E.set(dom.cell_id(1, 1));
    EnergyReport rep = energy_bk(pair);
    CHECK(rep.total == doctest::Approx(4 * dom.spacing()));
    CHECK(rep.collapsed_term == 0.0);
    CHECK(rep.perimeter_term == doctest::Approx(4 * dom.spacing()));
}

TEST_CASE("straight cut of length L costs 2L") {
    Domain dom = empty_box(8);
    FilmPair pair(dom);
    for (int y = 0; y < 8; ++y) pair.K_extra.set(dom.vertical_facet(3, y));
    double L = 8 * dom.spacing();
    EnergyReport rep = energy_bk(pair);
    CHECK(rep.total == doctest::Approx(2 * L));
    CHECK(rep.perimeter_term == 0.0);
    CHECK(rep.collapsed_term == doctest::Approx(L));
    // total = perimeter + 2 collapsed holds by construction
    CHECK(rep.total == doctest::Approx(rep.perimeter_term + 2 * rep.collapsed_term));
}

TEST_CASE("normalized pairs: energy_bd equals energy_bk") {
    Domain dom = empty_box(8);
    TestRng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        FilmPair pair = random_pair(dom, rng, 0.4, 0.3);
        pair.normalize();
        CHECK(pair.is_normalized());
        CHECK(energy_bd(pair).total == doctest::Approx(energy_bk(pair).total));
    }
}

TEST_CASE("a K facet inside E raises energy_bd above energy_bk") {
    Domain dom = empty_box(4);
    FilmPair pair(dom);
    // 2x2 block of E with one interior facet in K_extra.
    pair.E.set(dom.cell_id(1, 1));
    pair.E.set(dom.cell_id(2, 1));
    pair.E.set(dom.cell_id(1, 2));
    pair.E.set(dom.cell_id(2, 2));
    pair.K_extra.set(dom.vertical_facet(1, 1));  // both sides in E
    CHECK_FALSE(pair.is_normalized());
    CHECK(energy_bd(pair).total > energy_bk(pair).total);
    CHECK(energy_bd(pair).total == doctest::Approx(energy_bk(pair).total + 2 * dom.spacing()));
}

TEST_CASE("energy_bk <= energy_bd always") {
    Domain dom = empty_box(8);
    TestRng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        FilmPair pair = random_pair(dom, rng, 0.4, 0.3);
        CHECK(energy_bk(pair).total <= energy_bd(pair).total + 1e-12);
    }
}

TEST_CASE("energy additive over disjoint regions") {
    Domain dom = empty_box(8);
    TestRng rng(7);
    FilmPair pair = random_pair(dom, rng, 0.4, 0.3);
    CellSet left(dom), right(dom);
    dom.omega_cells().for_each([&](CellId c) { (dom.cell_x(c) < 4 ? left : right).set(c); });
    // Regions are open: facets crossing the split line belong to neither.
    double cross = 0;
    const Domain& d = dom;
    for (int y = 0; y < 8; ++y) {
        FacetId f = d.vertical_facet(3, y);
        auto [a, b] = d.facet_cells(f);
        bool ae = pair.E.test(a), be = pair.E.test(b);
        if (ae != be)
            cross += d.spacing();
        else if (pair.K_extra.test(f) && !ae && !be)
            cross += 2 * d.spacing();
    }
    CHECK(energy_bk(pair, left).total + energy_bk(pair, right).total + cross ==
          doctest::Approx(energy_bk(pair).total));
}

TEST_CASE("representation identity: residual is exactly zero on fuzzed triples") {
    Domain dom = empty_box(8);
    TestRng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        FilmPair pair = random_pair(dom, rng, 0.35, 0.3);
        CellSet U(dom);
        dom.omega_cells().for_each([&](CellId c) {
            if ((rng.next() >> 40) < 0.7 * (1ULL << 24)) U.set(c);
        });
        CHECK(representation_check(pair, U) == 0.0);
    }
}

TEST_CASE("representation identity: E empty, K a cut") {
    Domain dom = empty_box(8);
    FilmPair pair(dom);
    for (int y = 0; y < 8; ++y) pair.K_extra.set(dom.vertical_facet(3, y));
    CHECK(representation_check(pair, dom.omega_cells()) == 0.0);
    // sum_i P(U_i) = 2 measure(K*): both halves see the full cut.
    Partition part = essential_partition(pair.derived_K(), dom.omega_cells());
    CHECK(partition_interior_perimeter(part) == doctest::Approx(2 * 8 * dom.spacing()));
}

TEST_CASE("representation identity: K = boundary of E only") {
    Domain dom = empty_box(8);
    FilmPair pair(dom);
    for (int y = 2; y < 5; ++y)
        for (int x = 2; x < 5; ++x) pair.E.set(dom.cell_id(x, y));
    CHECK(representation_check(pair, dom.omega_cells()) == 0.0);
}
