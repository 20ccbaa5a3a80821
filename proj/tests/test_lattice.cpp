#include <doctest.h>

#include <cstdlib>
#include <set>

#include "bhtomo/errors.hpp"
#include "bhtomo/lattice.hpp"

using namespace bhtomo;

TEST_CASE("2x4 ladder: canonical numbering and bond order") {
    auto g = build_geometry(2, 4);
    CHECK(g.n_sites() == 8);
    CHECK(g.n_bonds() == 10);

    // top row 1..4, bottom row 5..8
    CHECK(g.site_id(0, 0) == 1);
    CHECK(g.site_id(0, 3) == 4);
    CHECK(g.site_id(1, 0) == 5);
    CHECK(g.site_id(1, 3) == 8);

    // legs first (top then bottom), then rungs left-to-right
    std::vector<Bond> expected = {{1, 2}, {2, 3}, {3, 4}, {5, 6}, {6, 7},
                                  {7, 8}, {1, 5}, {2, 6}, {3, 7}, {4, 8}};
    CHECK(g.bonds() == expected);

    // end rungs named in the text: (1,5) and (4,8)
    CHECK(g.bond(6) == Bond{1, 5});
    CHECK(g.bond(9) == Bond{4, 8});
}

TEST_CASE("2x2 ladder") {
    auto g = build_geometry(2, 2);
    CHECK(g.n_sites() == 4);
    CHECK(g.n_bonds() == 4);  // 2 legs + 2 rungs
}

TEST_CASE("2x6 ladder bond count matches explicit enumeration") {
    auto g = build_geometry(2, 6);
    CHECK(g.n_sites() == 12);
    CHECK(g.n_bonds() == 16);  // 3L - 2
}

TEST_CASE("geometry invariants for a range of lengths") {
    for (int L = 2; L <= 12; ++L) {
        auto g = build_geometry(2, L);
        CHECK(g.n_bonds() == 3 * L - 2);

        std::set<std::pair<int, int>> seen;
        for (int k = 0; k < g.n_bonds(); ++k) {
            const Bond& b = g.bond(k);
            CHECK(b.a < b.b);
            // Manhattan distance 1
            int dr = std::abs(g.row_of(b.a) - g.row_of(b.b));
            int dc = std::abs(g.col_of(b.a) - g.col_of(b.b));
            CHECK(dr + dc == 1);
            CHECK(seen.insert({b.a, b.b}).second);  // no duplicates
        }
    }
}

TEST_CASE("rejects unsupported shapes") {
    CHECK_THROWS_AS(build_geometry(1, 4), ConfigError);
    CHECK_THROWS_AS(build_geometry(3, 4), ConfigError);
    CHECK_THROWS_AS(build_geometry(2, 1), ConfigError);
}
