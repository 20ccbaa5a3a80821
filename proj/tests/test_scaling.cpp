#include <doctest.h>

#include <cmath>
#include <set>

#include "bhtomo/errors.hpp"
#include "bhtomo/scaling.hpp"

using namespace bhtomo;

namespace {

ParameterSet uniform_full(const LatticeGeometry& g, double J, double U, double mu) {
    return ParameterSet{std::vector<double>(static_cast<std::size_t>(g.n_bonds()), J),
                        std::vector<double>(static_cast<std::size_t>(g.n_sites()), U),
                        std::vector<double>(static_cast<std::size_t>(g.n_sites()), mu)};
}

}  // namespace

TEST_CASE("plan structure: 4 configurations, one-column shifts, tiling windows") {
    for (int M : {4, 5, 8, 11}) {
        auto plan = plan_windows(M);
        REQUIRE(plan.configs.size() == 4);
        for (std::size_t c = 0; c < 4; ++c) {
            const auto& config = plan.configs[c];
            // windows tile the lattice
            int expected_start = 1;
            for (const auto& w : config.windows) {
                CHECK(w.first_col == expected_start);
                expected_start = w.last_col + 1;
                CHECK(w.width() <= 4);
                CHECK((w.full_width == (w.width() == 4)));
            }
            CHECK(expected_start == M + 1);
            // cuts shift by one column between successive configurations
            for (int cut : config.cuts) CHECK(cut % 4 == static_cast<int>(c));
        }
    }
    CHECK_THROWS_AS(plan_windows(3), ConfigError);
}

TEST_CASE("M=4: first configuration is the whole system without cuts") {
    auto plan = plan_windows(4);
    CHECK(plan.configs[0].cuts.empty());
    REQUIRE(plan.configs[0].windows.size() == 1);
    CHECK(plan.configs[0].windows[0].full_width);
}

TEST_CASE("M=8: configuration 0 partitions into two full windows") {
    auto plan = plan_windows(8);
    REQUIRE(plan.configs[0].windows.size() == 2);
    CHECK(plan.configs[0].windows[0].full_width);
    CHECK(plan.configs[0].windows[1].full_width);
    CHECK(plan.configs[0].cuts == std::vector<int>{4});
    // shifted configurations have one full window plus edge remainders
    for (std::size_t c = 1; c < 4; ++c) {
        int full = 0;
        for (const auto& w : plan.configs[c].windows) full += w.full_width ? 1 : 0;
        CHECK(full == 1);
    }
}

TEST_CASE("coverage: every parameter interior somewhere, exhaustively for M <= 32") {
    for (int M = 4; M <= 32; ++M) {
        auto plan = plan_windows(M);
        auto geometry = build_geometry(2, M);

        // col -> covered as interior by some full-width window
        auto col_covered = [&](int col) {
            for (const auto& config : plan.configs) {
                for (const auto& w : config.windows) {
                    if (w.full_width && column_is_interior(w, col, M)) return true;
                }
            }
            return false;
        };
        for (int col = 1; col <= M; ++col) CHECK(col_covered(col));

        // bonds: both endpoint columns interior within one window
        for (int b = 0; b < geometry.n_bonds(); ++b) {
            const Bond& bond = geometry.bond(b);
            int ca = geometry.col_of(bond.a) + 1;
            int cb = geometry.col_of(bond.b) + 1;
            bool covered = false;
            for (const auto& config : plan.configs) {
                for (const auto& w : config.windows) {
                    if (w.full_width && column_is_interior(w, ca, M) &&
                        column_is_interior(w, cb, M)) {
                        covered = true;
                    }
                }
            }
            CHECK(covered);
        }
    }
}

TEST_CASE("blocked evolution factorizes across windows") {
    // Two 2x2 windows: the full outcome distribution must equal the product
    // of the window distributions, and cross-window correlators factorize.
    auto full = build_geometry(2, 4);
    auto plan = plan_windows(4);
    // configuration 2 cuts between columns 2 and 3: windows [1,2] and [3,4]
    const auto& config = plan.configs[2];
    REQUIRE(config.windows.size() == 2);
    REQUIRE(config.cuts == std::vector<int>{2});

    ParameterSet params = uniform_full(full, 1.0, 2.0, 1.0);
    auto parts = simulate_partitioned(full, params, plan, 2, 4000, 30.0, 99);
    REQUIRE(parts.per_window.size() == 2);
    CHECK(parts.full.n_sites == 8);
    CHECK(parts.full.n_atoms == 4);

    // every full row is the concatenation of the window rows
    for (std::size_t t = 0; t < 10; ++t) {
        const auto& w0 = config.windows[0];
        for (std::size_t k = 0; k < w0.full_site_ids.size(); ++k) {
            CHECK(parts.full.snapshots[t][static_cast<std::size_t>(w0.full_site_ids[k] - 1)] ==
                  parts.per_window[0].snapshots[t][k]);
        }
    }

    // exact product structure: simulate each window exactly
    // window [1,2]: sites {1,2,5,6}; window [3,4]: sites {3,4,7,8}
    // cross-window two-point correlator factorizes within sampling error
    auto mean_n = [&](int site) {
        double acc = 0;
        for (const auto& row : parts.full.snapshots) {
            acc += row[static_cast<std::size_t>(site - 1)];
        }
        return acc / static_cast<double>(parts.full.snapshots.size());
    };
    auto mean_nn = [&](int a, int b) {
        double acc = 0;
        for (const auto& row : parts.full.snapshots) {
            acc += row[static_cast<std::size_t>(a - 1)] * row[static_cast<std::size_t>(b - 1)];
        }
        return acc / static_cast<double>(parts.full.snapshots.size());
    };
    // site 2 in window 0, site 3 in window 1
    double lhs = mean_nn(2, 3);
    double rhs = mean_n(2) * mean_n(3);
    CHECK(std::abs(lhs - rhs) < 0.05);  // ~5 sigma at 4000 shots

    SUBCASE("extract_window inverts the concatenation") {
        auto sub = extract_window(parts.full, config.windows[0]);
        CHECK(sub.snapshots == parts.per_window[0].snapshots);
        CHECK(sub.n_atoms == parts.per_window[0].n_atoms);
    }
}

TEST_CASE("single-window plan reproduces the plain pipeline bit-exactly") {
    auto full = build_geometry(2, 4);
    auto plan = plan_windows(4);
    ParameterSet params = uniform_full(full, 1.0, 2.0, 1.0);

    auto parts = simulate_partitioned(full, params, plan, 0, 500, 200.0, 4242);
    REQUIRE(parts.per_window.size() == 1);

    FockBasis basis(4, 8);
    auto H = build_hamiltonian(full, basis, params);
    auto p = outcome_distribution(evolve(H, basis, {checkerboard_state(full), 200.0}));
    // same derived stream as the partitioned path: config 0, window 0
    auto direct = sample_snapshots(
        p, basis, 500, SplitMix64::derive_stream(SplitMix64::derive_stream(4242, 0), 0));
    CHECK(parts.per_window[0].snapshots == direct.snapshots);
    CHECK(parts.full.snapshots == direct.snapshots);
}

TEST_CASE("atom number per window is conserved in every snapshot") {
    auto full = build_geometry(2, 7);
    auto plan = plan_windows(7);
    ParameterSet params = uniform_full(full, 1.0, 2.0, 1.0);
    auto parts = simulate_partitioned(full, params, plan, 1, 200, 40.0, 5);
    for (std::size_t wi = 0; wi < parts.per_window.size(); ++wi) {
        const auto& w = plan.configs[1].windows[wi];
        for (const auto& row : parts.per_window[wi].snapshots) {
            int sum = 0;
            for (int n : row) sum += n;
            CHECK(sum == w.width());  // one atom per column
        }
    }
}

TEST_CASE("merge selects interior sources with provenance") {
    auto full = build_geometry(2, 8);
    auto plan = plan_windows(8);
    LatticeGeometry frame = build_geometry(2, 4);
    auto frame_names = canonical_label_names(frame);

    // constant stub estimates: every window reports the same values
    std::vector<WindowEstimate> estimates;
    for (int c = 0; c < 4; ++c) {
        const auto& config = plan.configs[static_cast<std::size_t>(c)];
        for (int w = 0; w < static_cast<int>(config.windows.size()); ++w) {
            if (!config.windows[static_cast<std::size_t>(w)].full_width) continue;
            ParameterEstimate est;
            est.names = frame_names;
            est.values.assign(frame_names.size(), 0.0);
            for (std::size_t i = 0; i < 10; ++i) est.values[i] = 1.001;       // J
            for (std::size_t i = 10; i < 18; ++i) est.values[i] = 2.002;      // U
            for (std::size_t i = 18; i < 25; ++i) est.values[i] = 0.0005;     // mu_diff
            estimates.push_back({c, w, est});
        }
    }

    MergedEstimate merged = merge_estimates(estimates, plan, full, 1.0);
    REQUIRE(merged.params.J.size() == 22);
    REQUIRE(merged.params.U.size() == 16);

    for (double J : merged.params.J) CHECK(J == doctest::Approx(1.001));
    for (double U : merged.params.U) CHECK(U == doctest::Approx(2.002));
    // mu chains: mu_1 = anchor, each site adds its in-window difference
    CHECK(merged.params.mu[0] == doctest::Approx(1.0));

    // provenance: every source window renders its parameter interior
    for (std::size_t b = 0; b < merged.J_provenance.size(); ++b) {
        const auto& prov = merged.J_provenance[b];
        CHECK(prov.config_index >= 0);
        CHECK(prov.boundary_distance >= 2);  // interior = more than margin 1
    }
    for (const auto& prov : merged.U_provenance) CHECK(prov.boundary_distance >= 2);
}

TEST_CASE("merge rejects estimates from truncated windows") {
    auto full = build_geometry(2, 5);
    auto plan = plan_windows(5);
    // config 1 window 0 is the width-1 remainder [1,1]
    REQUIRE(!plan.configs[1].windows[0].full_width);
    ParameterEstimate est;
    est.names = canonical_label_names(build_geometry(2, 4));
    est.values.assign(est.names.size(), 1.0);
    std::vector<WindowEstimate> estimates = {{1, 0, est}};
    CHECK_THROWS_AS(merge_estimates(estimates, plan, full, 1.0), ConfigError);
}

TEST_CASE("boundary perturbation shifts cut-adjacent columns only") {
    auto full = build_geometry(2, 8);
    auto plan = plan_windows(8);
    ParameterSet params = uniform_full(full, 1.0, 2.0, 1.0);

    // config 0: windows [1-4], [5-8]; cut between 4 and 5
    auto clean = simulate_partitioned(full, params, plan, 0, 50, 20.0, 3, 0.0);
    auto bumped = simulate_partitioned(full, params, plan, 0, 50, 20.0, 3, 0.05);
    // different dynamics near the cut changes the sampled outcomes
    CHECK(clean.full.snapshots != bumped.full.snapshots);
}
