#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bhtomo/correlators.hpp"
#include "bhtomo/dynamics.hpp"
#include "bhtomo/errors.hpp"
#include "bhtomo/hamiltonian.hpp"

using namespace bhtomo;

namespace {

SnapshotSet make_set(std::vector<FockState> shots) {
    SnapshotSet s;
    s.n_sites = static_cast<int>(shots.front().size());
    s.n_atoms = 0;
    for (int n : shots.front()) s.n_atoms += n;
    s.snapshots = std::move(shots);
    return s;
}

int find_column(const FeatureSchema& schema, const std::string& name) {
    auto names = schema.column_names();
    auto it = std::find(names.begin(), names.end(), name);
    REQUIRE(it != names.end());
    return static_cast<int>(std::distance(names.begin(), it));
}

}  // namespace

TEST_CASE("schema size and canonical order") {
    FeatureSchema schema(8);
    CHECK(schema.size() == 170);  // 8 + 28 + 56 + 70 + 8
    auto names = schema.column_names();
    CHECK(names[0] == "n1");
    CHECK(names[8] == "n1n2");      // first pair after the 8 densities
    CHECK(names[36] == "n1n2n3");   // first triple
    CHECK(names[92] == "n1n2n3n4");  // first quadruple
    CHECK(names[162] == "n1(n1-1)");
    CHECK(names[169] == "n8(n8-1)");
}

TEST_CASE("single-snapshot products") {
    FeatureSchema schema(8);
    auto feats = features_from_snapshots(schema, make_set({{2, 0, 2, 0, 0, 0, 0, 0}}));
    CHECK(feats(find_column(schema, "n1")) == doctest::Approx(2.0));
    CHECK(feats(find_column(schema, "n1n3")) == doctest::Approx(4.0));
    CHECK(feats(find_column(schema, "n1(n1-1)")) == doctest::Approx(2.0));
    CHECK(feats(find_column(schema, "n1n2n3")) == doctest::Approx(0.0));
}

TEST_CASE("checkerboard snapshots") {
    FeatureSchema schema(8);
    FockState cb{1, 0, 1, 0, 0, 1, 0, 1};
    auto feats = features_from_snapshots(schema, make_set({cb, cb, cb}));
    CHECK(feats(find_column(schema, "n1n3n6n8")) == doctest::Approx(1.0));
    CHECK(feats(find_column(schema, "n2")) == doctest::Approx(0.0));
    CHECK(feats(find_column(schema, "n1n2")) == doctest::Approx(0.0));
}

TEST_CASE("snapshot permutation leaves features bit-identical") {
    FeatureSchema schema(8);
    FockBasis basis(4, 8);
    std::vector<FockState> shots;
    for (std::size_t k = 0; k < 200; ++k) shots.push_back(basis.state((k * 13) % 330));
    auto a = features_from_snapshots(schema, make_set(shots));
    std::mt19937 rng(3);
    std::shuffle(shots.begin(), shots.end(), rng);
    auto b = features_from_snapshots(schema, make_set(shots));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("concatenation is the shot-weighted average") {
    FeatureSchema schema(8);
    FockBasis basis(4, 8);
    std::vector<FockState> sa, sb;
    for (std::size_t k = 0; k < 64; ++k) sa.push_back(basis.state(k));
    for (std::size_t k = 0; k < 192; ++k) sb.push_back(basis.state(330 - 1 - k));
    auto fa = features_from_snapshots(schema, make_set(sa));
    auto fb = features_from_snapshots(schema, make_set(sb));
    std::vector<FockState> all = sa;
    all.insert(all.end(), sb.begin(), sb.end());
    auto fall = features_from_snapshots(schema, make_set(all));
    CorrelatorVector expected = (64.0 * fa + 192.0 * fb) / 256.0;
    CHECK((fall - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("exact features: one-hot equals single snapshot; density sums to N") {
    FeatureSchema schema(8);
    FockBasis basis(4, 8);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(330);
    p(17) = 1.0;
    auto exact = features_exact(schema, basis, p);
    auto sampled = features_from_snapshots(schema, make_set({basis.state(17)}));
    CHECK((exact - sampled).cwiseAbs().maxCoeff() < 1e-14);

    // sum of <n_i> = 4 exactly for any distribution
    auto geometry = build_geometry(2, 4);
    ParameterSet params{std::vector<double>(10, 1.0), std::vector<double>(8, 2.0),
                        std::vector<double>(8, 1.0)};
    auto H = build_hamiltonian(geometry, basis, params);
    auto prob = outcome_distribution(evolve(H, basis, {checkerboard_state(geometry), 200.0}));
    auto feats = features_exact(schema, basis, prob);
    double total_density = 0.0;
    for (int i = 0; i < 8; ++i) total_density += feats(i);
    CHECK(total_density == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("sampled features converge to exact within 5 multinomial standard errors") {
    FeatureSchema schema(8);
    FockBasis basis(4, 8);
    auto geometry = build_geometry(2, 4);
    ParameterSet params{std::vector<double>(10, 1.0), std::vector<double>(8, 2.0),
                        std::vector<double>(8, 1.0)};
    auto H = build_hamiltonian(geometry, basis, params);
    auto p = outcome_distribution(evolve(H, basis, {checkerboard_state(geometry), 200.0}));

    const int n_shots = 100000;
    auto shots = sample_snapshots(p, basis, n_shots, 314159);
    auto sampled = features_from_snapshots(schema, shots);
    auto exact = features_exact(schema, basis, p);

    // per-feature variance of the product under p, via the squared table
    FeatureTable table(schema, basis);
    Eigen::VectorXd second_moment = table.table().array().square().matrix() * p;
    for (Eigen::Index c = 0; c < sampled.size(); ++c) {
        double var = second_moment(c) - exact(c) * exact(c);
        double se = std::sqrt(std::max(var, 0.0) / n_shots);
        double tol = 5.0 * se + 1e-12;
        CHECK(std::abs(sampled(c) - exact(c)) <= tol);
    }
}

TEST_CASE("feature table agrees with direct paths") {
    FeatureSchema schema(8);
    FockBasis basis(4, 8);
    FeatureTable table(schema, basis);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(330, 1.0 / 330.0);
    CHECK((table.from_probabilities(p) - features_exact(schema, basis, p)).cwiseAbs().maxCoeff() <
          1e-14);

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(330);
    counts(3) = 2;
    counts(100) = 1;
    auto from_hist = table.from_histogram(counts);
    auto direct = features_from_snapshots(
        schema, make_set({basis.state(3), basis.state(3), basis.state(100)}));
    CHECK((from_hist - direct).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("empty snapshot set is a usage error") {
    FeatureSchema schema(8);
    SnapshotSet empty;
    empty.n_sites = 8;
    CHECK_THROWS_AS(features_from_snapshots(schema, empty), ConfigError);
}

TEST_CASE("schema digest is stable and site-count sensitive") {
    CHECK(FeatureSchema(8).digest() == FeatureSchema(8).digest());
    CHECK(FeatureSchema(8).digest() != FeatureSchema(6).digest());
}
