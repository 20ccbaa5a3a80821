#include <doctest.h>

#include <cmath>

#include "bhtomo/errors.hpp"
#include "bhtomo/nn_estimator.hpp"

using namespace bhtomo;

namespace {

struct SmallSystem {
    // 2x2 ladder with 2 atoms keeps dataset generation fast
    LatticeGeometry geometry = build_geometry(2, 2);
    FockBasis basis{2, 4};
    PriorBox prior = PriorBox::uniform(geometry, 1.0, 0.005, 2.0, 0.01, 1.0, 0.005);
    QuenchConfig quench{checkerboard_state(geometry), 50.0};
};

}  // namespace

TEST_CASE("dataset generation: labels inside prior, reproducible, thread-invariant") {
    SmallSystem sys;
    DatasetConfig dc{sys.prior, 40, 200, sys.quench, 99, false};
    Dataset a = generate_dataset(sys.geometry, sys.basis, dc, 1);
    Dataset b = generate_dataset(sys.geometry, sys.basis, dc, 2);

    CHECK(a.features.rows() == 40);
    CHECK(a.labels.cols() == 11);  // 4 J + 4 U + 3 mu_diff
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.labels - b.labels).cwiseAbs().maxCoeff() == 0.0);

    for (Eigen::Index i = 0; i < a.labels.rows(); ++i) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            CHECK(a.labels(i, c) >= 0.995);
            CHECK(a.labels(i, c) <= 1.005);
        }
        for (Eigen::Index c = 4; c < 8; ++c) {
            CHECK(a.labels(i, c) >= 1.99);
            CHECK(a.labels(i, c) <= 2.01);
        }
        for (Eigen::Index c = 8; c < 11; ++c) {
            CHECK(a.labels(i, c) >= -0.01);
            CHECK(a.labels(i, c) <= 0.01);
        }
    }
}

TEST_CASE("zero-width prior: constant labels; exact mode: zero feature noise") {
    SmallSystem sys;
    PriorBox point = PriorBox::uniform(sys.geometry, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0);

    DatasetConfig dc{point, 10, 100, sys.quench, 5, false};
    Dataset sampled = generate_dataset(sys.geometry, sys.basis, dc, 1);
    for (Eigen::Index i = 0; i < sampled.labels.rows(); ++i) {
        CHECK((sampled.labels.row(i) - sampled.labels.row(0)).cwiseAbs().maxCoeff() == 0.0);
    }
    // sampled features fluctuate between examples
    CHECK((sampled.features.row(0) - sampled.features.row(1)).cwiseAbs().maxCoeff() > 0.0);

    DatasetConfig dc_exact{point, 10, 0, sys.quench, 5, true};
    Dataset exact = generate_dataset(sys.geometry, sys.basis, dc_exact, 1);
    for (Eigen::Index i = 0; i < exact.features.rows(); ++i) {
        CHECK((exact.features.row(i) - exact.features.row(0)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("training on exact features with a zero-width prior converges to the constant") {
    SmallSystem sys;
    PriorBox point = PriorBox::uniform(sys.geometry, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0);
    DatasetConfig dc{point, 30, 0, sys.quench, 7, true};
    Dataset ds = generate_dataset(sys.geometry, sys.basis, dc, 1);

    TrainingConfig tc;
    tc.learning_rate = 3e-3;
    tc.batch_size = 10;
    tc.n_steps = 10000;
    tc.final_lr_fraction = 0.001;
    tc.seed = 3;
    EstimatorSuite suite = train_suite(ds, tc, 0, 2);

    // every model converges to predicting the constant label
    for (std::size_t m = 0; m < suite.models.size(); ++m) {
        REQUIRE(suite.failures[m].empty());
        double pred = suite.models[m].forward(ds.features.row(0).transpose());
        double loss = mse_loss(pred, ds.labels(0, static_cast<Eigen::Index>(m)), 1);
        CHECK(loss < 1e-10);
    }
}

TEST_CASE("estimate enforces suite metadata compatibility") {
    SmallSystem sys;
    DatasetConfig dc{sys.prior, 24, 100, sys.quench, 11, false};
    Dataset ds = generate_dataset(sys.geometry, sys.basis, dc, 2);
    TrainingConfig tc;
    tc.learning_rate = 1e-4;
    tc.n_steps = 50;
    tc.batch_size = 8;
    EstimatorSuite suite = train_suite(ds, tc, 4, 2);

    auto H = build_hamiltonian(sys.geometry, sys.basis, sys.prior.centers());
    auto p = outcome_distribution(evolve(H, sys.basis, sys.quench));

    SUBCASE("matching snapshot count estimates all labels") {
        auto shots = sample_snapshots(p, sys.basis, 100, 1);
        auto est = estimate(suite, shots);
        CHECK(est.names == suite.meta.label_names);
        CHECK(est.values.size() == 11);
    }
    SUBCASE("wrong snapshot count is rejected") {
        auto shots = sample_snapshots(p, sys.basis, 99, 1);
        CHECK_THROWS_AS(estimate(suite, shots), ConfigError);
    }
    SUBCASE("wrong lattice is rejected") {
        auto g8 = build_geometry(2, 4);
        FockBasis b8(4, 8);
        auto H8 = build_hamiltonian(
            g8, b8, PriorBox::uniform(g8, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0).centers());
        auto p8 = outcome_distribution(evolve(H8, b8, {checkerboard_state(g8), 10.0}));
        auto shots = sample_snapshots(p8, b8, 100, 1);
        CHECK_THROWS_AS(estimate(suite, shots), ConfigError);
    }
}

TEST_CASE("midpoint baseline approaches half the half-width") {
    // |truth - center| for truth uniform in [c-w, c+w] has expectation w/2.
    SmallSystem sys;
    auto cases = make_test_cases(sys.geometry, sys.basis, sys.prior, sys.quench, 400, 10, 42, 2);

    std::vector<double> centers = {1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0};
    std::vector<std::vector<double>> baseline(cases.size(), centers);
    auto names = canonical_label_names(sys.geometry);
    ErrorReport report = evaluate_estimates(names, baseline, cases);

    // J: w = 0.005 -> w/2 = 0.0025; U: w = 0.01 -> 0.005.
    // mu_diff = mu_i - mu_1 is triangular on [-0.01, 0.01]: E|d| = w_mu * 2/3.
    CHECK(report.mean_abs_J == doctest::Approx(0.0025).epsilon(0.10));
    CHECK(report.mean_abs_U == doctest::Approx(0.005).epsilon(0.10));
    CHECK(report.mean_abs_mu == doctest::Approx(0.005 * 2.0 / 3.0).epsilon(0.12));
}

TEST_CASE("perfect estimator stub yields zero errors") {
    SmallSystem sys;
    auto cases = make_test_cases(sys.geometry, sys.basis, sys.prior, sys.quench, 10, 10, 7, 2);
    std::vector<std::vector<double>> perfect;
    for (const auto& tc : cases) perfect.push_back(canonical_labels(tc.truth));
    auto report = evaluate_estimates(canonical_label_names(sys.geometry), perfect, cases);
    CHECK(report.mean_abs_J == 0.0);
    CHECK(report.mean_abs_U == 0.0);
    CHECK(report.mean_abs_mu == 0.0);
}

TEST_CASE("suite metadata digest distinguishes snapshot counts") {
    SmallSystem sys;
    DatasetConfig a{sys.prior, 5, 100, sys.quench, 1, false};
    DatasetConfig b{sys.prior, 5, 200, sys.quench, 1, false};
    auto da = generate_dataset(sys.geometry, sys.basis, a, 1);
    auto db = generate_dataset(sys.geometry, sys.basis, b, 1);
    CHECK(da.meta.digest() != db.meta.digest());
    CHECK_THROWS_AS(da.meta.check_compatible(db.meta), ConfigError);
}
