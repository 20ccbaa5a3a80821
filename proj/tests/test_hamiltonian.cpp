#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "bhtomo/errors.hpp"
#include "bhtomo/hamiltonian.hpp"
#include "bhtomo/rng.hpp"

using namespace bhtomo;

namespace {

// Independent dense oracle: loops over all basis-state pairs and evaluates
// <m|H|k> from the ladder-operator definition directly, without reusing the
// library's hop_element or sparse assembly.
Eigen::MatrixXd dense_oracle(const std::vector<Bond>& bonds, const FockBasis& basis,
                             const ParameterSet& p) {
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const FockState& s = basis.state(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < s.size(); ++i) {
            double n = s[i];
            H(k, k) += 0.5 * p.U[i] * n * (n - 1.0) - p.mu[i] * n;
        }
        for (Eigen::Index m = 0; m < dim; ++m) {
            const FockState& t = basis.state(static_cast<std::size_t>(m));
            for (std::size_t b = 0; b < bonds.size(); ++b) {
                std::size_t ia = static_cast<std::size_t>(bonds[b].a - 1);
                std::size_t ib = static_cast<std::size_t>(bonds[b].b - 1);
                // <t| a†_ib a_ia |s>
                auto hop_matches = [&](std::size_t from, std::size_t to) -> double {
                    if (s[from] == 0) return 0.0;
                    for (std::size_t q = 0; q < s.size(); ++q) {
                        int expect = s[q];
                        if (q == from) expect -= 1;
                        if (q == to) expect += 1;
                        if (t[q] != expect) return 0.0;
                    }
                    return std::sqrt(static_cast<double>(s[from])) *
                           std::sqrt(static_cast<double>(s[to] + (from == to ? 0 : 1)));
                };
                H(m, k) += -p.J[b] * (hop_matches(ia, ib) + hop_matches(ib, ia));
            }
        }
    }
    return H;
}

ParameterSet uniform_params(int n_bonds, int n_sites, double J, double U, double mu) {
    ParameterSet p;
    p.J.assign(static_cast<std::size_t>(n_bonds), J);
    p.U.assign(static_cast<std::size_t>(n_sites), U);
    p.mu.assign(static_cast<std::size_t>(n_sites), mu);
    return p;
}

}  // namespace

TEST_CASE("single-site diagonal closed form") {
    // 1 site, 2 atoms, U=2, mu=1: U/2*2*1 - mu*2 = 0
    FockBasis basis(2, 1);
    auto H = build_hamiltonian(std::vector<Bond>{}, basis, uniform_params(0, 1, 0.0, 2.0, 1.0));
    REQUIRE(H.rows() == 1);
    CHECK(Eigen::MatrixXd(H)(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two-site single-particle hopping matrix") {
    FockBasis basis(1, 2);
    auto H = build_hamiltonian({{1, 2}}, basis, uniform_params(1, 2, 1.0, 0.0, 0.0));
    Eigen::MatrixXd Hd(H);
    REQUIRE(Hd.rows() == 2);
    CHECK(Hd(0, 0) == doctest::Approx(0.0));
    CHECK(Hd(0, 1) == doctest::Approx(-1.0));
    CHECK(Hd(1, 0) == doctest::Approx(-1.0));
    CHECK(Hd(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("2x4 Hamiltonian: Hermiticity and dense-oracle agreement") {
    auto geometry = build_geometry(2, 4);
    FockBasis basis(4, 8);

    SplitMix64 rng(7);
    auto prior = PriorBox::uniform(geometry, 1.0, 0.005, 2.0, 0.01, 1.0, 0.005);
    ParameterSet p = sample_parameters(prior, rng);

    auto H = build_hamiltonian(geometry, basis, p);
    Eigen::MatrixXd Hd(H);
    REQUIRE(Hd.rows() == 330);

    double herm = (Hd - Hd.transpose()).cwiseAbs().maxCoeff();
    CHECK(herm < 1e-12);

    Eigen::MatrixXd Ho = dense_oracle(geometry.bonds(), basis, p);
    CHECK((Hd - Ho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sparse equals dense oracle on small instances") {
    for (int L : {2, 3}) {
        auto geometry = build_geometry(2, L);
        FockBasis basis(2, geometry.n_sites());
        SplitMix64 rng(static_cast<std::uint64_t>(L));
        auto prior = PriorBox::uniform(geometry, 1.0, 0.3, 2.0, 0.5, 1.0, 0.2);
        ParameterSet p = sample_parameters(prior, rng);
        Eigen::MatrixXd Hd(build_hamiltonian(geometry, basis, p));
        Eigen::MatrixXd Ho = dense_oracle(geometry.bonds(), basis, p);
        CHECK((Hd - Ho).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("uniform mu shift moves every eigenvalue by -c*N and keeps eigenvectors") {
    auto geometry = build_geometry(2, 4);
    FockBasis basis(4, 8);
    SplitMix64 rng(99);
    auto prior = PriorBox::uniform(geometry, 1.0, 0.005, 2.0, 0.01, 1.0, 0.005);
    ParameterSet p = sample_parameters(prior, rng);

    const double c = 0.37;
    ParameterSet shifted = p;
    for (double& m : shifted.mu) m += c;

    Eigen::MatrixXd H0(build_hamiltonian(geometry, basis, p));
    Eigen::MatrixXd H1(build_hamiltonian(geometry, basis, shifted));
    // H1 = H0 - c * N with N = 4 * identity on the fixed-number basis
    CHECK((H1 - (H0 - 4.0 * c * Eigen::MatrixXd::Identity(330, 330))).cwiseAbs().maxCoeff() <
          1e-8);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e0(H0), e1(H1);
    CHECK((e1.eigenvalues() - (e0.eigenvalues().array() - 4.0 * c).matrix()).cwiseAbs().maxCoeff() <
          1e-8);
}

TEST_CASE("sample_parameters stays in the prior box and is deterministic") {
    auto geometry = build_geometry(2, 4);
    auto prior = PriorBox::uniform(geometry, 1.0, 0.005, 2.0, 0.01, 1.0, 0.005);

    SplitMix64 rng_a(123), rng_b(123);
    ParameterSet a = sample_parameters(prior, rng_a);
    ParameterSet b = sample_parameters(prior, rng_b);
    CHECK(a == b);
    CHECK(prior.contains(a));
    for (double J : a.J) {
        CHECK(J >= 0.995);
        CHECK(J <= 1.005);
    }
    for (double U : a.U) {
        CHECK(U >= 1.99);
        CHECK(U <= 2.01);
    }
    for (double m : a.mu) {
        CHECK(m >= 0.995);
        CHECK(m <= 1.005);
    }

    SUBCASE("degenerate prior returns centers") {
        auto point = PriorBox::uniform(geometry, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0);
        SplitMix64 rng(5);
        ParameterSet c = sample_parameters(point, rng);
        CHECK(c == point.centers());
    }
}

TEST_CASE("mu_diff") {
    ParameterSet p = uniform_params(10, 8, 1.0, 2.0, 1.0);
    SUBCASE("uniform potential gives zeros") {
        auto d = mu_diff(p);
        REQUIRE(d.size() == 7);
        for (double v : d) CHECK(v == 0.0);
    }
    SUBCASE("direct subtraction") {
        p.mu[1] = 1.004;
        CHECK(mu_diff(p)[0] == doctest::Approx(0.004));
    }
    SUBCASE("range bound from the prior") {
        auto geometry = build_geometry(2, 4);
        auto prior = PriorBox::uniform(geometry, 1.0, 0.005, 2.0, 0.01, 1.0, 0.005);
        SplitMix64 rng(17);
        for (int rep = 0; rep < 50; ++rep) {
            auto d = mu_diff(sample_parameters(prior, rng));
            for (double v : d) {
                CHECK(v >= -0.01);
                CHECK(v <= 0.01);
            }
        }
    }
}

TEST_CASE("canonical label order is J, U, mu_diff") {
    auto geometry = build_geometry(2, 4);
    auto names = canonical_label_names(geometry);
    REQUIRE(names.size() == 25);
    CHECK(names[0] == "J(1-2)");
    CHECK(names[6] == "J(1-5)");
    CHECK(names[9] == "J(4-8)");
    CHECK(names[10] == "U1");
    CHECK(names[17] == "U8");
    CHECK(names[18] == "mu_diff2");
    CHECK(names[24] == "mu_diff8");

    ParameterSet p = uniform_params(10, 8, 1.0, 2.0, 1.0);
    p.mu[7] = 1.003;
    auto labels = canonical_labels(p);
    REQUIRE(labels.size() == 25);
    CHECK(labels[0] == 1.0);
    CHECK(labels[10] == 2.0);
    CHECK(labels[24] == doctest::Approx(0.003));
}

TEST_CASE("missing parameters are configuration errors") {
    auto geometry = build_geometry(2, 4);
    FockBasis basis(4, 8);
    ParameterSet p = uniform_params(9, 8, 1.0, 2.0, 1.0);  // one J short
    CHECK_THROWS_AS(build_hamiltonian(geometry, basis, p), ConfigError);
}
