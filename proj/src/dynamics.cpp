#include "bhtomo/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "bhtomo/errors.hpp"
#include "bhtomo/rng.hpp"

namespace bhtomo {

FockState checkerboard_state(const LatticeGeometry& geometry) {
    FockState s(static_cast<std::size_t>(geometry.n_sites()), 0);
    for (int site = 1; site <= geometry.n_sites(); ++site) {
        int r = geometry.row_of(site);
        int c = geometry.col_of(site);
        if ((r + c) % 2 == 0) s[static_cast<std::size_t>(site - 1)] = 1;
    }
    return s;
}

Eigen::VectorXcd evolve(const Eigen::SparseMatrix<double>& H, const FockBasis& basis,
                        const QuenchConfig& cfg) {
    if (H.rows() != static_cast<Eigen::Index>(basis.dimension())) {
        throw ConfigError("dynamics: Hamiltonian dimension does not match basis");
    }
    if (cfg.evolution_time < 0) throw ConfigError("dynamics: evolution time must be >= 0");
    std::size_t k0 = basis.index_of(cfg.initial_state);

    Eigen::MatrixXd Hd(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hd);
    if (es.info() != Eigen::Success) {
        throw NumericError("dynamics: eigendecomposition failed (dim " +
                           std::to_string(H.rows()) + ", non-convergence)");
    }

    const Eigen::MatrixXd& V = es.eigenvectors();
    const Eigen::VectorXd& w = es.eigenvalues();
    // psi = V diag(e^{-i w T}) V^T e_{k0}
    Eigen::VectorXd c = V.row(static_cast<Eigen::Index>(k0));
    Eigen::VectorXcd phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        phases(i) = std::polar(1.0, -w(i) * cfg.evolution_time) * c(i);
    }
    Eigen::VectorXcd psi = V * phases;

    double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) {
        throw NumericError("dynamics: evolved state lost normalization, |norm-1| = " +
                           std::to_string(std::abs(norm - 1.0)));
    }
    return psi;
}

Eigen::VectorXd outcome_distribution(const Eigen::VectorXcd& psi) {
    return psi.cwiseAbs2();
}

SnapshotSet sample_snapshots(const Eigen::VectorXd& p, const FockBasis& basis, int n_shots,
                             std::uint64_t seed) {
    if (n_shots < 1) throw ConfigError("dynamics: n_shots must be >= 1");
    if (p.size() != static_cast<Eigen::Index>(basis.dimension())) {
        throw ConfigError("dynamics: probability vector does not match basis");
    }
    double total = p.sum();
    if (std::abs(total - 1.0) > 1e-8) {
        throw ConfigError("dynamics: probabilities sum to " + std::to_string(total));
    }

    std::vector<double> cdf(basis.dimension());
    double acc = 0.0;
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        acc += p(static_cast<Eigen::Index>(k));
        cdf[k] = acc;
    }
    cdf.back() = 1.0;

    SplitMix64 rng(seed);
    SnapshotSet out;
    out.n_sites = basis.n_sites();
    out.n_atoms = basis.n_atoms();
    out.has_provenance = true;
    out.seed = seed;
    out.snapshots.reserve(static_cast<std::size_t>(n_shots));
    for (int t = 0; t < n_shots; ++t) {
        double u = rng.uniform01();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
        if (k >= basis.dimension()) k = basis.dimension() - 1;
        out.snapshots.push_back(basis.state(k));
    }
    return out;
}

Eigen::VectorXd snapshot_histogram(const SnapshotSet& shots, const FockBasis& basis) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    for (const FockState& s : shots.snapshots) {
        counts(static_cast<Eigen::Index>(basis.index_of(s))) += 1.0;
    }
    return counts;
}

}  // namespace bhtomo
