#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "bhtomo/fock.hpp"
#include "bhtomo/lattice.hpp"

namespace bhtomo {

// Quench protocol: the system starts in a single Fock state and evolves for
// time T (units of inverse mean hopping) under the quenched Hamiltonian.
struct QuenchConfig {
    FockState initial_state;
    double evolution_time = 200.0;
};

// N projective occupation measurements. Provenance (seed, generating
// parameter digest) is absent when the data is treated as experimental input.
struct SnapshotSet {
    int n_sites = 0;
    int n_atoms = 0;
    std::vector<FockState> snapshots;

    bool has_provenance = false;
    std::uint64_t seed = 0;
    std::string params_digest;

    std::size_t size() const { return snapshots.size(); }
};

// Default initial state: one atom on every second site (checkerboard across
// the two legs). For 2x4 in canonical site order this is (1,0,1,0,0,1,0,1).
FockState checkerboard_state(const LatticeGeometry& geometry);

// e^{-iHT} |initial>, computed via full Hermitian eigendecomposition (exact
// for arbitrary T). Throws NumericError if the decomposition fails or the
// result loses normalization.
Eigen::VectorXcd evolve(const Eigen::SparseMatrix<double>& H, const FockBasis& basis,
                        const QuenchConfig& cfg);

// Born-rule probabilities p_k = |amplitude_k|^2.
Eigen::VectorXd outcome_distribution(const Eigen::VectorXcd& psi);

// n_shots i.i.d. multinomial draws mapped back to Fock states.
SnapshotSet sample_snapshots(const Eigen::VectorXd& p, const FockBasis& basis, int n_shots,
                             std::uint64_t seed);

// Counts per basis index; the sufficient statistic for features and likelihoods.
Eigen::VectorXd snapshot_histogram(const SnapshotSet& shots, const FockBasis& basis);

}  // namespace bhtomo
