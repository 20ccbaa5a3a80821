#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "bhtomo/fock.hpp"
#include "bhtomo/lattice.hpp"
#include "bhtomo/rng.hpp"

namespace bhtomo {

// All couplings of one Bose-Hubbard instance, aligned with the geometry's
// canonical bond and site order. Energies are in units of the mean hopping.
struct ParameterSet {
    std::vector<double> J;   // per bond
    std::vector<double> U;   // per site
    std::vector<double> mu;  // per site

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

// mu_diff,i = mu_i - mu_1 for i = 2..n_sites; the only chemical-potential
// information observable at fixed atom number.
std::vector<double> mu_diff(const ParameterSet& params);

// Canonical flat order: J per bond, U per site, mu_diff for sites 2..n.
// This is the label layout of every estimator (25 entries for the 2x4 ladder).
std::vector<double> canonical_labels(const ParameterSet& params);
std::vector<std::string> canonical_label_names(const LatticeGeometry& geometry);

// Independent uniform box prior, one interval per parameter. The derived
// mu_diff interval has twice the mu half-width.
struct PriorBox {
    std::vector<double> J_center, J_half_width;
    std::vector<double> U_center, U_half_width;
    std::vector<double> mu_center, mu_half_width;

    static PriorBox uniform(const LatticeGeometry& geometry, double J_c, double J_hw,
                            double U_c, double U_hw, double mu_c, double mu_hw);

    ParameterSet centers() const;
    void validate(const LatticeGeometry& geometry) const;
    bool contains(const ParameterSet& params) const;

    friend bool operator==(const PriorBox&, const PriorBox&) = default;
};

// One independent uniform draw per parameter; deterministic given the rng state.
ParameterSet sample_parameters(const PriorBox& prior, SplitMix64& rng);

void validate_parameters(const LatticeGeometry& geometry, const ParameterSet& params);

// Sparse real-symmetric Bose-Hubbard matrix over the basis ordering:
// off-diagonal -J_ij ladder amplitudes, diagonal U_i/2 n_i(n_i-1) - mu_i n_i.
Eigen::SparseMatrix<double> build_hamiltonian(const LatticeGeometry& geometry,
                                              const FockBasis& basis,
                                              const ParameterSet& params);

// Core assembly over an explicit bond list; used for arbitrary small systems
// (scaling windows of truncated width, test fixtures).
Eigen::SparseMatrix<double> build_hamiltonian(const std::vector<Bond>& bonds,
                                              const FockBasis& basis,
                                              const ParameterSet& params);

}  // namespace bhtomo
