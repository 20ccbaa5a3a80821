#include "bhtomo/hamiltonian.hpp"

#include <vector>

#include "bhtomo/errors.hpp"

namespace bhtomo {

std::vector<double> mu_diff(const ParameterSet& params) {
    std::vector<double> out;
    out.reserve(params.mu.size() - 1);
    for (std::size_t i = 1; i < params.mu.size(); ++i) out.push_back(params.mu[i] - params.mu[0]);
    return out;
}

std::vector<double> canonical_labels(const ParameterSet& params) {
    std::vector<double> out = params.J;
    out.insert(out.end(), params.U.begin(), params.U.end());
    auto md = mu_diff(params);
    out.insert(out.end(), md.begin(), md.end());
    return out;
}

std::vector<std::string> canonical_label_names(const LatticeGeometry& geometry) {
    std::vector<std::string> names;
    for (int k = 0; k < geometry.n_bonds(); ++k) names.push_back(geometry.bond_name(k));
    for (int s = 1; s <= geometry.n_sites(); ++s) names.push_back("U" + std::to_string(s));
    for (int s = 2; s <= geometry.n_sites(); ++s) names.push_back("mu_diff" + std::to_string(s));
    return names;
}

PriorBox PriorBox::uniform(const LatticeGeometry& geometry, double J_c, double J_hw, double U_c,
                           double U_hw, double mu_c, double mu_hw) {
    PriorBox p;
    std::size_t nb = static_cast<std::size_t>(geometry.n_bonds());
    std::size_t ns = static_cast<std::size_t>(geometry.n_sites());
    p.J_center.assign(nb, J_c);
    p.J_half_width.assign(nb, J_hw);
    p.U_center.assign(ns, U_c);
    p.U_half_width.assign(ns, U_hw);
    p.mu_center.assign(ns, mu_c);
    p.mu_half_width.assign(ns, mu_hw);
    return p;
}

ParameterSet PriorBox::centers() const {
    return ParameterSet{J_center, U_center, mu_center};
}

void PriorBox::validate(const LatticeGeometry& geometry) const {
    std::size_t nb = static_cast<std::size_t>(geometry.n_bonds());
    std::size_t ns = static_cast<std::size_t>(geometry.n_sites());
    if (J_center.size() != nb || J_half_width.size() != nb || U_center.size() != ns ||
        U_half_width.size() != ns || mu_center.size() != ns || mu_half_width.size() != ns) {
        throw ConfigError("prior: size mismatch with geometry");
    }
    for (double hw : J_half_width)
        if (hw < 0) throw ConfigError("prior: negative J half-width");
    for (double hw : U_half_width)
        if (hw < 0) throw ConfigError("prior: negative U half-width");
    for (double hw : mu_half_width)
        if (hw < 0) throw ConfigError("prior: negative mu half-width");
}

bool PriorBox::contains(const ParameterSet& params) const {
    auto inside = [](const std::vector<double>& v, const std::vector<double>& c,
                     const std::vector<double>& hw) {
        if (v.size() != c.size()) return false;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < c[i] - hw[i] || v[i] > c[i] + hw[i]) return false;
        }
        return true;
    };
    return inside(params.J, J_center, J_half_width) && inside(params.U, U_center, U_half_width) &&
           inside(params.mu, mu_center, mu_half_width);
}

ParameterSet sample_parameters(const PriorBox& prior, SplitMix64& rng) {
    ParameterSet p;
    p.J.reserve(prior.J_center.size());
    p.U.reserve(prior.U_center.size());
    p.mu.reserve(prior.mu_center.size());
    for (std::size_t i = 0; i < prior.J_center.size(); ++i) {
        p.J.push_back(rng.uniform(prior.J_center[i] - prior.J_half_width[i],
                                  prior.J_center[i] + prior.J_half_width[i]));
    }
    for (std::size_t i = 0; i < prior.U_center.size(); ++i) {
        p.U.push_back(rng.uniform(prior.U_center[i] - prior.U_half_width[i],
                                  prior.U_center[i] + prior.U_half_width[i]));
    }
    for (std::size_t i = 0; i < prior.mu_center.size(); ++i) {
        p.mu.push_back(rng.uniform(prior.mu_center[i] - prior.mu_half_width[i],
                                   prior.mu_center[i] + prior.mu_half_width[i]));
    }
    return p;
}

void validate_parameters(const LatticeGeometry& geometry, const ParameterSet& params) {
    if (params.J.size() != static_cast<std::size_t>(geometry.n_bonds())) {
        throw ConfigError("hamiltonian: expected one J per bond (" +
                          std::to_string(geometry.n_bonds()) + "), got " +
                          std::to_string(params.J.size()));
    }
    if (params.U.size() != static_cast<std::size_t>(geometry.n_sites())) {
        throw ConfigError("hamiltonian: expected one U per site (" +
                          std::to_string(geometry.n_sites()) + "), got " +
                          std::to_string(params.U.size()));
    }
    if (params.mu.size() != static_cast<std::size_t>(geometry.n_sites())) {
        throw ConfigError("hamiltonian: expected one mu per site (" +
                          std::to_string(geometry.n_sites()) + "), got " +
                          std::to_string(params.mu.size()));
    }
}

Eigen::SparseMatrix<double> build_hamiltonian(const std::vector<Bond>& bonds,
                                              const FockBasis& basis,
                                              const ParameterSet& params) {
    const int n_sites = basis.n_sites();
    if (params.J.size() != bonds.size()) {
        throw ConfigError("hamiltonian: expected one J per bond (" + std::to_string(bonds.size()) +
                          "), got " + std::to_string(params.J.size()));
    }
    if (params.U.size() != static_cast<std::size_t>(n_sites) ||
        params.mu.size() != static_cast<std::size_t>(n_sites)) {
        throw ConfigError("hamiltonian: need one U and one mu per site");
    }
    for (std::size_t b = 0; b < bonds.size(); ++b) {
        if (bonds[b].a < 1 || bonds[b].b < 1 || bonds[b].a > n_sites || bonds[b].b > n_sites ||
            bonds[b].a == bonds[b].b) {
            throw ConfigError("hamiltonian: bond " + std::to_string(b) + " has invalid sites");
        }
    }

    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(basis.dimension() * (bonds.size() * 2 + 1));

    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        const FockState& s = basis.state(k);
        double diag = 0.0;
        for (int i = 0; i < n_sites; ++i) {
            double n = s[static_cast<std::size_t>(i)];
            diag += 0.5 * params.U[static_cast<std::size_t>(i)] * n * (n - 1.0) -
                    params.mu[static_cast<std::size_t>(i)] * n;
        }
        triplets.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), diag);

        for (std::size_t b = 0; b < bonds.size(); ++b) {
            double Jb = params.J[b];
            // a†_b a_a and a†_a a_b
            for (auto [from, to] : {std::pair{bonds[b].a, bonds[b].b},
                                    std::pair{bonds[b].b, bonds[b].a}}) {
                if (auto hop = hop_element(s, from, to)) {
                    std::size_t m = basis.index_of(hop->first);
                    triplets.emplace_back(static_cast<Eigen::Index>(m),
                                          static_cast<Eigen::Index>(k), -Jb * hop->second);
                }
            }
        }
    }

    Eigen::SparseMatrix<double> H(dim, dim);
    H.setFromTriplets(triplets.begin(), triplets.end());
    return H;
}

Eigen::SparseMatrix<double> build_hamiltonian(const LatticeGeometry& geometry,
                                              const FockBasis& basis,
                                              const ParameterSet& params) {
    validate_parameters(geometry, params);
    if (basis.n_sites() != geometry.n_sites()) {
        throw ConfigError("hamiltonian: basis has " + std::to_string(basis.n_sites()) +
                          " sites, geometry has " + std::to_string(geometry.n_sites()));
    }
    return build_hamiltonian(geometry.bonds(), basis, params);
}

}  // namespace bhtomo
