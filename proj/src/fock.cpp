#include "bhtomo/fock.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bhtomo/errors.hpp"

namespace bhtomo {

std::size_t fock_dimension(int n_atoms, int n_sites) {
    // C(n_atoms + n_sites - 1, n_atoms), saturating on overflow.
    std::size_t result = 1;
    for (int k = 1; k <= n_atoms; ++k) {
        std::size_t num = static_cast<std::size_t>(n_sites - 1 + k);
        if (result > std::numeric_limits<std::size_t>::max() / num) {
            return std::numeric_limits<std::size_t>::max();
        }
        result = result * num / static_cast<std::size_t>(k);
    }
    return result;
}

FockBasis::FockBasis(int n_atoms, int n_sites, std::size_t dim_cap)
    : n_atoms_(n_atoms), n_sites_(n_sites) {
    if (n_atoms < 0) throw ConfigError("fock: n_atoms must be >= 0");
    if (n_sites < 1) throw ConfigError("fock: n_sites must be >= 1");
    std::size_t dim = fock_dimension(n_atoms, n_sites);
    if (dim > dim_cap) {
        throw ConfigError("fock: basis dimension " + std::to_string(dim) +
                          " exceeds cap " + std::to_string(dim_cap));
    }
    states_.reserve(dim);

    // Descending-lexicographic enumeration: site occupations chosen from the
    // remaining atom count downwards, left site first.
    FockState current(static_cast<std::size_t>(n_sites), 0);
    auto recurse = [&](auto&& self, int site, int remaining) -> void {
        if (site == n_sites - 1) {
            current[static_cast<std::size_t>(site)] = remaining;
            states_.push_back(current);
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            current[static_cast<std::size_t>(site)] = n;
            self(self, site + 1, remaining - n);
        }
    };
    recurse(recurse, 0, n_atoms);

    index_.reserve(states_.size() * 2);
    for (std::size_t k = 0; k < states_.size(); ++k) index_.emplace(states_[k], k);
}

std::size_t FockBasis::index_of(const FockState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw ConfigError("fock: state not in basis");
    return it->second;
}

std::optional<std::size_t> FockBasis::find(const FockState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::pair<FockState, double>> hop_element(const FockState& s, int from, int to) {
    if (from == to || from < 1 || to < 1 || from > static_cast<int>(s.size()) ||
        to > static_cast<int>(s.size())) {
        throw ConfigError("fock: invalid hop sites (" + std::to_string(from) + "," +
                          std::to_string(to) + ")");
    }
    int n_from = s[static_cast<std::size_t>(from - 1)];
    if (n_from == 0) return std::nullopt;
    FockState t = s;
    --t[static_cast<std::size_t>(from - 1)];
    int n_to = t[static_cast<std::size_t>(to - 1)];
    ++t[static_cast<std::size_t>(to - 1)];
    double amp = std::sqrt(static_cast<double>(n_from)) * std::sqrt(static_cast<double>(n_to + 1));
    return std::make_pair(std::move(t), amp);
}

FockBasis enumerate_basis(int n_atoms, int n_sites, std::size_t dim_cap) {
    return FockBasis(n_atoms, n_sites, dim_cap);
}

}  // namespace bhtomo
