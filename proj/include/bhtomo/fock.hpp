#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bhtomo {

// Occupation-number configuration, one entry per site.
using FockState = std::vector<int>;

struct FockStateHash {
    std::size_t operator()(const FockState& s) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (int n : s) {
            h ^= static_cast<std::uint64_t>(n) + 0x9e3779b97f4a7c15ull;
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Fixed-particle-number bosonic basis with deterministic ordering:
// lexicographically descending in (n_1, n_2, ...). Immutable; shareable
// across threads.
class FockBasis {
public:
    // Throws ConfigError if the stars-and-bars dimension exceeds dim_cap.
    FockBasis(int n_atoms, int n_sites, std::size_t dim_cap = 1'000'000);

    int n_atoms() const { return n_atoms_; }
    int n_sites() const { return n_sites_; }
    std::size_t dimension() const { return states_.size(); }

    const std::vector<FockState>& states() const { return states_; }
    const FockState& state(std::size_t k) const { return states_[k]; }

    // Basis index of a state; throws ConfigError for states outside the basis.
    std::size_t index_of(const FockState& s) const;
    std::optional<std::size_t> find(const FockState& s) const;

private:
    int n_atoms_;
    int n_sites_;
    std::vector<FockState> states_;
    std::unordered_map<FockState, std::size_t, FockStateHash> index_;
};

// C(n_atoms + n_sites - 1, n_atoms) with overflow saturation to SIZE_MAX.
std::size_t fock_dimension(int n_atoms, int n_sites);

// Matrix element of a†_to a_from: moves one atom and returns the target state
// with amplitude sqrt(n_from) * sqrt(n_to + 1). Empty source site -> nullopt.
// Sites are 1-based.
std::optional<std::pair<FockState, double>> hop_element(const FockState& s, int from, int to);

FockBasis enumerate_basis(int n_atoms, int n_sites, std::size_t dim_cap = 1'000'000);

}  // namespace bhtomo
