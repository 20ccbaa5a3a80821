#include "bhtomo/correlators.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"

namespace bhtomo {

namespace {

void append_combinations(int n_sites, int order, std::vector<std::vector<int>>& out) {
    std::vector<int> combo(static_cast<std::size_t>(order));
    auto recurse = [&](auto&& self, int pos, int start) -> void {
        if (pos == order) {
            out.push_back(combo);
            return;
        }
        for (int i = start; i < n_sites; ++i) {
            combo[static_cast<std::size_t>(pos)] = i;
            self(self, pos + 1, i + 1);
        }
    };
    recurse(recurse, 0, 0);
}

}  // namespace

FeatureSchema::FeatureSchema(int n_sites) : n_sites_(n_sites) {
    if (n_sites < 1) throw ConfigError("correlators: need at least one site");
    for (int order = 1; order <= 4 && order <= n_sites; ++order) {
        append_combinations(n_sites, order, tuples_);
    }
}

void FeatureSchema::fill_products(const FockState& s, double weight,
                                  Eigen::Ref<Eigen::VectorXd> out) const {
    if (s.size() != static_cast<std::size_t>(n_sites_)) {
        throw ConfigError("correlators: state has wrong site count");
    }
    Eigen::Index col = 0;
    for (const auto& tuple : tuples_) {
        double prod = 1.0;
        for (int i : tuple) prod *= static_cast<double>(s[static_cast<std::size_t>(i)]);
        out(col++) += weight * prod;
    }
    for (int i = 0; i < n_sites_; ++i) {
        double n = static_cast<double>(s[static_cast<std::size_t>(i)]);
        out(col++) += weight * n * (n - 1.0);
    }
}

std::vector<std::string> FeatureSchema::column_names() const {
    std::vector<std::string> names;
    names.reserve(size());
    for (const auto& tuple : tuples_) {
        std::string name;
        for (int i : tuple) name += "n" + std::to_string(i + 1);
        names.push_back(name);
    }
    for (int i = 1; i <= n_sites_; ++i) {
        names.push_back("n" + std::to_string(i) + "(n" + std::to_string(i) + "-1)");
    }
    return names;
}

std::string FeatureSchema::digest() const {
    Fnv1a64 h;
    for (const auto& name : column_names()) {
        h.update(name);
        h.update(";", 1);
    }
    return h.hex();
}

FeatureTable::FeatureTable(const FeatureSchema& schema, const FockBasis& basis) {
    table_.setZero(static_cast<Eigen::Index>(schema.size()),
                   static_cast<Eigen::Index>(basis.dimension()));
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        schema.fill_products(basis.state(k), 1.0, table_.col(static_cast<Eigen::Index>(k)));
    }
}

CorrelatorVector FeatureTable::from_probabilities(const Eigen::VectorXd& p) const {
    if (p.size() != table_.cols()) throw ConfigError("correlators: vector/basis size mismatch");
    return table_ * p;
}

CorrelatorVector FeatureTable::from_histogram(const Eigen::VectorXd& counts) const {
    double total = counts.sum();
    if (total <= 0) throw ConfigError("correlators: empty histogram");
    return (table_ * counts) / total;
}

CorrelatorVector features_from_snapshots(const FeatureSchema& schema, const SnapshotSet& shots) {
    if (shots.snapshots.empty()) throw ConfigError("correlators: empty snapshot set");
    // Aggregate identical snapshots first; there are far fewer distinct
    // configurations than shots. Accumulation runs in sorted state order so
    // the result is bit-identical under any permutation of the input.
    std::unordered_map<FockState, double, FockStateHash> weights;
    for (const FockState& s : shots.snapshots) weights[s] += 1.0;
    std::vector<std::pair<FockState, double>> sorted(weights.begin(), weights.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    CorrelatorVector out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.size()));
    const double inv = 1.0 / static_cast<double>(shots.snapshots.size());
    for (const auto& [state, count] : sorted) {
        schema.fill_products(state, count * inv, out);
    }
    return out;
}

CorrelatorVector features_exact(const FeatureSchema& schema, const FockBasis& basis,
                                const Eigen::VectorXd& p) {
    if (p.size() != static_cast<Eigen::Index>(basis.dimension())) {
        throw ConfigError("correlators: probability vector does not match basis");
    }
    CorrelatorVector out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.size()));
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
        schema.fill_products(basis.state(k), p(static_cast<Eigen::Index>(k)), out);
    }
    return out;
}

}  // namespace bhtomo
