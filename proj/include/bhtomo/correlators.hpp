#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bhtomo/dynamics.hpp"
#include "bhtomo/fock.hpp"

namespace bhtomo {

using CorrelatorVector = Eigen::VectorXd;

// Canonical density-correlator layout for s sites:
//   <n_i>                        s entries
//   <n_i n_j>        i<j         C(s,2)
//   <n_i n_j n_k>    i<j<k       C(s,3)
//   <n_i n_j n_k n_l> i<j<k<l    C(s,4)
//   <n_i (n_i - 1)>              s
// Index tuples run lexicographically; 170 features at s = 8.
class FeatureSchema {
public:
    explicit FeatureSchema(int n_sites);

    int n_sites() const { return n_sites_; }
    std::size_t size() const { return tuples_.size() + static_cast<std::size_t>(n_sites_); }

    // Product of occupations for one configuration, in canonical order.
    void fill_products(const FockState& s, double weight, Eigen::Ref<Eigen::VectorXd> out) const;

    std::vector<std::string> column_names() const;
    std::string digest() const;  // hash of the canonical column-name list

private:
    int n_sites_;
    std::vector<std::vector<int>> tuples_;  // 0-based site indices, sizes 1..4
};

// Per-basis-state feature products; makes exact features a matrix-vector
// product and sampled features a weighted histogram sum.
class FeatureTable {
public:
    FeatureTable(const FeatureSchema& schema, const FockBasis& basis);

    // rows = features, cols = basis states
    const Eigen::MatrixXd& table() const { return table_; }

    CorrelatorVector from_probabilities(const Eigen::VectorXd& p) const;
    CorrelatorVector from_histogram(const Eigen::VectorXd& counts) const;

private:
    Eigen::MatrixXd table_;
};

// Sample mean of occupation products over all snapshots. Empty set -> ConfigError.
CorrelatorVector features_from_snapshots(const FeatureSchema& schema, const SnapshotSet& shots);

// Exact expectations under p: the infinite-snapshot limit of the above.
CorrelatorVector features_exact(const FeatureSchema& schema, const FockBasis& basis,
                                const Eigen::VectorXd& p);

}  // namespace bhtomo
