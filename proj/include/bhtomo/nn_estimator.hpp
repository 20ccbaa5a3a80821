#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bhtomo/correlators.hpp"
#include "bhtomo/dynamics.hpp"
#include "bhtomo/hamiltonian.hpp"
#include "bhtomo/mlp.hpp"

namespace bhtomo {

// Generation metadata pinned to datasets and estimator suites; a suite is
// only applied to measurements compatible with it (same lattice, same
// snapshot count, same feature schema).
struct SuiteMetadata {
    int rows = 2;
    int cols = 4;
    int n_atoms = 4;
    int n_shots = 0;  // 0 = exact features
    double evolution_time = 200.0;
    FockState initial_state;
    std::uint64_t seed = 0;
    std::string schema_digest;
    PriorBox prior;
    std::vector<std::string> label_names;
    std::string training_digest;  // empty until trained

    std::string digest() const;
    void check_compatible(const SuiteMetadata& other) const;
};

struct Dataset {
    Eigen::MatrixXd features;  // n_examples x n_features
    Eigen::MatrixXd labels;    // n_examples x n_labels
    SuiteMetadata meta;
    bool exact_features = false;
};

struct DatasetConfig {
    PriorBox prior;
    int n_examples = 0;
    int n_shots = 0;
    QuenchConfig quench;
    std::uint64_t seed = 0;
    bool exact_features = false;  // infinite-snapshot oracle mode
};

// For each example: sample parameters from the prior, build H, evolve,
// sample snapshots, compress to correlators, attach canonical labels.
// Example i owns the derived stream (seed, i); output is byte-identical
// for any thread count.
Dataset generate_dataset(const LatticeGeometry& geometry, const FockBasis& basis,
                         const DatasetConfig& cfg, int n_threads);

struct EstimatorSuite {
    std::vector<MlpModel> models;  // one per label, label order
    SuiteMetadata meta;
    std::vector<TrainReport> reports;
    std::vector<std::string> failures;  // per-model diagnostic, empty = trained OK
};

// Trains one network per label column on a shared feature matrix. The last
// n_eval examples are held out for the evaluation loss. Models train
// independently (in parallel), each single-threaded with a derived seed.
EstimatorSuite train_suite(const Dataset& dataset, const TrainingConfig& cfg, int n_eval,
                           int n_threads);

struct ParameterEstimate {
    std::vector<std::string> names;
    std::vector<double> values;
    int n_shots = 0;
    std::string suite_digest;

    double value_of(const std::string& name) const;
    // Reassemble a ParameterSet; mu_1 is not observable and is set to mu_anchor.
    ParameterSet to_parameter_set(const LatticeGeometry& geometry, double mu_anchor) const;
};

ParameterEstimate estimate(const EstimatorSuite& suite, const SnapshotSet& shots);

struct TestCase {
    SnapshotSet shots;
    ParameterSet truth;
};

std::vector<TestCase> make_test_cases(const LatticeGeometry& geometry, const FockBasis& basis,
                                      const PriorBox& prior, const QuenchConfig& quench,
                                      int n_cases, int n_shots, std::uint64_t seed,
                                      int n_threads);

// Absolute-error statistics over a test set, pooled per parameter family
// (means as in |X_pred - X_label| averaged over family members and cases)
// and spatially resolved per parameter. The midpoint baseline predicts the
// prior center for every parameter.
struct ErrorReport {
    std::vector<std::string> label_names;
    Eigen::MatrixXd errors;  // n_cases x n_labels, signed (estimate - truth)

    // family order: J, U, mu_diff
    double mean_abs_J = 0, mean_abs_U = 0, mean_abs_mu = 0;
    double std_abs_J = 0, std_abs_U = 0, std_abs_mu = 0;
    double baseline_J = 0, baseline_U = 0, baseline_mu = 0;  // midpoint guess
    std::vector<double> per_label_mean_abs;
    int n_cases = 0;
};

ErrorReport evaluate_suite(const EstimatorSuite& suite, const std::vector<TestCase>& cases);

// Same error statistics for an arbitrary estimator (used for baselines and
// method comparisons): estimates[i] must align with cases[i].
ErrorReport evaluate_estimates(const std::vector<std::string>& label_names,
                               const std::vector<std::vector<double>>& estimates,
                               const std::vector<TestCase>& cases);

}  // namespace bhtomo
