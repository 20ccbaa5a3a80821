#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "bhtomo/dynamics.hpp"
#include "bhtomo/hamiltonian.hpp"
#include "bhtomo/mlp.hpp"

namespace bhtomo {

// Aggregated run configuration with the reference experiment as defaults
// (2x4 ladder, 4 atoms, T = 200, prior 1% intervals, eta = 1e-5, batch 50).
// Parsing is fail-loud: unknown sections or keys are configuration errors.
struct RunConfig {
    // [lattice]
    int rows = 2;
    int cols = 4;
    // [system]
    int atoms = 4;
    // [quench]
    double evolution_time = 200.0;
    std::string initial_state = "checkerboard";  // or explicit "1,0,1,0,..."
    // [prior]
    double J_center = 1.0, J_half_width = 0.005;
    double U_center = 2.0, U_half_width = 0.01;
    double mu_center = 1.0, mu_half_width = 0.005;
    // [snapshots]
    int n_shots = 2500;
    // [training]
    int n_examples = 150500;
    int n_eval = 500;
    int n_test_sets = 500;
    double learning_rate = 1e-5;
    int batch_size = 50;
    long n_steps = 2'100'000;
    std::string optimizer = "adam";
    std::string activation = "relu";
    double final_lr_fraction = 1.0;
    bool keep_best_eval = false;
    bool exact_features = false;
    bool standardize_features = false;  // experimental, off by default
    // [bayes]
    int J_candidates = 13;
    int U_candidates = 21;
    int bayes_iterations = 5;
    std::string group_schedule_path;  // empty = built-in default grouping
    // [scaling]
    int scale_cols = 8;  // M of the extended 2xM lattice
    double boundary_perturbation = 0.0;
    // [run]
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    std::string out_dir = "out";
    double scale = 1.0;  // desk-scale factor for sweeps

    void validate() const;
    std::string digest() const;

    QuenchConfig quench_config(const LatticeGeometry& geometry) const;
    PriorBox prior(const LatticeGeometry& geometry) const;
    TrainingConfig training_config() const;
    int effective_threads() const;

    // desk-scale helpers: shrink example counts, steps and test sets together
    int scaled_examples() const;
    long scaled_steps() const;
    int scaled_test_sets() const;
};

RunConfig parse_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const RunConfig& config);
std::string config_to_string(const RunConfig& config);

}  // namespace bhtomo
