#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bhtomo/bayes.hpp"
#include "bhtomo/dynamics.hpp"
#include "bhtomo/hamiltonian.hpp"
#include "bhtomo/mlp.hpp"
#include "bhtomo/nn_estimator.hpp"

namespace bhtomo {

// Every artifact file is self-describing (format tag + version), carries its
// provenance in `#` header lines, and ends with a checksum over the
// preceding bytes. Readers verify the checksum and version and fail loudly
// on mismatch or truncation. Round-trips are lossless (doubles are printed
// with 17 significant digits; model weights are stored as raw 64-bit floats).

std::string format_double(double v);
double parse_double(const std::string& s);

void write_snapshots(const std::filesystem::path& path, const SnapshotSet& shots);
SnapshotSet read_snapshots(const std::filesystem::path& path);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

// Binary model file: header (magic, version, layer sizes, activation,
// training digest), row-major weights and biases as little-endian 64-bit
// floats, trailing checksum.
void write_model(const std::filesystem::path& path, const MlpModel& model,
                 const std::string& training_digest);
std::pair<MlpModel, std::string> read_model(const std::filesystem::path& path);

// Suite directory: manifest.txt with metadata and per-model checksums,
// model_XX.bhm files, training_log.csv with loss histories.
void save_suite(const std::filesystem::path& dir, const EstimatorSuite& suite);
EstimatorSuite load_suite(const std::filesystem::path& dir);

void write_estimate(const std::filesystem::path& path, const ParameterEstimate& estimate,
                    const std::string& method);
ParameterEstimate read_estimate(const std::filesystem::path& path);

// Flat record in canonical order: J per bond, U per site, mu per site.
void write_parameter_set(const std::filesystem::path& path, const LatticeGeometry& geometry,
                         const ParameterSet& params);
ParameterSet read_parameter_set(const std::filesystem::path& path,
                                const LatticeGeometry& geometry);

void write_group_schedule(const std::filesystem::path& path, const GroupSchedule& schedule);
GroupSchedule read_group_schedule(const std::filesystem::path& path);

// Sidecar listing the index tuple of every feature column.
void write_feature_schema(const std::filesystem::path& path, const FeatureSchema& schema);

void write_features_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                        const CorrelatorVector& features);

}  // namespace bhtomo
