#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bhtomo/bayes.hpp"
#include "bhtomo/config.hpp"
#include "bhtomo/nn_estimator.hpp"

namespace bhtomo {

using ProgressFn = std::function<void(const std::string&)>;

// Trains (or loads) the estimator suite determined by the configuration,
// cached under cache_dir keyed by the generation + training digest. Datasets
// and finished models are checkpointed as they complete, so an interrupted
// run resumes where it stopped and a re-run with the same digest is a no-op.
EstimatorSuite ensure_suite(const std::filesystem::path& cache_dir, const RunConfig& config,
                            const ProgressFn& progress = {});

// Same, with explicit overrides for the per-point sweep knobs.
struct SuiteSpec {
    RunConfig config;           // base; n_shots/prior/steps read from here
    std::string tag;            // human-readable cache tag ("N2500", "U70", ...)
};
EstimatorSuite ensure_suite(const std::filesystem::path& cache_dir, const SuiteSpec& spec,
                            const ProgressFn& progress = {});

struct SweepConfig {
    enum class Axis { Snapshots, PriorWidth, InteractionRatio };
    Axis axis = Axis::Snapshots;
    std::vector<double> values;  // snapshot counts, precision percent, or U_mean
    RunConfig base;

    static std::vector<double> default_values(Axis axis);
    std::string axis_name() const;
};

struct SweepPoint {
    double value = 0;
    ErrorReport report;
    bool from_checkpoint = false;
};

struct SweepResult {
    SweepConfig::Axis axis;
    std::string axis_name;
    std::vector<SweepPoint> points;
};

// Per-point protocol: build/load the suite for the point's configuration,
// evaluate on freshly simulated test sets, checkpoint the error report.
// Completed points are skipped when the config digest matches.
SweepResult run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_dir,
                      const ProgressFn& progress = {});

// Error-report persistence (full error matrix, so reloads are lossless).
void write_error_report(const std::filesystem::path& path, const ErrorReport& report);
ErrorReport read_error_report(const std::filesystem::path& path);

// Deterministic CSV + SVG artifacts for a finished sweep.
void report_sweep(const SweepResult& result, const std::filesystem::path& out_dir);

// CSV + SVG histograms for the estimator comparison (error distributions of
// the network and the Bayesian benchmark at each snapshot count).
void report_comparison(const ComparisonResult& result, const std::filesystem::path& out_dir);

// Minimal deterministic SVG plotting used by the reports.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};
void svg_line_plot(const std::filesystem::path& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<SvgSeries>& series, bool log_x = false);
void svg_histogram(const std::filesystem::path& path, const std::string& title,
                   const std::vector<double>& samples, int n_bins, double stddev_marker);

}  // namespace bhtomo
