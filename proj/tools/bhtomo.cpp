// bhtomo - command-line front end for the Bose-Hubbard Hamiltonian-learning
// pipeline: quench simulation, snapshot sampling, correlator features,
// network training/estimation, Bayesian grid estimation, window scaling and
// the figure-reproduction sweeps.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "bhtomo/bayes.hpp"
#include "bhtomo/config.hpp"
#include "bhtomo/errors.hpp"
#include "bhtomo/experiments.hpp"
#include "bhtomo/io.hpp"
#include "bhtomo/scaling.hpp"

namespace {

using namespace bhtomo;
namespace fs = std::filesystem;

// exit codes, sysexits-style
constexpr int kExitOk = 0;
constexpr int kExitUsage = 64;
constexpr int kExitConfig = 65;
constexpr int kExitNumeric = 70;
constexpr int kExitIo = 74;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    double scale = 0.0;
};

RunConfig load_config(const GlobalOptions& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) cfg = parse_config(opts.config_path);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (opts.scale > 0) cfg.scale = opts.scale;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (const char* env = std::getenv("BHTOMO_OUT_DIR"); env != nullptr && opts.out_dir.empty()) {
        cfg.out_dir = env;
    }
    if (const char* env = std::getenv("BHTOMO_THREADS"); env != nullptr && opts.threads < 0) {
        cfg.threads = std::stoi(env);
    }
    cfg.validate();
    return cfg;
}

struct System {
    LatticeGeometry geometry;
    FockBasis basis;
    PriorBox prior;
    QuenchConfig quench;

    explicit System(const RunConfig& cfg)
        : geometry(build_geometry(cfg.rows, cfg.cols)),
          basis(cfg.atoms, geometry.n_sites()),
          prior(cfg.prior(geometry)),
          quench(cfg.quench_config(geometry)) {}
};

void log_progress(const std::string& msg) {
    std::cerr << "[bhtomo] " << msg << "\n";
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

void write_resolved_config(const RunConfig& cfg) {
    write_config(out_path(cfg, "resolved_config.ini"), cfg);
    std::ofstream digest(out_path(cfg, "config.digest"));
    digest << cfg.digest() << "\n";
}

ParameterSet params_for_run(const System& sys, const RunConfig& cfg,
                            const std::string& params_path) {
    if (!params_path.empty()) return read_parameter_set(params_path, sys.geometry);
    SplitMix64 rng(cfg.seed);
    return sample_parameters(sys.prior, rng);
}

int cmd_simulate(const RunConfig& cfg, const std::string& params_path) {
    System sys(cfg);
    ParameterSet params = params_for_run(sys, cfg, params_path);
    auto H = build_hamiltonian(sys.geometry, sys.basis, params);
    auto p = outcome_distribution(evolve(H, sys.basis, sys.quench));

    write_resolved_config(cfg);
    write_parameter_set(out_path(cfg, "params.csv"), sys.geometry, params);
    std::string body = "# bhtomo-distribution,v1\n";
    body += "# dimension," + std::to_string(p.size()) + "\n";
    body += "state,probability\n";
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        const FockState& s = sys.basis.state(static_cast<std::size_t>(k));
        std::string row;
        for (std::size_t i = 0; i < s.size(); ++i) row += (i ? ";" : "") + std::to_string(s[i]);
        body += row + "," + format_double(p(k)) + "\n";
    }
    std::ofstream out(out_path(cfg, "distribution.csv"), std::ios::binary);
    out << body;
    std::cout << "evolved 2x" << cfg.cols << " system, T=" << cfg.evolution_time
              << "; distribution written to " << (fs::path(cfg.out_dir) / "distribution.csv")
              << "\n";
    return kExitOk;
}

int cmd_sample(const RunConfig& cfg, const std::string& params_path) {
    System sys(cfg);
    ParameterSet params = params_for_run(sys, cfg, params_path);
    auto H = build_hamiltonian(sys.geometry, sys.basis, params);
    auto p = outcome_distribution(evolve(H, sys.basis, sys.quench));
    auto shots = sample_snapshots(p, sys.basis, cfg.n_shots,
                                  SplitMix64::derive_stream(cfg.seed, 1));

    write_resolved_config(cfg);
    write_parameter_set(out_path(cfg, "params.csv"), sys.geometry, params);
    write_snapshots(out_path(cfg, "snapshots.csv"), shots);
    std::cout << "sampled " << cfg.n_shots << " snapshots -> "
              << (fs::path(cfg.out_dir) / "snapshots.csv") << "\n";
    return kExitOk;
}

int cmd_features(const RunConfig& cfg, const std::string& shots_path) {
    SnapshotSet shots = read_snapshots(shots_path);
    FeatureSchema schema(shots.n_sites);
    auto feats = features_from_snapshots(schema, shots);
    write_resolved_config(cfg);
    write_features_csv(out_path(cfg, "features.csv"), schema, feats);
    write_feature_schema(out_path(cfg, "feature_schema.csv"), schema);
    std::cout << schema.size() << " correlators -> " << (fs::path(cfg.out_dir) / "features.csv")
              << "\n";
    return kExitOk;
}

int cmd_gen_dataset(const RunConfig& cfg) {
    System sys(cfg);
    DatasetConfig dc;
    dc.prior = sys.prior;
    dc.n_examples = cfg.scaled_examples() + cfg.n_eval;
    dc.n_shots = cfg.n_shots;
    dc.quench = sys.quench;
    dc.seed = cfg.seed;
    dc.exact_features = cfg.exact_features;
    log_progress("generating " + std::to_string(dc.n_examples) + " examples");
    Dataset ds = generate_dataset(sys.geometry, sys.basis, dc, cfg.effective_threads());
    write_resolved_config(cfg);
    write_dataset(out_path(cfg, "dataset.csv"), ds);
    std::cout << "dataset with " << ds.features.rows() << " examples -> "
              << (fs::path(cfg.out_dir) / "dataset.csv") << "\n";
    return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
    write_resolved_config(cfg);
    EstimatorSuite suite = ensure_suite(fs::path(cfg.out_dir) / "suites", cfg, log_progress);
    std::cout << "suite ready: " << suite.models.size() << " models, digest "
              << suite.meta.digest() << "\n";
    for (std::size_t m = 0; m < suite.failures.size(); ++m) {
        if (!suite.failures[m].empty()) {
            std::cerr << "model " << suite.meta.label_names[m]
                      << " diverged: " << suite.failures[m] << "\n";
        }
    }
    return kExitOk;
}

int cmd_estimate_nn(const RunConfig& cfg, const std::string& suite_dir,
                    const std::string& shots_path) {
    EstimatorSuite suite =
        suite_dir.empty() ? ensure_suite(fs::path(cfg.out_dir) / "suites", cfg, log_progress)
                          : load_suite(suite_dir);
    SnapshotSet shots = read_snapshots(shots_path);
    ParameterEstimate est = estimate(suite, shots);

    write_resolved_config(cfg);
    write_estimate(out_path(cfg, "estimate_nn.csv"), est, "nn");
    for (std::size_t i = 0; i < est.names.size(); ++i) {
        std::cout << est.names[i] << "," << format_double(est.values[i]) << "\n";
    }
    return kExitOk;
}

int cmd_estimate_bayes(const RunConfig& cfg, const std::string& shots_path,
                       double budget_seconds) {
    System sys(cfg);
    SnapshotSet shots = read_snapshots(shots_path);

    GroupSchedule schedule = cfg.group_schedule_path.empty()
                                 ? default_group_schedule(sys.geometry)
                                 : read_group_schedule(cfg.group_schedule_path);
    if (cfg.group_schedule_path.empty()) {
        schedule.n_J_candidates = cfg.J_candidates;
        schedule.n_U_candidates = cfg.U_candidates;
        schedule.n_iterations = cfg.bayes_iterations;
    }
    CandidateGrid grid =
        CandidateGrid::from_prior(sys.prior, schedule.n_J_candidates, schedule.n_U_candidates);

    log_progress("factorized estimation: " + std::to_string(schedule.groups.size()) +
                 " groups x " + std::to_string(schedule.n_iterations) + " iterations");
    BayesRunResult result = run_estimation(sys.geometry, sys.basis, shots, grid, schedule,
                                           sys.prior, sys.quench, cfg.effective_threads(),
                                           budget_seconds);
    if (result.aborted_on_budget) {
        std::cerr << "wall-clock budget reached; returning partial estimates\n";
    }

    ParameterEstimate est;
    est.names = canonical_label_names(sys.geometry);
    est.values = canonical_labels(result.final_state.params);
    est.n_shots = static_cast<int>(shots.size());
    est.suite_digest = "bayes-grid";
    write_resolved_config(cfg);
    write_estimate(out_path(cfg, "estimate_bayes.csv"), est, "bayes");

    std::string history = "# bhtomo-bayes-history,v1\niteration,group,max_log_likelihood\n";
    for (const auto& h : result.history) {
        history += std::to_string(h.iteration) + "," + h.group_name + "," +
                   format_double(h.max_log_likelihood) + "\n";
    }
    std::ofstream hist_out(out_path(cfg, "bayes_history.csv"), std::ios::binary);
    hist_out << history;

    for (std::size_t i = 0; i < est.names.size(); ++i) {
        std::cout << est.names[i] << "," << format_double(est.values[i]) << "\n";
    }
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg) {
    System sys(cfg);
    write_resolved_config(cfg);

    ComparisonProtocol protocol;
    protocol.seed = SplitMix64::derive_stream(cfg.seed, 0xc0);
    GroupSchedule schedule = cfg.group_schedule_path.empty()
                                 ? default_group_schedule(sys.geometry)
                                 : read_group_schedule(cfg.group_schedule_path);
    // reduced-scale benchmark: first J group, single sweep
    protocol.schedule.groups = {schedule.groups.front()};
    protocol.schedule.n_iterations = 1;
    protocol.schedule.n_J_candidates = cfg.J_candidates;
    protocol.schedule.n_U_candidates = cfg.U_candidates;

    std::vector<EstimatorSuite> suites;
    for (int n_shots : protocol.snapshot_counts) {
        RunConfig point = cfg;
        point.n_shots = n_shots;
        log_progress("suite for " + std::to_string(n_shots) + " snapshots");
        suites.push_back(ensure_suite(fs::path(cfg.out_dir) / "suites", point, log_progress));
    }
    std::vector<const EstimatorSuite*> suite_ptrs;
    for (const auto& s : suites) suite_ptrs.push_back(&s);

    log_progress("running comparison protocol (" + std::to_string(protocol.n_sets) + " sets)");
    ComparisonResult result = compare_estimators(sys.geometry, sys.basis, suite_ptrs, sys.prior,
                                                 sys.quench, protocol, cfg.effective_threads());
    report_comparison(result, cfg.out_dir);
    for (const auto& pc : result.per_count) {
        std::cout << pc.n_shots << " snapshots: std(nn) = " << format_double(pc.nn_std)
                  << ", std(bayes) = " << format_double(pc.bayes_std) << "\n";
    }
    return kExitOk;
}

int cmd_scale_plan(const RunConfig& cfg) {
    WindowPlan plan = plan_windows(cfg.scale_cols);
    std::string body = "# bhtomo-window-plan,v1\n";
    body += "# M," + std::to_string(plan.M) + "\n";
    body += "# window_width," + std::to_string(plan.window_width) + "\n";
    body += "configuration,cuts,windows\n";
    for (std::size_t c = 0; c < plan.configs.size(); ++c) {
        std::string cuts, windows;
        for (std::size_t i = 0; i < plan.configs[c].cuts.size(); ++i) {
            cuts += (i ? ";" : "") + std::to_string(plan.configs[c].cuts[i]);
        }
        for (std::size_t w = 0; w < plan.configs[c].windows.size(); ++w) {
            const auto& win = plan.configs[c].windows[w];
            windows += (w ? ";" : "") + std::to_string(win.first_col) + "-" +
                       std::to_string(win.last_col);
        }
        body += std::to_string(c) + "," + cuts + "," + windows + "\n";
    }
    write_resolved_config(cfg);
    std::ofstream out(out_path(cfg, "window_plan.csv"), std::ios::binary);
    out << body;
    std::cout << body;
    return kExitOk;
}

int cmd_scale_run(const RunConfig& cfg, const std::string& suite_dir) {
    // full pipeline on a 2xM lattice: simulate all boundary configurations,
    // estimate every full window with the 2x4 suite, merge
    RunConfig frame_cfg = cfg;
    frame_cfg.cols = 4;
    frame_cfg.atoms = 4;
    System frame(frame_cfg);
    EstimatorSuite suite =
        suite_dir.empty()
            ? ensure_suite(fs::path(cfg.out_dir) / "suites", frame_cfg, log_progress)
            : load_suite(suite_dir);

    LatticeGeometry full = build_geometry(2, cfg.scale_cols);
    SplitMix64 rng(SplitMix64::derive_stream(cfg.seed, 0x5ca1e));
    PriorBox full_prior = cfg.prior(full);
    ParameterSet truth = sample_parameters(full_prior, rng);
    WindowPlan plan = plan_windows(cfg.scale_cols);

    std::vector<WindowEstimate> estimates;
    for (int c = 0; c < static_cast<int>(plan.configs.size()); ++c) {
        log_progress("boundary configuration " + std::to_string(c));
        auto parts = simulate_partitioned(full, truth, plan, c, cfg.n_shots,
                                          cfg.evolution_time, rng.next_u64(),
                                          cfg.boundary_perturbation);
        write_snapshots(out_path(cfg, "snapshots_config" + std::to_string(c) + ".csv"),
                        parts.full);
        const auto& windows = plan.configs[static_cast<std::size_t>(c)].windows;
        for (int w = 0; w < static_cast<int>(windows.size()); ++w) {
            if (!windows[static_cast<std::size_t>(w)].full_width) continue;
            estimates.push_back(
                {c, w, estimate(suite, parts.per_window[static_cast<std::size_t>(w)])});
        }
    }

    MergedEstimate merged = merge_estimates(estimates, plan, full, cfg.mu_center);
    write_resolved_config(cfg);
    write_parameter_set(out_path(cfg, "merged_params.csv"), full, merged.params);
    write_parameter_set(out_path(cfg, "true_params.csv"), full, truth);

    std::string prov = "# bhtomo-provenance,v1\nparameter,configuration,window,boundary_distance\n";
    for (std::size_t b = 0; b < merged.J_provenance.size(); ++b) {
        const auto& p = merged.J_provenance[b];
        prov += full.bond_name(static_cast<int>(b)) + "," + std::to_string(p.config_index) + "," +
                std::to_string(p.window_index) + "," + std::to_string(p.boundary_distance) + "\n";
    }
    for (std::size_t s = 0; s < merged.U_provenance.size(); ++s) {
        const auto& p = merged.U_provenance[s];
        prov += "U" + std::to_string(s + 1) + "," + std::to_string(p.config_index) + "," +
                std::to_string(p.window_index) + "," + std::to_string(p.boundary_distance) + "\n";
    }
    for (std::size_t s = 0; s < merged.mu_provenance.size(); ++s) {
        const auto& p = merged.mu_provenance[s];
        prov += "mu" + std::to_string(s + 1) + "," + std::to_string(p.config_index) + "," +
                std::to_string(p.window_index) + "," + std::to_string(p.boundary_distance) + "\n";
    }
    std::ofstream prov_out(out_path(cfg, "provenance.csv"), std::ios::binary);
    prov_out << prov;

    double max_J_err = 0, max_U_err = 0;
    for (std::size_t b = 0; b < truth.J.size(); ++b) {
        max_J_err = std::max(max_J_err, std::abs(truth.J[b] - merged.params.J[b]));
    }
    for (std::size_t s = 0; s < truth.U.size(); ++s) {
        max_U_err = std::max(max_U_err, std::abs(truth.U[s] - merged.params.U[s]));
    }
    std::cout << "2x" << cfg.scale_cols << " lattice covered with 4 x " << cfg.n_shots
              << " snapshots; max |dJ| = " << format_double(max_J_err)
              << ", max |dU| = " << format_double(max_U_err) << "\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis, std::vector<double> values) {
    SweepConfig sweep;
    sweep.base = cfg;
    if (axis == "snapshots") {
        sweep.axis = SweepConfig::Axis::Snapshots;
    } else if (axis == "prior-width") {
        sweep.axis = SweepConfig::Axis::PriorWidth;
    } else if (axis == "interaction-ratio") {
        sweep.axis = SweepConfig::Axis::InteractionRatio;
    } else {
        throw UsageError("unknown sweep axis '" + axis +
                         "' (snapshots | prior-width | interaction-ratio)");
    }
    sweep.values = values.empty() ? SweepConfig::default_values(sweep.axis) : values;

    write_resolved_config(cfg);
    SweepResult result = run_sweep(sweep, cfg.out_dir, log_progress);
    report_sweep(result, cfg.out_dir);
    std::cout << sweep.axis_name()
              << ",mean_abs_J,mean_abs_U,mean_abs_mu\n";
    for (const auto& p : result.points) {
        std::cout << format_double(p.value) << "," << format_double(p.report.mean_abs_J) << ","
                  << format_double(p.report.mean_abs_U) << ","
                  << format_double(p.report.mean_abs_mu) << "\n";
    }
    return kExitOk;
}

int cmd_report(const RunConfig& cfg, const std::string& in_dir) {
    // regenerate sweep.csv / sweep.svg from checkpointed point reports
    fs::path dir = in_dir.empty() ? fs::path(cfg.out_dir) : fs::path(in_dir);
    SweepResult result;
    result.axis = SweepConfig::Axis::Snapshots;
    std::vector<std::pair<double, ErrorReport>> points;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        auto name = entry.path().filename().string();
        auto underscore = name.rfind('_');
        if (underscore == std::string::npos) continue;
        auto report_path = entry.path() / "report.csv";
        if (!fs::exists(report_path)) continue;
        std::string value_str = name.substr(underscore + 1);
        std::replace(value_str.begin(), value_str.end(), 'p', '.');
        try {
            points.emplace_back(std::stod(value_str), read_error_report(report_path));
            result.axis_name = name.substr(0, underscore);
        } catch (...) {
            continue;
        }
    }
    if (points.empty()) throw IoError("no checkpointed reports under " + dir.string());
    std::sort(points.begin(), points.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [value, report] : points) {
        SweepPoint p;
        p.value = value;
        p.report = std::move(report);
        p.from_checkpoint = true;
        result.points.push_back(std::move(p));
    }
    report_sweep(result, dir);
    std::cout << "report rebuilt from " << result.points.size() << " checkpointed points -> "
              << (dir / "sweep.csv") << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bose-Hubbard Hamiltonian learning from quench snapshots"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags are accepted after the subcommand

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "run configuration file (ini)");
    app.add_option("--out", opts.out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", opts.seed, "master seed (overrides config)");
    app.add_option("--threads", opts.threads, "worker threads, 0 = hardware");
    app.add_option("--scale", opts.scale, "desk-scale factor for examples/steps/test sets");

    std::string params_path, shots_path, suite_dir, axis = "snapshots", in_dir;
    std::vector<double> sweep_values;
    double bayes_budget = 0.0;

    auto* simulate = app.add_subcommand("simulate", "evolve and write the outcome distribution");
    simulate->add_option("--params", params_path, "parameter file (default: sample from prior)");
    auto* sample = app.add_subcommand("sample", "simulate and write measurement snapshots");
    sample->add_option("--params", params_path, "parameter file (default: sample from prior)");
    auto* features = app.add_subcommand("features", "compress snapshots into correlators");
    features->add_option("--shots", shots_path, "snapshot file")->required();
    app.add_subcommand("gen-dataset", "generate a labeled training dataset");
    app.add_subcommand("train", "train (or resume) the per-parameter estimator suite");
    auto* est_nn = app.add_subcommand("estimate-nn", "estimate all parameters with the suite");
    est_nn->add_option("--suite", suite_dir, "suite directory (default: train/load per config)");
    est_nn->add_option("--shots", shots_path, "snapshot file")->required();
    auto* est_bayes = app.add_subcommand("estimate-bayes", "factorized Bayesian grid estimation");
    est_bayes->add_option("--shots", shots_path, "snapshot file")->required();
    est_bayes->add_option("--budget", bayes_budget, "wall-clock budget in seconds (0 = none)");
    app.add_subcommand("compare", "error comparison: networks vs Bayesian benchmark");
    app.add_subcommand("scale-plan", "print the 4-configuration window plan");
    auto* scale_run = app.add_subcommand("scale-run", "cover a 2xM lattice with shifted windows");
    scale_run->add_option("--suite", suite_dir, "2x4 suite directory (default: per config)");
    auto* sweep = app.add_subcommand("sweep", "error sweeps over snapshots/prior/interaction");
    sweep->add_option("--axis", axis, "snapshots | prior-width | interaction-ratio");
    sweep->add_option("--values", sweep_values, "explicit axis values");
    auto* report = app.add_subcommand("report", "rebuild CSV/SVG from checkpointed results");
    report->add_option("--in", in_dir, "results directory (default: --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        opts.seed_set = seed_opt->count() > 0;
        RunConfig cfg = load_config(opts);

        if (simulate->parsed()) return cmd_simulate(cfg, params_path);
        if (sample->parsed()) return cmd_sample(cfg, params_path);
        if (features->parsed()) return cmd_features(cfg, shots_path);
        if (app.get_subcommand("gen-dataset")->parsed()) return cmd_gen_dataset(cfg);
        if (app.get_subcommand("train")->parsed()) return cmd_train(cfg);
        if (est_nn->parsed()) return cmd_estimate_nn(cfg, suite_dir, shots_path);
        if (est_bayes->parsed()) return cmd_estimate_bayes(cfg, shots_path, bayes_budget);
        if (app.get_subcommand("compare")->parsed()) return cmd_compare(cfg);
        if (app.get_subcommand("scale-plan")->parsed()) return cmd_scale_plan(cfg);
        if (scale_run->parsed()) return cmd_scale_run(cfg, suite_dir);
        if (sweep->parsed()) return cmd_sweep(cfg, axis, sweep_values);
        if (report->parsed()) return cmd_report(cfg, in_dir);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
