#include "bhtomo/nn_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"
#include "bhtomo/parallel.hpp"
#include "bhtomo/rng.hpp"

namespace bhtomo {

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (double x : v) os << x << ",";
    return os.str();
}

}  // namespace

std::string SuiteMetadata::digest() const {
    std::ostringstream os;
    os.precision(17);
    os << rows << "x" << cols << ";atoms=" << n_atoms << ";shots=" << n_shots
       << ";T=" << evolution_time << ";seed=" << seed << ";schema=" << schema_digest << ";init=";
    for (int n : initial_state) os << n << ",";
    os << ";prior=" << join_doubles(prior.J_center) << "|" << join_doubles(prior.J_half_width)
       << "|" << join_doubles(prior.U_center) << "|" << join_doubles(prior.U_half_width) << "|"
       << join_doubles(prior.mu_center) << "|" << join_doubles(prior.mu_half_width)
       << ";train=" << training_digest;
    return fnv1a64_hex(os.str());
}

void SuiteMetadata::check_compatible(const SuiteMetadata& other) const {
    if (rows != other.rows || cols != other.cols || n_atoms != other.n_atoms) {
        throw ConfigError("suite: lattice mismatch");
    }
    if (schema_digest != other.schema_digest) {
        throw ConfigError("suite: feature schema mismatch (" + schema_digest + " vs " +
                          other.schema_digest + ")");
    }
    if (n_shots != other.n_shots) {
        throw ConfigError("suite: snapshot count mismatch; suite was built for " +
                          std::to_string(n_shots) + " shots, got " + std::to_string(other.n_shots));
    }
}

Dataset generate_dataset(const LatticeGeometry& geometry, const FockBasis& basis,
                         const DatasetConfig& cfg, int n_threads) {
    if (cfg.n_examples <= 0) throw ConfigError("dataset: n_examples must be > 0");
    if (!cfg.exact_features && cfg.n_shots < 1) {
        throw ConfigError("dataset: n_shots must be >= 1 (or use exact features)");
    }
    cfg.prior.validate(geometry);

    FeatureSchema schema(geometry.n_sites());
    FeatureTable table(schema, basis);
    auto label_names = canonical_label_names(geometry);

    Dataset ds;
    ds.exact_features = cfg.exact_features;
    ds.features.resize(cfg.n_examples, static_cast<Eigen::Index>(schema.size()));
    ds.labels.resize(cfg.n_examples, static_cast<Eigen::Index>(label_names.size()));

    parallel_for(static_cast<std::size_t>(cfg.n_examples), n_threads, [&](std::size_t i) {
        SplitMix64 rng(SplitMix64::derive_stream(cfg.seed, i));
        ParameterSet params = sample_parameters(cfg.prior, rng);
        auto H = build_hamiltonian(geometry, basis, params);
        auto psi = evolve(H, basis, cfg.quench);
        auto p = outcome_distribution(psi);

        CorrelatorVector feats;
        if (cfg.exact_features) {
            feats = table.from_probabilities(p);
        } else {
            auto shots = sample_snapshots(p, basis, cfg.n_shots, rng.next_u64());
            feats = table.from_histogram(snapshot_histogram(shots, basis));
        }
        ds.features.row(static_cast<Eigen::Index>(i)) = feats.transpose();
        auto labels = canonical_labels(params);
        for (std::size_t c = 0; c < labels.size(); ++c) {
            ds.labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = labels[c];
        }
    });

    ds.meta.rows = geometry.rows();
    ds.meta.cols = geometry.cols();
    ds.meta.n_atoms = basis.n_atoms();
    ds.meta.n_shots = cfg.exact_features ? 0 : cfg.n_shots;
    ds.meta.evolution_time = cfg.quench.evolution_time;
    ds.meta.initial_state = cfg.quench.initial_state;
    ds.meta.seed = cfg.seed;
    ds.meta.schema_digest = schema.digest();
    ds.meta.prior = cfg.prior;
    ds.meta.label_names = label_names;
    return ds;
}

EstimatorSuite train_suite(const Dataset& dataset, const TrainingConfig& cfg, int n_eval,
                           int n_threads) {
    const Eigen::Index n = dataset.features.rows();
    const Eigen::Index n_labels = dataset.labels.cols();
    if (n_labels != static_cast<Eigen::Index>(dataset.meta.label_names.size())) {
        throw ConfigError("suite: dataset label names do not match label columns");
    }
    if (n_eval < 0 || n_eval >= n) throw ConfigError("suite: invalid evaluation split");
    const Eigen::Index n_train = n - n_eval;

    Eigen::MatrixXd X_train = dataset.features.topRows(n_train);
    Eigen::MatrixXd X_eval = dataset.features.bottomRows(n_eval);

    std::vector<int> layer_sizes = {static_cast<int>(dataset.features.cols()),
                                    300, 400, 300, 150, 100, 1};

    EstimatorSuite suite;
    suite.meta = dataset.meta;
    suite.meta.training_digest = cfg.digest();
    suite.reports.resize(static_cast<std::size_t>(n_labels));
    suite.failures.assign(static_cast<std::size_t>(n_labels), "");
    suite.models.reserve(static_cast<std::size_t>(n_labels));
    for (Eigen::Index m = 0; m < n_labels; ++m) {
        suite.models.emplace_back(layer_sizes, Activation::ReLU,
                                  SplitMix64::derive_stream(cfg.seed, 1000 + static_cast<std::uint64_t>(m)));
    }

    parallel_for(static_cast<std::size_t>(n_labels), n_threads, [&](std::size_t m) {
        Eigen::VectorXd y_train = dataset.labels.col(static_cast<Eigen::Index>(m)).head(n_train);
        Eigen::VectorXd y_eval = dataset.labels.col(static_cast<Eigen::Index>(m)).tail(n_eval);
        TrainingConfig model_cfg = cfg;
        model_cfg.seed = SplitMix64::derive_stream(cfg.seed, m);
        try {
            // Divergence in one model must not abort the others.
            suite.reports[m] =
                n_eval > 0
                    ? train(suite.models[m], X_train, y_train, model_cfg, &X_eval, &y_eval)
                    : train(suite.models[m], X_train, y_train, model_cfg);
        } catch (const NumericError& err) {
            suite.failures[m] = err.what();
        }
    });
    return suite;
}

double ParameterEstimate::value_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[i];
    }
    throw ConfigError("estimate: no parameter named '" + name + "'");
}

ParameterSet ParameterEstimate::to_parameter_set(const LatticeGeometry& geometry,
                                                 double mu_anchor) const {
    auto expected = canonical_label_names(geometry);
    if (names != expected) throw ConfigError("estimate: label names do not match geometry");
    ParameterSet p;
    std::size_t nb = static_cast<std::size_t>(geometry.n_bonds());
    std::size_t ns = static_cast<std::size_t>(geometry.n_sites());
    p.J.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(nb));
    p.U.assign(values.begin() + static_cast<std::ptrdiff_t>(nb),
               values.begin() + static_cast<std::ptrdiff_t>(nb + ns));
    p.mu.assign(ns, mu_anchor);
    for (std::size_t i = 1; i < ns; ++i) p.mu[i] = mu_anchor + values[nb + ns + i - 1];
    return p;
}

ParameterEstimate estimate(const EstimatorSuite& suite, const SnapshotSet& shots) {
    if (shots.n_sites != suite.meta.rows * suite.meta.cols) {
        throw ConfigError("estimate: snapshot set has " + std::to_string(shots.n_sites) +
                          " sites, suite expects " +
                          std::to_string(suite.meta.rows * suite.meta.cols));
    }
    if (static_cast<int>(shots.size()) != suite.meta.n_shots) {
        throw ConfigError("estimate: suite was trained for " + std::to_string(suite.meta.n_shots) +
                          " snapshots per set, got " + std::to_string(shots.size()));
    }
    FeatureSchema schema(shots.n_sites);
    if (schema.digest() != suite.meta.schema_digest) {
        throw ConfigError("estimate: feature schema mismatch");
    }
    for (std::size_t m = 0; m < suite.models.size(); ++m) {
        if (!suite.failures[m].empty()) {
            throw NumericError("estimate: model for " + suite.meta.label_names[m] +
                               " failed to train: " + suite.failures[m]);
        }
    }

    CorrelatorVector feats = features_from_snapshots(schema, shots);
    ParameterEstimate est;
    est.names = suite.meta.label_names;
    est.n_shots = suite.meta.n_shots;
    est.suite_digest = suite.meta.digest();
    est.values.reserve(suite.models.size());
    for (const auto& model : suite.models) est.values.push_back(model.forward(feats));
    return est;
}

std::vector<TestCase> make_test_cases(const LatticeGeometry& geometry, const FockBasis& basis,
                                      const PriorBox& prior, const QuenchConfig& quench,
                                      int n_cases, int n_shots, std::uint64_t seed,
                                      int n_threads) {
    if (n_cases < 1) throw ConfigError("test cases: n_cases must be >= 1");
    std::vector<TestCase> cases(static_cast<std::size_t>(n_cases));
    parallel_for(static_cast<std::size_t>(n_cases), n_threads, [&](std::size_t i) {
        SplitMix64 rng(SplitMix64::derive_stream(seed, i));
        ParameterSet truth = sample_parameters(prior, rng);
        auto H = build_hamiltonian(geometry, basis, truth);
        auto p = outcome_distribution(evolve(H, basis, quench));
        cases[i].shots = sample_snapshots(p, basis, n_shots, rng.next_u64());
        cases[i].truth = std::move(truth);
    });
    return cases;
}

namespace {

// label families by position: n_bonds J, n_sites U, n_sites-1 mu_diff
struct FamilySlices {
    Eigen::Index j_begin, j_end, u_end, mu_end;
};

FamilySlices slices_from_names(const std::vector<std::string>& names) {
    Eigen::Index j_end = 0;
    while (j_end < static_cast<Eigen::Index>(names.size()) &&
           names[static_cast<std::size_t>(j_end)].rfind("J(", 0) == 0) {
        ++j_end;
    }
    Eigen::Index u_end = j_end;
    while (u_end < static_cast<Eigen::Index>(names.size()) &&
           names[static_cast<std::size_t>(u_end)].rfind("U", 0) == 0) {
        ++u_end;
    }
    return {0, j_end, u_end, static_cast<Eigen::Index>(names.size())};
}

void family_stats(const Eigen::MatrixXd& abs_err, Eigen::Index begin, Eigen::Index end,
                  double& mean, double& stdev) {
    if (end <= begin || abs_err.rows() == 0) {
        mean = stdev = 0.0;
        return;
    }
    auto block = abs_err.middleCols(begin, end - begin);
    mean = block.mean();
    double var = (block.array() - mean).square().sum() /
                 static_cast<double>(block.size());
    stdev = std::sqrt(var);
}

}  // namespace

ErrorReport evaluate_estimates(const std::vector<std::string>& label_names,
                               const std::vector<std::vector<double>>& estimates,
                               const std::vector<TestCase>& cases) {
    if (estimates.size() != cases.size()) {
        throw ConfigError("evaluate: estimate/case count mismatch");
    }
    ErrorReport report;
    report.label_names = label_names;
    report.n_cases = static_cast<int>(cases.size());
    report.errors.resize(static_cast<Eigen::Index>(cases.size()),
                         static_cast<Eigen::Index>(label_names.size()));
    for (std::size_t i = 0; i < cases.size(); ++i) {
        auto truth = canonical_labels(cases[i].truth);
        if (truth.size() != label_names.size() || estimates[i].size() != label_names.size()) {
            throw ConfigError("evaluate: label layout mismatch");
        }
        for (std::size_t c = 0; c < truth.size(); ++c) {
            report.errors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                estimates[i][c] - truth[c];
        }
    }

    Eigen::MatrixXd abs_err = report.errors.cwiseAbs();
    auto fam = slices_from_names(label_names);
    family_stats(abs_err, fam.j_begin, fam.j_end, report.mean_abs_J, report.std_abs_J);
    family_stats(abs_err, fam.j_end, fam.u_end, report.mean_abs_U, report.std_abs_U);
    family_stats(abs_err, fam.u_end, fam.mu_end, report.mean_abs_mu, report.std_abs_mu);
    report.per_label_mean_abs.resize(label_names.size());
    for (Eigen::Index c = 0; c < abs_err.cols(); ++c) {
        report.per_label_mean_abs[static_cast<std::size_t>(c)] = abs_err.col(c).mean();
    }
    return report;
}

ErrorReport evaluate_suite(const EstimatorSuite& suite, const std::vector<TestCase>& cases) {
    std::vector<std::vector<double>> estimates;
    estimates.reserve(cases.size());
    for (const auto& tc : cases) estimates.push_back(estimate(suite, tc.shots).values);
    ErrorReport report = evaluate_estimates(suite.meta.label_names, estimates, cases);

    // midpoint baseline on the same test sets
    const PriorBox& prior = suite.meta.prior;
    std::vector<double> centers = prior.J_center;
    centers.insert(centers.end(), prior.U_center.begin(), prior.U_center.end());
    for (std::size_t i = 1; i < prior.mu_center.size(); ++i) {
        centers.push_back(prior.mu_center[i] - prior.mu_center[0]);
    }
    std::vector<std::vector<double>> baseline(cases.size(), centers);
    ErrorReport base = evaluate_estimates(suite.meta.label_names, baseline, cases);
    report.baseline_J = base.mean_abs_J;
    report.baseline_U = base.mean_abs_U;
    report.baseline_mu = base.mean_abs_mu;
    return report;
}

}  // namespace bhtomo
