#include "bhtomo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"
#include "bhtomo/io.hpp"
#include "bhtomo/parallel.hpp"

namespace bhtomo {

namespace {

void report_progress(const ProgressFn& progress, const std::string& msg) {
    if (progress) progress(msg);
}

std::string suite_key(const RunConfig& config) {
    // everything that determines dataset generation and training
    std::ostringstream os;
    os.precision(17);
    os << config.rows << "x" << config.cols << ";atoms=" << config.atoms
       << ";T=" << config.evolution_time << ";init=" << config.initial_state
       << ";prior=" << config.J_center << "," << config.J_half_width << "," << config.U_center
       << "," << config.U_half_width << "," << config.mu_center << "," << config.mu_half_width
       << ";shots=" << config.n_shots << ";n=" << config.scaled_examples()
       << ";eval=" << config.n_eval << ";seed=" << config.seed
       << ";exact=" << config.exact_features << ";train=" << config.training_config().digest();
    return fnv1a64_hex(os.str());
}

}  // namespace

EstimatorSuite ensure_suite(const std::filesystem::path& cache_dir, const SuiteSpec& spec,
                            const ProgressFn& progress) {
    return ensure_suite(cache_dir, spec.config, progress);
}

EstimatorSuite ensure_suite(const std::filesystem::path& cache_dir, const RunConfig& config,
                            const ProgressFn& progress) {
    config.validate();
    const std::string key = suite_key(config);
    const auto dir = cache_dir / ("suite_" + key);
    std::filesystem::create_directories(dir);

    // fully finished suite
    if (std::filesystem::exists(dir / "manifest.txt")) {
        try {
            EstimatorSuite suite = load_suite(dir);
            report_progress(progress, "suite " + key + ": loaded from cache");
            return suite;
        } catch (const IoError& e) {
            report_progress(progress, std::string("suite cache invalid, rebuilding: ") + e.what());
        }
    }

    LatticeGeometry geometry = build_geometry(config.rows, config.cols);
    FockBasis basis(config.atoms, geometry.n_sites());
    const int n_threads = config.effective_threads();

    // dataset (checkpointed)
    Dataset dataset;
    const auto dataset_path = dir / "dataset.csv";
    bool have_dataset = false;
    if (std::filesystem::exists(dataset_path)) {
        try {
            dataset = read_dataset(dataset_path);
            have_dataset = true;
            report_progress(progress, "suite " + key + ": dataset loaded");
        } catch (const IoError& e) {
            report_progress(progress, std::string("dataset invalid, regenerating: ") + e.what());
        }
    }
    if (!have_dataset) {
        DatasetConfig dc;
        dc.prior = config.prior(geometry);
        dc.n_examples = config.scaled_examples() + config.n_eval;
        dc.n_shots = config.n_shots;
        dc.quench = config.quench_config(geometry);
        dc.seed = config.seed;
        dc.exact_features = config.exact_features;
        report_progress(progress, "suite " + key + ": generating " +
                                      std::to_string(dc.n_examples) + " examples");
        dataset = generate_dataset(geometry, basis, dc, n_threads);
        write_dataset(dataset_path, dataset);
    }

    TrainingConfig tc = config.training_config();
    const std::string training_digest = tc.digest();
    const Eigen::Index n_labels = dataset.labels.cols();
    const Eigen::Index n_train = dataset.features.rows() - config.n_eval;

    EstimatorSuite suite;
    suite.meta = dataset.meta;
    suite.meta.training_digest = training_digest;
    suite.reports.resize(static_cast<std::size_t>(n_labels));
    suite.failures.assign(static_cast<std::size_t>(n_labels), "");

    std::vector<int> layer_sizes = {static_cast<int>(dataset.features.cols()),
                                    300, 400, 300, 150, 100, 1};
    std::vector<std::optional<MlpModel>> models(static_cast<std::size_t>(n_labels));
    std::vector<std::size_t> missing;

    for (std::size_t m = 0; m < static_cast<std::size_t>(n_labels); ++m) {
        char file[32];
        std::snprintf(file, sizeof(file), "model_%02zu.bhm", m);
        auto path = dir / file;
        if (std::filesystem::exists(path)) {
            try {
                auto [model, digest] = read_model(path);
                if (digest == training_digest && model.input_dim() == layer_sizes.front()) {
                    models[m] = std::move(model);
                    continue;
                }
                report_progress(progress, std::string(file) + ": stale digest, retraining");
            } catch (const IoError& e) {
                report_progress(progress, std::string(file) + " invalid, retraining: " + e.what());
            }
        }
        missing.push_back(m);
    }

    if (!missing.empty()) {
        report_progress(progress, "suite " + key + ": training " +
                                      std::to_string(missing.size()) + "/" +
                                      std::to_string(n_labels) + " models");
        Eigen::MatrixXd X_train = dataset.features.topRows(n_train);
        Eigen::MatrixXd X_eval = dataset.features.bottomRows(config.n_eval);
        std::mutex io_mutex;

        parallel_for(missing.size(), n_threads, [&](std::size_t idx) {
            std::size_t m = missing[idx];
            Eigen::VectorXd y_train =
                dataset.labels.col(static_cast<Eigen::Index>(m)).head(n_train);
            Eigen::VectorXd y_eval =
                dataset.labels.col(static_cast<Eigen::Index>(m)).tail(config.n_eval);
            MlpModel model(layer_sizes, activation_from_string(config.activation),
                           SplitMix64::derive_stream(tc.seed, 1000 + m));
            TrainingConfig model_cfg = tc;
            model_cfg.seed = SplitMix64::derive_stream(tc.seed, m);
            try {
                if (config.n_eval > 0) {
                    suite.reports[m] = train(model, X_train, y_train, model_cfg, &X_eval, &y_eval);
                } else {
                    suite.reports[m] = train(model, X_train, y_train, model_cfg);
                }
            } catch (const NumericError& err) {
                suite.failures[m] = err.what();
            }
            char file[32];
            std::snprintf(file, sizeof(file), "model_%02zu.bhm", m);
            {
                std::lock_guard<std::mutex> lock(io_mutex);
                write_model(dir / file, model, training_digest);
                report_progress(progress, "suite " + key + ": trained " +
                                              dataset.meta.label_names[m] + " (" + file + ")");
            }
            models[m] = std::move(model);
        });
    }

    for (auto& m : models) suite.models.push_back(std::move(*m));
    save_suite(dir, suite);
    report_progress(progress, "suite " + key + ": complete");
    return suite;
}

std::vector<double> SweepConfig::default_values(Axis axis) {
    switch (axis) {
        case Axis::Snapshots:
            return {1000, 2500, 5000, 10000, 20000};
        case Axis::PriorWidth:
            return {0.5, 1.0, 1.5, 2.0, 2.5};  // percent
        case Axis::InteractionRatio:
            return {0.5, 2, 5, 10, 20, 40, 70};  // U_mean at J_mean = 1
    }
    return {};
}

std::string SweepConfig::axis_name() const {
    switch (axis) {
        case Axis::Snapshots:
            return "n_shots";
        case Axis::PriorWidth:
            return "precision_percent";
        case Axis::InteractionRatio:
            return "U_mean_over_J_mean";
    }
    return "";
}

namespace {

RunConfig point_config(const SweepConfig& sweep, double value) {
    RunConfig cfg = sweep.base;
    switch (sweep.axis) {
        case SweepConfig::Axis::Snapshots:
            cfg.n_shots = static_cast<int>(std::lround(value));
            break;
        case SweepConfig::Axis::PriorWidth: {
            if (value <= 0) {
                throw ConfigError("sweep: prior width must be > 0 percent (division by the "
                                  "experimental precision)");
            }
            double frac = value / 100.0;
            cfg.J_half_width = frac * cfg.J_center;
            cfg.U_half_width = frac * cfg.U_center;
            cfg.mu_half_width = frac * cfg.mu_center;
            break;
        }
        case SweepConfig::Axis::InteractionRatio:
            cfg.U_center = value;
            // absolute U precision unchanged; snapshot count pinned at 5000
            cfg.n_shots = 5000;
            break;
    }
    return cfg;
}

std::string point_dir_name(const SweepConfig& sweep, double value) {
    std::ostringstream os;
    os << sweep.axis_name() << "_" << value;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

}  // namespace

void write_error_report(const std::filesystem::path& path, const ErrorReport& report) {
    std::string body = "# bhtomo-errors,v1\n";
    body += "# n_cases," + std::to_string(report.n_cases) + "\n";
    body += "# mean_abs_J," + format_double(report.mean_abs_J) + "\n";
    body += "# mean_abs_U," + format_double(report.mean_abs_U) + "\n";
    body += "# mean_abs_mu," + format_double(report.mean_abs_mu) + "\n";
    body += "# std_abs_J," + format_double(report.std_abs_J) + "\n";
    body += "# std_abs_U," + format_double(report.std_abs_U) + "\n";
    body += "# std_abs_mu," + format_double(report.std_abs_mu) + "\n";
    body += "# baseline_J," + format_double(report.baseline_J) + "\n";
    body += "# baseline_U," + format_double(report.baseline_U) + "\n";
    body += "# baseline_mu," + format_double(report.baseline_mu) + "\n";
    std::string header;
    for (std::size_t c = 0; c < report.label_names.size(); ++c) {
        if (c) header += ",";
        header += report.label_names[c];
    }
    body += header + "\n";
    for (Eigen::Index i = 0; i < report.errors.rows(); ++i) {
        std::string row;
        for (Eigen::Index c = 0; c < report.errors.cols(); ++c) {
            if (c) row += ",";
            row += format_double(report.errors(i, c));
        }
        body += row + "\n";
    }
    // checksum handled by the shared writer
    std::string full = std::move(body);
    full += "# checksum," + fnv1a64_hex(full) + "\n";
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << full;
}

namespace {

std::vector<std::string> split_lines_local(const std::string& body) {
    std::vector<std::string> lines;
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

ErrorReport read_error_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    std::string content = os.str();

    std::size_t line_start = content.rfind('\n', content.size() - 2);
    line_start = (line_start == std::string::npos) ? 0 : line_start + 1;
    std::string last = content.substr(line_start);
    if (last.rfind("# checksum,", 0) != 0) {
        throw IoError(path.string() + ": missing checksum line");
    }
    std::string stored = last.substr(11);
    while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
    std::string body = content.substr(0, line_start);
    if (fnv1a64_hex(body) != stored) {
        throw IoError(path.string() + ": checksum mismatch");
    }

    auto lines = split_lines_local(body);
    ErrorReport report;
    std::size_t i = 0;
    auto header_value = [&](const std::string& key) {
        std::string prefix = "# " + key + ",";
        for (const auto& line : lines) {
            if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
        }
        throw IoError(path.string() + ": missing header " + key);
    };
    if (lines.empty() || lines[0] != "# bhtomo-errors,v1") {
        throw IoError(path.string() + ": not an error-report file");
    }
    report.n_cases = std::stoi(header_value("n_cases"));
    report.mean_abs_J = parse_double(header_value("mean_abs_J"));
    report.mean_abs_U = parse_double(header_value("mean_abs_U"));
    report.mean_abs_mu = parse_double(header_value("mean_abs_mu"));
    report.std_abs_J = parse_double(header_value("std_abs_J"));
    report.std_abs_U = parse_double(header_value("std_abs_U"));
    report.std_abs_mu = parse_double(header_value("std_abs_mu"));
    report.baseline_J = parse_double(header_value("baseline_J"));
    report.baseline_U = parse_double(header_value("baseline_U"));
    report.baseline_mu = parse_double(header_value("baseline_mu"));

    while (i < lines.size() && lines[i].rfind("# ", 0) == 0) ++i;
    if (i >= lines.size()) throw IoError(path.string() + ": missing column header");
    {
        std::istringstream hs(lines[i]);
        std::string name;
        while (std::getline(hs, name, ',')) report.label_names.push_back(name);
    }
    ++i;
    std::vector<std::vector<double>> rows;
    for (; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::vector<double> row;
        std::istringstream rs(lines[i]);
        std::string field;
        while (std::getline(rs, field, ',')) row.push_back(parse_double(field));
        if (row.size() != report.label_names.size()) {
            throw IoError(path.string() + ": malformed error row");
        }
        rows.push_back(std::move(row));
    }
    report.errors.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(report.label_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            report.errors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    report.per_label_mean_abs.resize(report.label_names.size());
    for (Eigen::Index c = 0; c < report.errors.cols(); ++c) {
        report.per_label_mean_abs[static_cast<std::size_t>(c)] =
            report.errors.col(c).cwiseAbs().mean();
    }
    return report;
}

SweepResult run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_dir,
                      const ProgressFn& progress) {
    SweepResult result;
    result.axis = sweep.axis;
    result.axis_name = sweep.axis_name();

    for (double value : sweep.values) {
        RunConfig cfg = point_config(sweep, value);
        cfg.validate();
        auto dir = out_dir / point_dir_name(sweep, value);
        std::filesystem::create_directories(dir);

        // completed-point check: digest match and readable report
        auto digest_path = dir / "config.digest";
        auto report_path = dir / "report.csv";
        std::string digest = cfg.digest();
        if (std::filesystem::exists(digest_path) && std::filesystem::exists(report_path)) {
            std::ifstream in(digest_path);
            std::string stored;
            std::getline(in, stored);
            if (stored == digest) {
                try {
                    SweepPoint point;
                    point.value = value;
                    point.report = read_error_report(report_path);
                    point.from_checkpoint = true;
                    result.points.push_back(std::move(point));
                    report_progress(progress, point_dir_name(sweep, value) +
                                                  ": checkpoint hit, skipping");
                    continue;
                } catch (const IoError&) {
                    report_progress(progress, point_dir_name(sweep, value) +
                                                  ": checkpoint unreadable, recomputing");
                }
            }
        }

        report_progress(progress, point_dir_name(sweep, value) + ": running");
        EstimatorSuite suite = ensure_suite(out_dir / "suites", cfg, progress);

        LatticeGeometry geometry = build_geometry(cfg.rows, cfg.cols);
        FockBasis basis(cfg.atoms, geometry.n_sites());
        auto cases = make_test_cases(geometry, basis, cfg.prior(geometry),
                                     cfg.quench_config(geometry), cfg.scaled_test_sets(),
                                     cfg.n_shots, SplitMix64::derive_stream(cfg.seed, 0x7e57),
                                     cfg.effective_threads());
        SweepPoint point;
        point.value = value;
        point.report = evaluate_suite(suite, cases);
        write_error_report(report_path, point.report);
        write_config(dir / "config.ini", cfg);
        {
            std::ofstream out(digest_path);
            out << digest << "\n";
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

void report_sweep(const SweepResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::string body = "# bhtomo-sweep,v1\n";
    body += "# axis," + result.axis_name + "\n";
    body += result.axis_name +
            ",mean_abs_J,std_abs_J,baseline_J,mean_abs_U,std_abs_U,baseline_U,"
            "mean_abs_mu,std_abs_mu,baseline_mu,n_cases\n";
    for (const auto& p : result.points) {
        body += format_double(p.value) + "," + format_double(p.report.mean_abs_J) + "," +
                format_double(p.report.std_abs_J) + "," + format_double(p.report.baseline_J) +
                "," + format_double(p.report.mean_abs_U) + "," +
                format_double(p.report.std_abs_U) + "," + format_double(p.report.baseline_U) +
                "," + format_double(p.report.mean_abs_mu) + "," +
                format_double(p.report.std_abs_mu) + "," + format_double(p.report.baseline_mu) +
                "," + std::to_string(p.report.n_cases) + "\n";
    }
    body += "# checksum," + fnv1a64_hex(body) + "\n";
    std::ofstream out(out_dir / "sweep.csv", std::ios::binary | std::ios::trunc);
    out << body;

    SvgSeries j{"mean |dJ|", {}, {}}, u{"mean |dU|", {}, {}}, mu{"mean |d mu_diff|", {}, {}};
    for (const auto& p : result.points) {
        j.x.push_back(p.value);
        j.y.push_back(p.report.mean_abs_J);
        u.x.push_back(p.value);
        u.y.push_back(p.report.mean_abs_U);
        mu.x.push_back(p.value);
        mu.y.push_back(p.report.mean_abs_mu);
    }
    svg_line_plot(out_dir / "sweep.svg", "absolute estimation error", result.axis_name,
                  "mean absolute error", {j, u, mu},
                  result.axis == SweepConfig::Axis::Snapshots);
}

void report_comparison(const ComparisonResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::string body = "# bhtomo-comparison,v1\n";
    body += "n_shots,method,set,parameter,error\n";
    for (const auto& pc : result.per_count) {
        for (int set = 0; set < pc.nn_errors.rows(); ++set) {
            for (Eigen::Index p = 0; p < pc.nn_errors.cols(); ++p) {
                body += std::to_string(pc.n_shots) + ",nn," + std::to_string(set) + "," +
                        result.parameter_names[static_cast<std::size_t>(p)] + "," +
                        format_double(pc.nn_errors(set, p)) + "\n";
                body += std::to_string(pc.n_shots) + ",bayes," + std::to_string(set) + "," +
                        result.parameter_names[static_cast<std::size_t>(p)] + "," +
                        format_double(pc.bayes_errors(set, p)) + "\n";
            }
        }
    }
    body += "# checksum," + fnv1a64_hex(body) + "\n";
    std::ofstream out(out_dir / "comparison.csv", std::ios::binary | std::ios::trunc);
    out << body;

    for (const auto& pc : result.per_count) {
        auto collect = [](const Eigen::MatrixXd& m) {
            std::vector<double> v(m.data(), m.data() + m.size());
            return v;
        };
        svg_histogram(out_dir / ("comparison_nn_" + std::to_string(pc.n_shots) + ".svg"),
                      "network errors, " + std::to_string(pc.n_shots) + " snapshots",
                      collect(pc.nn_errors), 21, pc.nn_std);
        svg_histogram(out_dir / ("comparison_bayes_" + std::to_string(pc.n_shots) + ".svg"),
                      "Bayes errors, " + std::to_string(pc.n_shots) + " snapshots",
                      collect(pc.bayes_errors), 21, pc.bayes_std);
    }
}

namespace {

std::string svg_header(int w, int h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os.str();
}

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* kSeriesColors[] = {"#e66100", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"};

}  // namespace

void svg_line_plot(const std::filesystem::path& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<SvgSeries>& series, bool log_x) {
    const int W = 640, H = 440, ML = 70, MR = 20, MT = 40, MB = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    for (const auto& s : series) {
        for (double x : s.x) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
        }
        for (double y : s.y) ymax = std::max(ymax, y);
    }
    if (series.empty() || xmax < xmin) return;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    ymax *= 1.1;

    auto px = [&](double x) {
        return ML + (tx(x) - xmin) / (xmax - xmin) * (W - ML - MR);
    };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::string svg = svg_header(W, H);
    svg += "<text x=\"" + fmt_coord(W / 2.0) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-size=\"14\">" + title + "</text>\n";
    svg += "<line x1=\"" + fmt_coord(ML) + "\" y1=\"" + fmt_coord(H - MB) + "\" x2=\"" +
           fmt_coord(W - MR) + "\" y2=\"" + fmt_coord(H - MB) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt_coord(ML) + "\" y1=\"" + fmt_coord(MT) + "\" x2=\"" +
           fmt_coord(ML) + "\" y2=\"" + fmt_coord(H - MB) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt_coord(W / 2.0) + "\" y=\"" + fmt_coord(H - 12) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + x_label + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt_coord(H / 2.0) +
           "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
           fmt_coord(H / 2.0) + ")\">" + y_label + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kSeriesColors[s % 5];
        std::string points;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            points += fmt_coord(px(series[s].x[i])) + "," + fmt_coord(py(series[s].y[i])) + " ";
            svg += "<circle cx=\"" + fmt_coord(px(series[s].x[i])) + "\" cy=\"" +
                   fmt_coord(py(series[s].y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + fmt_coord(W - MR - 150) + "\" y=\"" +
               fmt_coord(MT + 16.0 * static_cast<double>(s)) + "\" font-size=\"12\" fill=\"" +
               color + "\">" + series[s].label + "</text>\n";
    }
    // y-axis ticks
    for (int t = 0; t <= 4; ++t) {
        double y = ymin + (ymax - ymin) * t / 4.0;
        svg += "<text x=\"" + fmt_coord(ML - 6) + "\" y=\"" + fmt_coord(py(y) + 4) +
               "\" text-anchor=\"end\" font-size=\"10\">" + format_double(std::round(y * 1e6) / 1e6) +
               "</text>\n";
    }
    // x ticks at data points of the first series
    for (double x : series.front().x) {
        svg += "<text x=\"" + fmt_coord(px(x)) + "\" y=\"" + fmt_coord(H - MB + 16) +
               "\" text-anchor=\"middle\" font-size=\"10\">" +
               format_double(std::round(x * 100) / 100) + "</text>\n";
    }
    svg += "</svg>\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << svg;
}

void svg_histogram(const std::filesystem::path& path, const std::string& title,
                   const std::vector<double>& samples, int n_bins, double stddev_marker) {
    if (samples.empty() || n_bins < 1) return;
    double lo = *std::min_element(samples.begin(), samples.end());
    double hi = *std::max_element(samples.begin(), samples.end());
    if (hi == lo) {
        lo -= 1e-6;
        hi += 1e-6;
    }
    double width = (hi - lo) / n_bins;
    std::vector<int> counts(static_cast<std::size_t>(n_bins), 0);
    for (double v : samples) {
        int bin = std::min(n_bins - 1, static_cast<int>((v - lo) / width));
        counts[static_cast<std::size_t>(std::max(0, bin))]++;
    }
    int cmax = *std::max_element(counts.begin(), counts.end());

    const int W = 640, H = 440, ML = 60, MR = 20, MT = 40, MB = 50;
    auto px = [&](double x) { return ML + (x - lo) / (hi - lo) * (W - ML - MR); };
    auto py = [&](double c) { return H - MB - c / cmax * (H - MT - MB); };

    std::string svg = svg_header(W, H);
    svg += "<text x=\"" + fmt_coord(W / 2.0) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-size=\"14\">" + title + "</text>\n";
    for (int b = 0; b < n_bins; ++b) {
        double x0 = lo + b * width;
        double c = counts[static_cast<std::size_t>(b)];
        svg += "<rect x=\"" + fmt_coord(px(x0)) + "\" y=\"" + fmt_coord(py(c)) + "\" width=\"" +
               fmt_coord(px(x0 + width) - px(x0)) + "\" height=\"" +
               fmt_coord(py(0) - py(c)) + "\" fill=\"#1f77b4\" stroke=\"white\"/>\n";
    }
    for (double s : {-stddev_marker, stddev_marker}) {
        if (s >= lo && s <= hi) {
            svg += "<line x1=\"" + fmt_coord(px(s)) + "\" y1=\"" + fmt_coord(MT) + "\" x2=\"" +
                   fmt_coord(px(s)) + "\" y2=\"" + fmt_coord(H - MB) +
                   "\" stroke=\"grey\" stroke-dasharray=\"5,4\"/>\n";
        }
    }
    svg += "<line x1=\"" + fmt_coord(ML) + "\" y1=\"" + fmt_coord(H - MB) + "\" x2=\"" +
           fmt_coord(W - MR) + "\" y2=\"" + fmt_coord(H - MB) + "\" stroke=\"black\"/>\n";
    for (double x : {lo, (lo + hi) / 2, hi}) {
        svg += "<text x=\"" + fmt_coord(px(x)) + "\" y=\"" + fmt_coord(H - MB + 16) +
               "\" text-anchor=\"middle\" font-size=\"10\">" +
               format_double(std::round(x * 1e6) / 1e6) + "</text>\n";
    }
    svg += "</svg>\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << svg;
}

}  // namespace bhtomo
