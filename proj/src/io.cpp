#include "bhtomo/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are defined little-endian");

namespace bhtomo {

namespace {

constexpr const char* kChecksumPrefix = "# checksum,";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("write failed for " + path.string());
}

// Appends the checksum line and writes the file.
void write_checksummed(const std::filesystem::path& path, std::string body) {
    body += kChecksumPrefix + fnv1a64_hex(body) + "\n";
    write_file(path, body);
}

// Verifies the trailing checksum and returns the body without it.
std::string read_checksummed(const std::filesystem::path& path) {
    std::string content = read_file(path);
    std::size_t line_start = content.rfind('\n', content.size() - 2);
    line_start = (line_start == std::string::npos) ? 0 : line_start + 1;
    std::string last = content.substr(line_start);
    if (last.rfind(kChecksumPrefix, 0) != 0) {
        throw IoError(path.string() + ": missing checksum line (truncated file?)");
    }
    std::string stored = last.substr(std::strlen(kChecksumPrefix));
    while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
    std::string body = content.substr(0, line_start);
    if (fnv1a64_hex(body) != stored) {
        throw IoError(path.string() + ": checksum mismatch (file corrupted)");
    }
    return body;
}

std::vector<std::string> split_lines(const std::string& body) {
    std::vector<std::string> lines;
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

// "# key,v1,v2,..." header parsing
struct HeaderMap {
    std::vector<std::pair<std::string, std::string>> entries;

    bool contains(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return true;
        return false;
    }
    std::string get(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        throw IoError("missing header field '" + key + "'");
    }
    long get_long(const std::string& key) const { return std::stol(get(key)); }
    std::uint64_t get_u64(const std::string& key) const { return std::stoull(get(key)); }
    double get_double(const std::string& key) const { return parse_double(get(key)); }
};

HeaderMap parse_headers(const std::vector<std::string>& lines, std::size_t& first_data_line) {
    HeaderMap h;
    first_data_line = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].rfind("# ", 0) != 0) {
            first_data_line = i;
            return h;
        }
        std::string rest = lines[i].substr(2);
        std::size_t comma = rest.find(',');
        if (comma == std::string::npos) {
            h.entries.emplace_back(rest, "");
        } else {
            h.entries.emplace_back(rest.substr(0, comma), rest.substr(comma + 1));
        }
    }
    first_data_line = lines.size();
    return h;
}

void check_format(const HeaderMap& h, const std::string& tag, long version,
                  const std::filesystem::path& path) {
    if (!h.contains(tag)) {
        throw IoError(path.string() + ": not a " + tag + " file");
    }
    long got = std::stol(h.get(tag).substr(1));  // "v1" -> 1
    if (got != version) {
        throw IoError(path.string() + ": unsupported " + tag + " version v" +
                      std::to_string(got) + " (expected v" + std::to_string(version) + ")");
    }
}

std::string join_csv_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& f : split_csv(s)) out.push_back(parse_double(f));
    return out;
}

void write_prior_headers(std::string& body, const PriorBox& prior) {
    body += "# prior_J_center," + join_csv_doubles(prior.J_center) + "\n";
    body += "# prior_J_half_width," + join_csv_doubles(prior.J_half_width) + "\n";
    body += "# prior_U_center," + join_csv_doubles(prior.U_center) + "\n";
    body += "# prior_U_half_width," + join_csv_doubles(prior.U_half_width) + "\n";
    body += "# prior_mu_center," + join_csv_doubles(prior.mu_center) + "\n";
    body += "# prior_mu_half_width," + join_csv_doubles(prior.mu_half_width) + "\n";
}

PriorBox read_prior_headers(const HeaderMap& h) {
    PriorBox p;
    p.J_center = parse_csv_doubles(h.get("prior_J_center"));
    p.J_half_width = parse_csv_doubles(h.get("prior_J_half_width"));
    p.U_center = parse_csv_doubles(h.get("prior_U_center"));
    p.U_half_width = parse_csv_doubles(h.get("prior_U_half_width"));
    p.mu_center = parse_csv_doubles(h.get("prior_mu_center"));
    p.mu_half_width = parse_csv_doubles(h.get("prior_mu_half_width"));
    return p;
}

std::string join_csv_ints(const FockState& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out;
}

FockState parse_csv_ints(const std::string& line) {
    FockState s;
    for (const auto& f : split_csv(line)) s.push_back(std::stoi(f));
    return s;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw IoError("trailing characters in number '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        throw IoError("expected a number, got '" + s + "'");
    } catch (const std::out_of_range&) {
        throw IoError("number out of range: '" + s + "'");
    }
}

void write_snapshots(const std::filesystem::path& path, const SnapshotSet& shots) {
    std::string body = "# bhtomo-snapshots,v1\n";
    body += "# n_sites," + std::to_string(shots.n_sites) + "\n";
    body += "# n_atoms," + std::to_string(shots.n_atoms) + "\n";
    body += "# n_shots," + std::to_string(shots.snapshots.size()) + "\n";
    if (shots.has_provenance) {
        body += "# seed," + std::to_string(shots.seed) + "\n";
        if (!shots.params_digest.empty()) {
            body += "# params_digest," + shots.params_digest + "\n";
        }
    }
    for (const FockState& s : shots.snapshots) body += join_csv_ints(s) + "\n";
    write_checksummed(path, std::move(body));
}

SnapshotSet read_snapshots(const std::filesystem::path& path) {
    auto lines = split_lines(read_checksummed(path));
    std::size_t data_start = 0;
    HeaderMap h = parse_headers(lines, data_start);
    check_format(h, "bhtomo-snapshots", 1, path);

    SnapshotSet shots;
    shots.n_sites = static_cast<int>(h.get_long("n_sites"));
    shots.n_atoms = static_cast<int>(h.get_long("n_atoms"));
    if (h.contains("seed")) {
        shots.has_provenance = true;
        shots.seed = h.get_u64("seed");
        if (h.contains("params_digest")) shots.params_digest = h.get("params_digest");
    }
    long n_shots = h.get_long("n_shots");
    for (std::size_t i = data_start; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        FockState s = parse_csv_ints(lines[i]);
        if (static_cast<int>(s.size()) != shots.n_sites) {
            throw IoError(path.string() + ": snapshot row with wrong site count");
        }
        int sum = 0;
        for (int n : s) sum += n;
        if (sum != shots.n_atoms) {
            throw IoError(path.string() + ": snapshot row violates atom-number conservation");
        }
        shots.snapshots.push_back(std::move(s));
    }
    if (static_cast<long>(shots.snapshots.size()) != n_shots) {
        throw IoError(path.string() + ": expected " + std::to_string(n_shots) + " rows, found " +
                      std::to_string(shots.snapshots.size()));
    }
    return shots;
}

namespace {

void write_meta_headers(std::string& body, const SuiteMetadata& meta) {
    body += "# rows," + std::to_string(meta.rows) + "\n";
    body += "# cols," + std::to_string(meta.cols) + "\n";
    body += "# n_atoms," + std::to_string(meta.n_atoms) + "\n";
    body += "# n_shots," + std::to_string(meta.n_shots) + "\n";
    body += "# evolution_time," + format_double(meta.evolution_time) + "\n";
    body += "# initial_state," + join_csv_ints(meta.initial_state) + "\n";
    body += "# seed," + std::to_string(meta.seed) + "\n";
    body += "# schema_digest," + meta.schema_digest + "\n";
    write_prior_headers(body, meta.prior);
    std::string labels;
    for (std::size_t i = 0; i < meta.label_names.size(); ++i) {
        if (i) labels += ",";
        labels += meta.label_names[i];
    }
    body += "# labels," + labels + "\n";
}

SuiteMetadata read_meta_headers(const HeaderMap& h) {
    SuiteMetadata meta;
    meta.rows = static_cast<int>(h.get_long("rows"));
    meta.cols = static_cast<int>(h.get_long("cols"));
    meta.n_atoms = static_cast<int>(h.get_long("n_atoms"));
    meta.n_shots = static_cast<int>(h.get_long("n_shots"));
    meta.evolution_time = h.get_double("evolution_time");
    meta.initial_state = parse_csv_ints(h.get("initial_state"));
    meta.seed = h.get_u64("seed");
    meta.schema_digest = h.get("schema_digest");
    meta.prior = read_prior_headers(h);
    meta.label_names = split_csv(h.get("labels"));
    return meta;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::string body = "# bhtomo-dataset,v1\n";
    write_meta_headers(body, dataset.meta);
    body += "# exact_features," + std::to_string(dataset.exact_features ? 1 : 0) + "\n";
    body += "# n_examples," + std::to_string(dataset.features.rows()) + "\n";
    body += "# n_features," + std::to_string(dataset.features.cols()) + "\n";
    body += "# n_labels," + std::to_string(dataset.labels.cols()) + "\n";
    std::string row;
    for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
        row.clear();
        for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) {
            if (c) row += ",";
            row += format_double(dataset.features(i, c));
        }
        for (Eigen::Index c = 0; c < dataset.labels.cols(); ++c) {
            row += ",";
            row += format_double(dataset.labels(i, c));
        }
        body += row + "\n";
    }
    write_checksummed(path, std::move(body));
}

Dataset read_dataset(const std::filesystem::path& path) {
    auto lines = split_lines(read_checksummed(path));
    std::size_t data_start = 0;
    HeaderMap h = parse_headers(lines, data_start);
    check_format(h, "bhtomo-dataset", 1, path);

    Dataset ds;
    ds.meta = read_meta_headers(h);
    ds.exact_features = h.get_long("exact_features") != 0;
    long n = h.get_long("n_examples");
    long nf = h.get_long("n_features");
    long nl = h.get_long("n_labels");
    ds.features.resize(n, nf);
    ds.labels.resize(n, nl);
    long row = 0;
    for (std::size_t i = data_start; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        if (row >= n) throw IoError(path.string() + ": more data rows than declared");
        auto fields = split_csv(lines[i]);
        if (static_cast<long>(fields.size()) != nf + nl) {
            throw IoError(path.string() + ": row " + std::to_string(row) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(nf + nl));
        }
        for (long c = 0; c < nf; ++c) {
            ds.features(row, c) = parse_double(fields[static_cast<std::size_t>(c)]);
        }
        for (long c = 0; c < nl; ++c) {
            ds.labels(row, c) = parse_double(fields[static_cast<std::size_t>(nf + c)]);
        }
        ++row;
    }
    if (row != n) {
        throw IoError(path.string() + ": expected " + std::to_string(n) + " rows, found " +
                      std::to_string(row));
    }
    return ds;
}

namespace {

constexpr char kModelMagic[4] = {'B', 'H', 'T', 'M'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put_raw(std::string& out, const T& value) {
    const char* p = reinterpret_cast<const char*>(&value);
    out.append(p, sizeof(T));
}

template <typename T>
T take_raw(const std::string& in, std::size_t& offset, const std::filesystem::path& path) {
    if (offset + sizeof(T) > in.size()) {
        throw IoError(path.string() + ": truncated model file");
    }
    T value;
    std::memcpy(&value, in.data() + offset, sizeof(T));
    offset += sizeof(T);
    return value;
}

}  // namespace

void write_model(const std::filesystem::path& path, const MlpModel& model,
                 const std::string& training_digest) {
    std::string out;
    out.append(kModelMagic, 4);
    put_raw(out, kModelVersion);
    put_raw(out, static_cast<std::uint32_t>(model.layer_sizes().size()));
    for (int s : model.layer_sizes()) put_raw(out, static_cast<std::int32_t>(s));
    put_raw(out, static_cast<std::uint8_t>(model.activation() == Activation::ReLU ? 0 : 1));
    put_raw(out, static_cast<std::uint32_t>(training_digest.size()));
    out += training_digest;
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        const Eigen::MatrixXd& W = model.weight(l);
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) put_raw(out, W(r, c));
        }
        const Eigen::VectorXd& b = model.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) put_raw(out, b(i));
    }
    Fnv1a64 h;
    h.update(out.data(), out.size());
    put_raw(out, h.value());
    write_file(path, out);
}

std::pair<MlpModel, std::string> read_model(const std::filesystem::path& path) {
    std::string in = read_file(path);
    if (in.size() < 12 + 8) throw IoError(path.string() + ": truncated model file");

    Fnv1a64 h;
    h.update(in.data(), in.size() - 8);
    std::size_t tail = in.size() - 8;
    std::uint64_t stored;
    std::memcpy(&stored, in.data() + tail, 8);
    if (stored != h.value()) {
        throw IoError(path.string() + ": checksum mismatch (file corrupted)");
    }

    std::size_t offset = 0;
    if (std::memcmp(in.data(), kModelMagic, 4) != 0) {
        throw IoError(path.string() + ": not a model file");
    }
    offset = 4;
    auto version = take_raw<std::uint32_t>(in, offset, path);
    if (version != kModelVersion) {
        throw IoError(path.string() + ": unsupported model version " + std::to_string(version));
    }
    auto n_sizes = take_raw<std::uint32_t>(in, offset, path);
    if (n_sizes < 2 || n_sizes > 64) throw IoError(path.string() + ": corrupt layer count");
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) s = take_raw<std::int32_t>(in, offset, path);
    auto act = take_raw<std::uint8_t>(in, offset, path);
    auto digest_len = take_raw<std::uint32_t>(in, offset, path);
    if (offset + digest_len > in.size()) throw IoError(path.string() + ": truncated model file");
    std::string digest = in.substr(offset, digest_len);
    offset += digest_len;

    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Eigen::MatrixXd W(sizes[l], sizes[l + 1]);
        for (Eigen::Index r = 0; r < W.rows(); ++r) {
            for (Eigen::Index c = 0; c < W.cols(); ++c) {
                W(r, c) = take_raw<double>(in, offset, path);
            }
        }
        Eigen::VectorXd b(sizes[l + 1]);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = take_raw<double>(in, offset, path);
        weights.push_back(std::move(W));
        biases.push_back(std::move(b));
    }
    if (offset != tail) throw IoError(path.string() + ": trailing bytes in model file");
    return {MlpModel(sizes, act == 0 ? Activation::ReLU : Activation::Tanh, std::move(weights),
                     std::move(biases)),
            digest};
}

namespace {

std::string model_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "model_%02zu.bhm", index);
    return buf;
}

std::string file_checksum(const std::filesystem::path& path) {
    Fnv1a64 h;
    h.update(read_file(path));
    return h.hex();
}

}  // namespace

void save_suite(const std::filesystem::path& dir, const EstimatorSuite& suite) {
    std::filesystem::create_directories(dir);
    for (std::size_t m = 0; m < suite.models.size(); ++m) {
        write_model(dir / model_file_name(m), suite.models[m], suite.meta.training_digest);
    }

    std::string body = "# bhtomo-suite,v1\n";
    write_meta_headers(body, suite.meta);
    body += "# training_digest," + suite.meta.training_digest + "\n";
    body += "# n_models," + std::to_string(suite.models.size()) + "\n";
    body += "label,file,checksum,failure\n";
    for (std::size_t m = 0; m < suite.models.size(); ++m) {
        std::string file = model_file_name(m);
        body += suite.meta.label_names[m] + "," + file + "," + file_checksum(dir / file) + "," +
                suite.failures[m] + "\n";
    }
    write_checksummed(dir / "manifest.txt", std::move(body));

    std::string log = "# bhtomo-training-log,v1\n";
    log += "model,kind,step,loss\n";
    for (std::size_t m = 0; m < suite.reports.size(); ++m) {
        for (const auto& [step, loss] : suite.reports[m].train_loss) {
            log += std::to_string(m) + ",train," + std::to_string(step) + "," +
                   format_double(loss) + "\n";
        }
        for (const auto& [step, loss] : suite.reports[m].eval_loss) {
            log += std::to_string(m) + ",eval," + std::to_string(step) + "," +
                   format_double(loss) + "\n";
        }
    }
    write_checksummed(dir / "training_log.csv", std::move(log));
}

EstimatorSuite load_suite(const std::filesystem::path& dir) {
    auto manifest_path = dir / "manifest.txt";
    auto lines = split_lines(read_checksummed(manifest_path));
    std::size_t data_start = 0;
    HeaderMap h = parse_headers(lines, data_start);
    check_format(h, "bhtomo-suite", 1, manifest_path);

    EstimatorSuite suite;
    suite.meta = read_meta_headers(h);
    suite.meta.training_digest = h.get("training_digest");
    long n_models = h.get_long("n_models");

    // skip the column header row
    for (std::size_t i = data_start + 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv(lines[i]);
        if (fields.size() < 3) throw IoError(manifest_path.string() + ": malformed model row");
        auto model_path = dir / fields[1];
        if (file_checksum(model_path) != fields[2]) {
            throw IoError(model_path.string() + ": checksum mismatch against manifest");
        }
        auto [model, digest] = read_model(model_path);
        if (digest != suite.meta.training_digest) {
            throw IoError(model_path.string() + ": training digest differs from manifest");
        }
        suite.models.push_back(std::move(model));
        suite.failures.push_back(fields.size() > 3 ? fields[3] : "");
    }
    if (static_cast<long>(suite.models.size()) != n_models) {
        throw IoError(manifest_path.string() + ": expected " + std::to_string(n_models) +
                      " models, found " + std::to_string(suite.models.size()));
    }
    suite.reports.resize(suite.models.size());
    return suite;
}

void write_estimate(const std::filesystem::path& path, const ParameterEstimate& estimate,
                    const std::string& method) {
    std::string body = "# bhtomo-estimate,v1\n";
    body += "# method," + method + "\n";
    body += "# n_shots," + std::to_string(estimate.n_shots) + "\n";
    body += "# suite_digest," + estimate.suite_digest + "\n";
    body += "name,value\n";
    for (std::size_t i = 0; i < estimate.names.size(); ++i) {
        body += estimate.names[i] + "," + format_double(estimate.values[i]) + "\n";
    }
    write_checksummed(path, std::move(body));
}

ParameterEstimate read_estimate(const std::filesystem::path& path) {
    auto lines = split_lines(read_checksummed(path));
    std::size_t data_start = 0;
    HeaderMap h = parse_headers(lines, data_start);
    check_format(h, "bhtomo-estimate", 1, path);

    ParameterEstimate est;
    est.n_shots = static_cast<int>(h.get_long("n_shots"));
    est.suite_digest = h.get("suite_digest");
    for (std::size_t i = data_start + 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv(lines[i]);
        if (fields.size() != 2) throw IoError(path.string() + ": malformed estimate row");
        est.names.push_back(fields[0]);
        est.values.push_back(parse_double(fields[1]));
    }
    return est;
}

void write_parameter_set(const std::filesystem::path& path, const LatticeGeometry& geometry,
                         const ParameterSet& params) {
    validate_parameters(geometry, params);
    std::string body = "# bhtomo-params,v1\n";
    body += "# rows," + std::to_string(geometry.rows()) + "\n";
    body += "# cols," + std::to_string(geometry.cols()) + "\n";
    body += "name,value\n";
    for (int b = 0; b < geometry.n_bonds(); ++b) {
        body += geometry.bond_name(b) + "," +
                format_double(params.J[static_cast<std::size_t>(b)]) + "\n";
    }
    for (int s = 0; s < geometry.n_sites(); ++s) {
        body += "U" + std::to_string(s + 1) + "," +
                format_double(params.U[static_cast<std::size_t>(s)]) + "\n";
    }
    for (int s = 0; s < geometry.n_sites(); ++s) {
        body += "mu" + std::to_string(s + 1) + "," +
                format_double(params.mu[static_cast<std::size_t>(s)]) + "\n";
    }
    write_checksummed(path, std::move(body));
}

ParameterSet read_parameter_set(const std::filesystem::path& path,
                                const LatticeGeometry& geometry) {
    auto lines = split_lines(read_checksummed(path));
    std::size_t data_start = 0;
    HeaderMap h = parse_headers(lines, data_start);
    check_format(h, "bhtomo-params", 1, path);
    if (h.get_long("rows") != geometry.rows() || h.get_long("cols") != geometry.cols()) {
        throw IoError(path.string() + ": parameter set is for a different lattice");
    }

    std::vector<std::pair<std::string, double>> rows;
    for (std::size_t i = data_start + 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv(lines[i]);
        if (fields.size() != 2) throw IoError(path.string() + ": malformed parameter row");
        rows.emplace_back(fields[0], parse_double(fields[1]));
    }

    ParameterSet p;
    std::size_t idx = 0;
    auto expect = [&](const std::string& name) -> double {
        if (idx >= rows.size() || rows[idx].first != name) {
            throw IoError(path.string() + ": expected parameter '" + name + "' at row " +
                          std::to_string(idx));
        }
        return rows[idx++].second;
    };
    for (int b = 0; b < geometry.n_bonds(); ++b) p.J.push_back(expect(geometry.bond_name(b)));
    for (int s = 0; s < geometry.n_sites(); ++s) {
        p.U.push_back(expect("U" + std::to_string(s + 1)));
    }
    for (int s = 0; s < geometry.n_sites(); ++s) {
        p.mu.push_back(expect("mu" + std::to_string(s + 1)));
    }
    return p;
}

void write_group_schedule(const std::filesystem::path& path, const GroupSchedule& schedule) {
    std::string body = "# bhtomo-groups,v1\n";
    body += "# n_iterations," + std::to_string(schedule.n_iterations) + "\n";
    body += "# J_candidates," + std::to_string(schedule.n_J_candidates) + "\n";
    body += "# U_candidates," + std::to_string(schedule.n_U_candidates) + "\n";
    body += "group,kind,indices\n";
    for (const auto& g : schedule.groups) {
        std::string kind = g.members.empty() || g.members.front().kind == ParamRef::Kind::J
                               ? "J"
                               : "U";
        std::string indices;
        for (std::size_t i = 0; i < g.members.size(); ++i) {
            if (i) indices += ";";
            indices += std::to_string(g.members[i].index);
        }
        body += g.name + "," + kind + "," + indices + "\n";
    }
    write_checksummed(path, std::move(body));
}

GroupSchedule read_group_schedule(const std::filesystem::path& path) {
    auto lines = split_lines(read_checksummed(path));
    std::size_t data_start = 0;
    HeaderMap h = parse_headers(lines, data_start);
    check_format(h, "bhtomo-groups", 1, path);

    GroupSchedule schedule;
    schedule.n_iterations = static_cast<int>(h.get_long("n_iterations"));
    schedule.n_J_candidates = static_cast<int>(h.get_long("J_candidates"));
    schedule.n_U_candidates = static_cast<int>(h.get_long("U_candidates"));
    for (std::size_t i = data_start + 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv(lines[i]);
        if (fields.size() != 3) throw IoError(path.string() + ": malformed group row");
        ParamGroup g;
        g.name = fields[0];
        ParamRef::Kind kind = fields[1] == "J" ? ParamRef::Kind::J : ParamRef::Kind::U;
        if (fields[1] != "J" && fields[1] != "U") {
            throw IoError(path.string() + ": group kind must be J or U, got '" + fields[1] + "'");
        }
        std::istringstream is(fields[2]);
        std::string tok;
        while (std::getline(is, tok, ';')) g.members.push_back({kind, std::stoi(tok)});
        schedule.groups.push_back(std::move(g));
    }
    return schedule;
}

void write_feature_schema(const std::filesystem::path& path, const FeatureSchema& schema) {
    std::string body = "# bhtomo-feature-schema,v1\n";
    body += "# n_sites," + std::to_string(schema.n_sites()) + "\n";
    body += "# n_features," + std::to_string(schema.size()) + "\n";
    body += "# digest," + schema.digest() + "\n";
    body += "column,name\n";
    auto names = schema.column_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
        body += std::to_string(c) + "," + names[c] + "\n";
    }
    write_checksummed(path, std::move(body));
}

void write_features_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                        const CorrelatorVector& features) {
    if (features.size() != static_cast<Eigen::Index>(schema.size())) {
        throw ConfigError("features: vector does not match schema");
    }
    std::string body = "# bhtomo-features,v1\n";
    body += "# schema_digest," + schema.digest() + "\n";
    body += "name,value\n";
    auto names = schema.column_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
        body += names[c] + "," + format_double(features(static_cast<Eigen::Index>(c))) + "\n";
    }
    write_checksummed(path, std::move(body));
}

}  // namespace bhtomo
