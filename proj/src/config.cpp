#include "bhtomo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bhtomo/errors.hpp"
#include "bhtomo/hashing.hpp"
#include "bhtomo/parallel.hpp"

namespace bhtomo {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_value(const std::string& raw, const std::string& key);

template <>
int parse_value<int>(const std::string& raw, const std::string& key) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + raw + "'");
    }
}

template <>
long parse_value<long>(const std::string& raw, const std::string& key) {
    try {
        std::size_t pos = 0;
        long v = std::stol(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + raw + "'");
    }
}

template <>
std::uint64_t parse_value<std::uint64_t>(const std::string& raw, const std::string& key) {
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + raw + "'");
    }
}

template <>
double parse_value<double>(const std::string& raw, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + raw + "'");
    }
}

template <>
bool parse_value<bool>(const std::string& raw, const std::string& key) {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + raw + "'");
}

template <>
std::string parse_value<std::string>(const std::string& raw, const std::string&) {
    return raw;
}

std::string format_value(int v) { return std::to_string(v); }
std::string format_value(long v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(const std::string& v) { return v; }
std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// section -> ordered key -> accessor pair; single source of truth for
// parsing, serialization and the digest.
const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>&
schema() {
    static auto make_field = [](auto member) {
        using Member = decltype(member);
        return Field{
            [member](RunConfig& c, const std::string& raw) {
                c.*member = parse_value<std::decay_t<decltype(std::declval<RunConfig>().*member)>>(
                    raw, "");
            },
            [member](const RunConfig& c) { return format_value(c.*member); }};
    };
    static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>
        s = {
            {"lattice",
             {{"rows", make_field(&RunConfig::rows)}, {"cols", make_field(&RunConfig::cols)}}},
            {"system", {{"atoms", make_field(&RunConfig::atoms)}}},
            {"quench",
             {{"evolution_time", make_field(&RunConfig::evolution_time)},
              {"initial_state", make_field(&RunConfig::initial_state)}}},
            {"prior",
             {{"J_center", make_field(&RunConfig::J_center)},
              {"J_half_width", make_field(&RunConfig::J_half_width)},
              {"U_center", make_field(&RunConfig::U_center)},
              {"U_half_width", make_field(&RunConfig::U_half_width)},
              {"mu_center", make_field(&RunConfig::mu_center)},
              {"mu_half_width", make_field(&RunConfig::mu_half_width)}}},
            {"snapshots", {{"n_shots", make_field(&RunConfig::n_shots)}}},
            {"training",
             {{"n_examples", make_field(&RunConfig::n_examples)},
              {"n_eval", make_field(&RunConfig::n_eval)},
              {"n_test_sets", make_field(&RunConfig::n_test_sets)},
              {"learning_rate", make_field(&RunConfig::learning_rate)},
              {"batch_size", make_field(&RunConfig::batch_size)},
              {"n_steps", make_field(&RunConfig::n_steps)},
              {"optimizer", make_field(&RunConfig::optimizer)},
              {"activation", make_field(&RunConfig::activation)},
              {"final_lr_fraction", make_field(&RunConfig::final_lr_fraction)},
              {"keep_best_eval", make_field(&RunConfig::keep_best_eval)},
              {"exact_features", make_field(&RunConfig::exact_features)},
              {"standardize_features", make_field(&RunConfig::standardize_features)}}},
            {"bayes",
             {{"J_candidates", make_field(&RunConfig::J_candidates)},
              {"U_candidates", make_field(&RunConfig::U_candidates)},
              {"n_iterations", make_field(&RunConfig::bayes_iterations)},
              {"group_schedule", make_field(&RunConfig::group_schedule_path)}}},
            {"scaling",
             {{"cols", make_field(&RunConfig::scale_cols)},
              {"boundary_perturbation", make_field(&RunConfig::boundary_perturbation)}}},
            {"run",
             {{"seed", make_field(&RunConfig::seed)},
              {"threads", make_field(&RunConfig::threads)},
              {"out_dir", make_field(&RunConfig::out_dir)},
              {"scale", make_field(&RunConfig::scale)}}},
        };
    return s;
}

}  // namespace

void RunConfig::validate() const {
    if (rows != 2) throw ConfigError("config: lattice.rows must be 2 (two-leg ladder)");
    if (cols < 2) throw ConfigError("config: lattice.cols must be >= 2");
    if (atoms < 0) throw ConfigError("config: system.atoms must be >= 0");
    if (evolution_time < 0) throw ConfigError("config: quench.evolution_time must be >= 0");
    if (J_half_width < 0 || U_half_width < 0 || mu_half_width < 0) {
        throw ConfigError("config: prior half-widths must be >= 0");
    }
    if (n_shots < 1) throw ConfigError("config: snapshots.n_shots must be >= 1");
    if (n_examples < 1) throw ConfigError("config: training.n_examples must be >= 1");
    if (n_eval < 0 || n_eval >= n_examples) {
        throw ConfigError("config: training.n_eval must be in [0, n_examples)");
    }
    if (learning_rate < 0) throw ConfigError("config: training.learning_rate must be >= 0");
    if (batch_size < 1) throw ConfigError("config: training.batch_size must be >= 1");
    if (n_steps < 1) throw ConfigError("config: training.n_steps must be >= 1");
    if (final_lr_fraction < 0 || final_lr_fraction > 1) {
        throw ConfigError("config: training.final_lr_fraction must be in [0, 1]");
    }
    activation_from_string(activation);
    optimizer_from_string(optimizer);
    if (J_candidates < 1 || U_candidates < 1) {
        throw ConfigError("config: bayes candidate counts must be >= 1");
    }
    if (bayes_iterations < 1) throw ConfigError("config: bayes.n_iterations must be >= 1");
    if (scale_cols < 4) throw ConfigError("config: scaling.cols must be >= 4");
    if (scale <= 0) throw ConfigError("config: run.scale must be > 0");
    if (threads < 0) throw ConfigError("config: run.threads must be >= 0");

    if (initial_state != "checkerboard") {
        FockState s;
        std::istringstream is(initial_state);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            try {
                s.push_back(std::stoi(trim(tok)));
            } catch (...) {
                throw ConfigError("config: quench.initial_state must be 'checkerboard' or a "
                                  "comma-separated occupation list");
            }
        }
        if (static_cast<int>(s.size()) != rows * cols) {
            throw ConfigError("config: initial_state has " + std::to_string(s.size()) +
                              " entries for " + std::to_string(rows * cols) + " sites");
        }
        int sum = 0;
        for (int n : s) sum += n;
        if (sum != atoms) {
            throw ConfigError("config: initial_state atom count " + std::to_string(sum) +
                              " != system.atoms " + std::to_string(atoms));
        }
    }
}

std::string config_to_string(const RunConfig& config) {
    std::string out;
    for (const auto& [section, fields] : schema()) {
        out += "[" + section + "]\n";
        for (const auto& [key, field] : fields) {
            out += key + " = " + field.get(config) + "\n";
        }
        out += "\n";
    }
    return out;
}

std::string RunConfig::digest() const {
    return fnv1a64_hex(config_to_string(*this));
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());

    RunConfig config;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (!t.empty() && t[0] == '#') continue;
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + t + "'");
            }
            section = t.substr(1, t.size() - 2);
            bool known = false;
            for (const auto& [name, _] : schema()) known = known || name == section;
            if (!known) {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": unknown section '" + section + "'");
            }
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + t + "'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (section.empty()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": key '" + key + "' outside any section");
        }
        bool found = false;
        for (const auto& [name, fields] : schema()) {
            if (name != section) continue;
            for (const auto& [k, field] : fields) {
                if (k == key) {
                    try {
                        field.set(config, value);
                    } catch (const ConfigError& e) {
                        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " +
                                          e.what());
                    }
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": unknown key '" + key + "' in section [" + section + "]");
        }
    }
    config.validate();
    return config;
}

void write_config(const std::filesystem::path& path, const RunConfig& config) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config " + path.string());
    out << config_to_string(config);
}

QuenchConfig RunConfig::quench_config(const LatticeGeometry& geometry) const {
    QuenchConfig q;
    q.evolution_time = evolution_time;
    if (initial_state == "checkerboard") {
        q.initial_state = checkerboard_state(geometry);
    } else {
        std::istringstream is(initial_state);
        std::string tok;
        while (std::getline(is, tok, ',')) q.initial_state.push_back(std::stoi(trim(tok)));
    }
    return q;
}

PriorBox RunConfig::prior(const LatticeGeometry& geometry) const {
    return PriorBox::uniform(geometry, J_center, J_half_width, U_center, U_half_width, mu_center,
                             mu_half_width);
}

TrainingConfig RunConfig::training_config() const {
    TrainingConfig t;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.n_steps = scaled_steps();
    t.seed = seed;
    t.optimizer = optimizer_from_string(optimizer);
    t.final_lr_fraction = final_lr_fraction;
    t.keep_best_eval = keep_best_eval;
    return t;
}

int RunConfig::effective_threads() const {
    return threads == 0 ? default_thread_count() : threads;
}

int RunConfig::scaled_examples() const {
    return std::max(1, static_cast<int>(std::lround(n_examples * scale)));
}

long RunConfig::scaled_steps() const {
    return std::max<long>(1, static_cast<long>(std::llround(static_cast<double>(n_steps) * scale)));
}

int RunConfig::scaled_test_sets() const {
    return std::max(1, static_cast<int>(std::lround(n_test_sets * scale)));
}

}  // namespace bhtomo
