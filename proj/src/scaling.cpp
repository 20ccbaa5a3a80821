#include "bhtomo/scaling.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "bhtomo/errors.hpp"
#include "bhtomo/rng.hpp"

namespace bhtomo {

namespace {

constexpr int kFrameWidth = 4;

// full-lattice bond indices for a 2xM ladder in canonical bond order
int top_leg_index(int col) { return col - 1; }                     // between col, col+1
int bottom_leg_index(int M, int col) { return (M - 1) + col - 1; }
int rung_index(int M, int col) { return 2 * (M - 1) + col - 1; }

FockState frame_checkerboard(int width) {
    FockState s(static_cast<std::size_t>(2 * width), 0);
    for (int c = 0; c < width; ++c) {
        if (c % 2 == 0) {
            s[static_cast<std::size_t>(c)] = 1;  // top row
        } else {
            s[static_cast<std::size_t>(width + c)] = 1;  // bottom row
        }
    }
    return s;
}

// frame bond list for a 2xw window, matching LatticeGeometry order for w >= 2
std::vector<Bond> frame_bonds(int width) {
    std::vector<Bond> bonds;
    for (int c = 1; c < width; ++c) bonds.push_back({c, c + 1});
    for (int c = 1; c < width; ++c) bonds.push_back({width + c, width + c + 1});
    for (int c = 1; c <= width; ++c) bonds.push_back({c, width + c});
    return bonds;
}

}  // namespace

WindowPlan plan_windows(int M) {
    if (M < kFrameWidth) {
        throw ConfigError("scaling: need lattice length >= " + std::to_string(kFrameWidth) +
                          ", got " + std::to_string(M));
    }
    WindowPlan plan;
    plan.M = M;
    plan.window_width = kFrameWidth;
    for (int shift = 0; shift < kFrameWidth; ++shift) {
        BoundaryConfig config;
        for (int j = 1; j < M; ++j) {
            if (j % kFrameWidth == shift) config.cuts.push_back(j);
        }
        int start = 1;
        auto close_window = [&](int last) {
            ScaleWindow w;
            w.first_col = start;
            w.last_col = last;
            w.full_width = (w.width() == kFrameWidth);
            for (int c = start; c <= last; ++c) w.full_site_ids.push_back(c);
            for (int c = start; c <= last; ++c) w.full_site_ids.push_back(M + c);
            config.windows.push_back(std::move(w));
            start = last + 1;
        };
        for (int cut : config.cuts) close_window(cut);
        close_window(M);
        plan.configs.push_back(std::move(config));
    }
    return plan;
}

bool column_is_interior(const ScaleWindow& window, int col, int M, int margin) {
    if (col < window.first_col || col > window.last_col) return false;
    bool has_left_cut = window.first_col > 1;
    bool has_right_cut = window.last_col < M;
    if (has_left_cut && col - window.first_col + 1 <= margin) return false;
    if (has_right_cut && window.last_col - col + 1 <= margin) return false;
    return true;
}

PartitionedSnapshots simulate_partitioned(const LatticeGeometry& full,
                                          const ParameterSet& full_params, const WindowPlan& plan,
                                          int config_index, int n_shots, double evolution_time,
                                          std::uint64_t seed, double boundary_perturbation) {
    validate_parameters(full, full_params);
    if (full.cols() != plan.M) throw ConfigError("scaling: plan does not match lattice length");
    if (config_index < 0 || config_index >= static_cast<int>(plan.configs.size())) {
        throw ConfigError("scaling: configuration index out of range");
    }
    const int M = plan.M;
    const BoundaryConfig& config = plan.configs[static_cast<std::size_t>(config_index)];

    PartitionedSnapshots out;
    out.per_window.reserve(config.windows.size());

    std::uint64_t config_seed = SplitMix64::derive_stream(seed, static_cast<std::uint64_t>(config_index));

    for (std::size_t wi = 0; wi < config.windows.size(); ++wi) {
        const ScaleWindow& w = config.windows[wi];
        const int width = w.width();
        const int a = w.first_col;

        // restrict parameters to the window frame
        ParameterSet wp;
        for (int c = 1; c < width; ++c) {
            wp.J.push_back(full_params.J[static_cast<std::size_t>(top_leg_index(a + c - 1))]);
        }
        for (int c = 1; c < width; ++c) {
            wp.J.push_back(full_params.J[static_cast<std::size_t>(bottom_leg_index(M, a + c - 1))]);
        }
        for (int c = 0; c < width; ++c) {
            wp.J.push_back(full_params.J[static_cast<std::size_t>(rung_index(M, a + c))]);
        }
        for (int site : w.full_site_ids) {
            wp.U.push_back(full_params.U[static_cast<std::size_t>(site - 1)]);
            wp.mu.push_back(full_params.mu[static_cast<std::size_t>(site - 1)]);
        }

        if (boundary_perturbation != 0.0) {
            // cut-adjacent columns: effective interaction and rung hopping shift
            auto perturb_column = [&](int frame_col) {
                wp.U[static_cast<std::size_t>(frame_col - 1)] += boundary_perturbation;
                wp.U[static_cast<std::size_t>(width + frame_col - 1)] += boundary_perturbation;
                // rungs come after the 2*(width-1) legs
                wp.J[static_cast<std::size_t>(2 * (width - 1) + frame_col - 1)] +=
                    boundary_perturbation;
            };
            if (w.first_col > 1) perturb_column(1);
            if (w.last_col < M) perturb_column(width);
        }

        FockState init = frame_checkerboard(width);
        int atoms = 0;
        for (int n : init) atoms += n;
        FockBasis basis(atoms, 2 * width);
        auto H = build_hamiltonian(frame_bonds(width), basis, wp);
        auto p = outcome_distribution(evolve(H, basis, {init, evolution_time}));
        out.per_window.push_back(
            sample_snapshots(p, basis, n_shots, SplitMix64::derive_stream(config_seed, wi)));
    }

    // concatenate window rows into whole-system measurement rows
    out.full.n_sites = full.n_sites();
    out.full.n_atoms = 0;
    for (const auto& ws : out.per_window) out.full.n_atoms += ws.n_atoms;
    out.full.has_provenance = true;
    out.full.seed = seed;
    out.full.snapshots.assign(static_cast<std::size_t>(n_shots),
                              FockState(static_cast<std::size_t>(full.n_sites()), 0));
    for (std::size_t wi = 0; wi < config.windows.size(); ++wi) {
        const ScaleWindow& w = config.windows[wi];
        for (int t = 0; t < n_shots; ++t) {
            const FockState& row = out.per_window[wi].snapshots[static_cast<std::size_t>(t)];
            for (std::size_t k = 0; k < w.full_site_ids.size(); ++k) {
                out.full.snapshots[static_cast<std::size_t>(t)]
                                  [static_cast<std::size_t>(w.full_site_ids[k] - 1)] = row[k];
            }
        }
    }
    return out;
}

SnapshotSet extract_window(const SnapshotSet& full, const ScaleWindow& window) {
    if (full.snapshots.empty()) throw ConfigError("scaling: empty snapshot set");
    SnapshotSet out;
    out.n_sites = static_cast<int>(window.full_site_ids.size());
    out.has_provenance = full.has_provenance;
    out.seed = full.seed;
    out.snapshots.reserve(full.snapshots.size());
    int atoms = -1;
    for (const FockState& row : full.snapshots) {
        FockState sub;
        sub.reserve(window.full_site_ids.size());
        for (int site : window.full_site_ids) {
            if (site < 1 || site > static_cast<int>(row.size())) {
                throw ConfigError("scaling: window site out of range");
            }
            sub.push_back(row[static_cast<std::size_t>(site - 1)]);
        }
        int sum = 0;
        for (int n : sub) sum += n;
        if (atoms < 0) atoms = sum;
        if (sum != atoms) {
            throw ConfigError(
                "scaling: window atom number varies across snapshots; data was not "
                "taken with this boundary configuration");
        }
        out.snapshots.push_back(std::move(sub));
    }
    out.n_atoms = atoms;
    return out;
}

namespace {

struct Candidate {
    int config_index;
    int window_index;
    int distance;
    double value;        // estimated value (for mu: the in-window difference)
    int anchor_site;     // window anchor (frame site 1) as a full-lattice site
    int frame_index;     // bond/site position inside the 2x4 frame
    bool operator<(const Candidate& other) const {
        if (distance != other.distance) return distance > other.distance;
        if (config_index != other.config_index) return config_index < other.config_index;
        return window_index < other.window_index;
    }
};

int column_distance(const ScaleWindow& w, int col, int M) {
    int d = std::numeric_limits<int>::max();
    if (w.first_col > 1) d = std::min(d, col - w.first_col + 1);
    if (w.last_col < M) d = std::min(d, w.last_col - col + 1);
    if (d == std::numeric_limits<int>::max()) d = M;  // no cuts at all
    return d;
}

}  // namespace

MergedEstimate merge_estimates(const std::vector<WindowEstimate>& estimates,
                               const WindowPlan& plan, const LatticeGeometry& full,
                               double mu_anchor) {
    const int M = full.cols();
    if (plan.M != M) throw ConfigError("scaling: plan does not match lattice length");
    LatticeGeometry frame = build_geometry(2, plan.window_width);
    auto frame_names = canonical_label_names(frame);

    const std::size_t n_bonds = static_cast<std::size_t>(full.n_bonds());
    const std::size_t n_sites = static_cast<std::size_t>(full.n_sites());
    std::vector<std::vector<Candidate>> J_cands(n_bonds), U_cands(n_sites), mu_cands(n_sites);

    for (const WindowEstimate& we : estimates) {
        if (we.config_index < 0 || we.config_index >= static_cast<int>(plan.configs.size())) {
            throw ConfigError("scaling: estimate has invalid configuration index");
        }
        const auto& config = plan.configs[static_cast<std::size_t>(we.config_index)];
        if (we.window_index < 0 || we.window_index >= static_cast<int>(config.windows.size())) {
            throw ConfigError("scaling: estimate has invalid window index");
        }
        const ScaleWindow& w = config.windows[static_cast<std::size_t>(we.window_index)];
        if (!w.full_width) {
            throw ConfigError("scaling: truncated windows are measured but not estimated");
        }
        if (we.estimate.names != frame_names) {
            throw ConfigError("scaling: window estimate labels do not match the 2x4 frame");
        }
        const int a = w.first_col;
        const int width = w.width();
        const int anchor = a;  // frame site 1 = top row, first column

        // hopping amplitudes
        for (int fb = 0; fb < frame.n_bonds(); ++fb) {
            const Bond& bond = frame.bond(fb);
            int col_a = a + frame.col_of(bond.a);
            int col_b = a + frame.col_of(bond.b);
            if (!column_is_interior(w, col_a, M) || !column_is_interior(w, col_b, M)) continue;
            int full_bond;
            if (frame.is_rung_bond(fb)) {
                full_bond = rung_index(M, col_a);
            } else if (frame.row_of(bond.a) == 0) {
                full_bond = top_leg_index(col_a);
            } else {
                full_bond = bottom_leg_index(M, col_a);
            }
            int dist = std::min(column_distance(w, col_a, M), column_distance(w, col_b, M));
            J_cands[static_cast<std::size_t>(full_bond)].push_back(
                {we.config_index, we.window_index, dist,
                 we.estimate.values[static_cast<std::size_t>(fb)], anchor, fb});
        }

        // on-site parameters
        for (int fs = 1; fs <= frame.n_sites(); ++fs) {
            int col = a + frame.col_of(fs);
            if (!column_is_interior(w, col, M)) continue;
            int full_site = frame.row_of(fs) == 0 ? col : M + col;
            int dist = column_distance(w, col, M);
            double u_value =
                we.estimate.values[static_cast<std::size_t>(frame.n_bonds() + fs - 1)];
            U_cands[static_cast<std::size_t>(full_site - 1)].push_back(
                {we.config_index, we.window_index, dist, u_value, anchor, fs - 1});
            double diff = 0.0;  // frame site 1 is its own reference
            if (fs >= 2) {
                diff = we.estimate.values[static_cast<std::size_t>(frame.n_bonds() +
                                                                   frame.n_sites() + fs - 2)];
            }
            mu_cands[static_cast<std::size_t>(full_site - 1)].push_back(
                {we.config_index, we.window_index, dist, diff, anchor, fs - 1});
        }
    }

    auto select = [](std::vector<Candidate>& cands, const std::string& what) -> const Candidate& {
        if (cands.empty()) {
            throw NumericError("scaling: no interior window covers " + what +
                               "; coverage invariant violated");
        }
        std::sort(cands.begin(), cands.end());
        return cands.front();
    };

    MergedEstimate merged;
    merged.params.J.resize(n_bonds);
    merged.params.U.resize(n_sites);
    merged.params.mu.resize(n_sites);
    merged.J_provenance.resize(n_bonds);
    merged.U_provenance.resize(n_sites);
    merged.mu_provenance.resize(n_sites);

    for (std::size_t b = 0; b < n_bonds; ++b) {
        const Candidate& c = select(J_cands[b], full.bond_name(static_cast<int>(b)));
        merged.params.J[b] = c.value;
        merged.J_provenance[b] = {c.config_index, c.window_index, c.distance, c.frame_index};
    }
    for (std::size_t s = 0; s < n_sites; ++s) {
        const Candidate& c = select(U_cands[s], "U" + std::to_string(s + 1));
        merged.params.U[s] = c.value;
        merged.U_provenance[s] = {c.config_index, c.window_index, c.distance, c.frame_index};
    }

    // mu chains through window anchors: mu(site) = mu(anchor of source window)
    // + estimated in-window difference. Anchors sit strictly left of interior
    // sites, so the chain terminates at site 1.
    std::vector<double> mu_value(n_sites, 0.0);
    std::vector<char> mu_done(n_sites, 0);
    auto resolve_mu = [&](auto&& self, std::size_t site_idx, int depth) -> double {
        if (mu_done[site_idx]) return mu_value[site_idx];
        if (depth > static_cast<int>(n_sites)) {
            throw NumericError("scaling: mu anchor chain did not terminate");
        }
        if (site_idx == 0) {
            mu_value[0] = mu_anchor;  // global offset is not observable
            mu_done[0] = 1;
            return mu_anchor;
        }
        const Candidate& c =
            select(mu_cands[site_idx], "mu" + std::to_string(site_idx + 1));
        double base = self(self, static_cast<std::size_t>(c.anchor_site - 1), depth + 1);
        mu_value[site_idx] = base + c.value;
        mu_done[site_idx] = 1;
        merged.mu_provenance[site_idx] = {c.config_index, c.window_index, c.distance,
                                          c.frame_index};
        return mu_value[site_idx];
    };
    for (std::size_t s = 0; s < n_sites; ++s) resolve_mu(resolve_mu, s, 0);
    merged.params.mu = mu_value;
    {
        // provenance for site 1 comes from its own selected source
        const Candidate& c = select(mu_cands[0], "mu1");
        merged.mu_provenance[0] = {c.config_index, c.window_index, c.distance, c.frame_index};
    }

    return merged;
}

}  // namespace bhtomo
