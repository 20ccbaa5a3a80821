#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bhtomo/dynamics.hpp"
#include "bhtomo/hamiltonian.hpp"
#include "bhtomo/nn_estimator.hpp"

namespace bhtomo {

// One contiguous block of columns isolated by suppressed leg bonds.
// full_site_ids lists the member sites of the 2xM lattice in canonical
// window-frame order (top row left-to-right, then bottom row).
struct ScaleWindow {
    int first_col = 1;  // 1-based columns of the full lattice
    int last_col = 1;
    std::vector<int> full_site_ids;
    bool full_width = false;  // width equals the 2x4 estimation frame

    int width() const { return last_col - first_col + 1; }
};

// Cuts for one experimental realization: leg bonds between columns j and j+1
// are suppressed for every j in `cuts`.
struct BoundaryConfig {
    std::vector<int> cuts;
    std::vector<ScaleWindow> windows;
};

// Four boundary configurations, successive ones shifted by one column; every
// parameter of the full lattice is interior to a full-width window (>= 1
// column away from any cut) in at least one configuration.
struct WindowPlan {
    int M = 4;
    int window_width = 4;
    std::vector<BoundaryConfig> configs;
};

WindowPlan plan_windows(int M);

// Interior test used for merging: at least `margin` columns from every cut of
// the window (true lattice edges do not count as cuts).
bool column_is_interior(const ScaleWindow& window, int col, int M, int margin = 1);

struct PartitionedSnapshots {
    std::vector<SnapshotSet> per_window;  // aligned with config.windows
    SnapshotSet full;                     // whole-system measurement rows
};

// Simulates one boundary configuration: each window evolves independently
// under its restricted Hamiltonian (cut bonds carry J = 0 by exclusion),
// initialized with the canonical checkerboard in its own frame, and is
// measured n_shots times. Window rows concatenate into full-lattice rows.
// boundary_perturbation is added to U on cut-adjacent columns to emulate
// the effective-interaction shift near an imposed barrier.
PartitionedSnapshots simulate_partitioned(const LatticeGeometry& full,
                                          const ParameterSet& full_params, const WindowPlan& plan,
                                          int config_index, int n_shots,
                                          double evolution_time, std::uint64_t seed,
                                          double boundary_perturbation = 0.0);

SnapshotSet extract_window(const SnapshotSet& full, const ScaleWindow& window);

struct WindowEstimate {
    int config_index = 0;
    int window_index = 0;
    ParameterEstimate estimate;
};

struct ParamProvenance {
    int config_index = -1;
    int window_index = -1;
    int boundary_distance = 0;  // columns to the nearest cut of the source window
    int frame_index = -1;       // 0-based bond or site index inside the 2x4 frame
};

struct MergedEstimate {
    ParameterSet params;
    std::vector<ParamProvenance> J_provenance;   // per bond
    std::vector<ParamProvenance> U_provenance;   // per site
    std::vector<ParamProvenance> mu_provenance;  // per site
};

// Selects, for every full-lattice parameter, the estimate from a window
// where it is interior (ties: larger boundary distance, then lower
// configuration index, then lower window index). mu values chain through
// window anchors with mu_1 pinned to mu_anchor.
MergedEstimate merge_estimates(const std::vector<WindowEstimate>& estimates,
                               const WindowPlan& plan, const LatticeGeometry& full,
                               double mu_anchor);

}  // namespace bhtomo
