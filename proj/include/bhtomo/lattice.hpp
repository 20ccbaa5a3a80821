#pragma once

#include <string>
#include <vector>

namespace bhtomo {

// Nearest-neighbor bond between two sites, stored with a < b (1-based ids).
struct Bond {
    int a = 0;
    int b = 0;
    friend bool operator==(const Bond&, const Bond&) = default;
};

// Quasi-1D two-leg ladder. Canonical site numbering: top row left-to-right is
// 1..L, bottom row is L+1..2L, so the end rungs are (1, L+1) and (L, 2L).
// Bond order: top-leg bonds left-to-right, then bottom-leg bonds, then rungs.
// Immutable after construction.
class LatticeGeometry {
public:
    LatticeGeometry(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int n_sites() const { return rows_ * cols_; }
    int n_bonds() const { return static_cast<int>(bonds_.size()); }

    const std::vector<Bond>& bonds() const { return bonds_; }
    const Bond& bond(int k) const { return bonds_.at(static_cast<std::size_t>(k)); }

    // row in {0 (top), 1 (bottom)}, col in [0, cols); returns 1-based site id.
    int site_id(int row, int col) const;
    int row_of(int site) const { return (site - 1) / cols_; }
    int col_of(int site) const { return (site - 1) % cols_; }

    bool is_leg_bond(int k) const { return k < 2 * (cols_ - 1); }
    bool is_rung_bond(int k) const { return !is_leg_bond(k); }

    std::string bond_name(int k) const;  // "J(1-2)"
    std::string site_name(int s) const;  // "U3" style handled by callers

private:
    int rows_;
    int cols_;
    std::vector<Bond> bonds_;
};

LatticeGeometry build_geometry(int rows, int cols);

}  // namespace bhtomo
