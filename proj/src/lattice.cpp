#include "bhtomo/lattice.hpp"

#include <stdexcept>

#include "bhtomo/errors.hpp"

namespace bhtomo {

LatticeGeometry::LatticeGeometry(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows != 2) {
        throw ConfigError("lattice: only the 2-leg ladder is supported, got rows=" +
                          std::to_string(rows));
    }
    if (cols < 2) {
        throw ConfigError("lattice: need cols >= 2, got cols=" + std::to_string(cols));
    }
    bonds_.reserve(static_cast<std::size_t>(3 * cols - 2));
    for (int c = 0; c + 1 < cols; ++c) bonds_.push_back({site_id(0, c), site_id(0, c + 1)});
    for (int c = 0; c + 1 < cols; ++c) bonds_.push_back({site_id(1, c), site_id(1, c + 1)});
    for (int c = 0; c < cols; ++c) bonds_.push_back({site_id(0, c), site_id(1, c)});
}

int LatticeGeometry::site_id(int row, int col) const {
    return row * cols_ + col + 1;
}

std::string LatticeGeometry::bond_name(int k) const {
    const Bond& bd = bond(k);
    return "J(" + std::to_string(bd.a) + "-" + std::to_string(bd.b) + ")";
}

std::string LatticeGeometry::site_name(int s) const {
    return std::to_string(s);
}

LatticeGeometry build_geometry(int rows, int cols) {
    return LatticeGeometry(rows, cols);
}

}  // namespace bhtomo
