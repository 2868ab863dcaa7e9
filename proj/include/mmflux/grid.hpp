#pragma once

#include <cstddef>
#include <stdexcept>

namespace mmflux {

/// Uniform cell-centered grid on [x_lo, x_hi]. Two ghost cells per side hold
/// the far-field states; they are not stored with the field.
struct Grid1D {
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::size_t n_cells = 1;
    static constexpr std::size_t kGhosts = 2;

    Grid1D() = default;
    Grid1D(double lo, double hi, std::size_t n) : x_lo(lo), x_hi(hi), n_cells(n) {
        if (!(hi > lo) || n == 0) throw std::invalid_argument("Grid1D needs x_hi > x_lo and n_cells > 0");
    }

    double dx() const { return (x_hi - x_lo) / static_cast<double>(n_cells); }
    double center(std::size_t i) const { return x_lo + (static_cast<double>(i) + 0.5) * dx(); }
    double left_edge(std::size_t i) const { return x_lo + static_cast<double>(i) * dx(); }
    double right_edge(std::size_t i) const { return x_lo + static_cast<double>(i + 1) * dx(); }

    bool operator==(const Grid1D&) const = default;
};

}  // namespace mmflux
