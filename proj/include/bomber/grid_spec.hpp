#pragma once

#include <cstddef>
#include <sstream>
#include <string>

#include "bomber/errors.hpp"

namespace bomber {

/// Uniform discretization of [0, x_max] x [0, t_max]. Node counts include
/// both endpoints, so x_i = i * dx and t_j = j * dt.
struct GridSpec {
    double x_max = 1.0;
    double t_max = 1.0;
    std::size_t nx = 2;
    std::size_t nt = 2;

    double dx() const { return x_max / static_cast<double>(nx - 1); }
    double dt() const { return t_max / static_cast<double>(nt - 1); }
    double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
    double t(std::size_t j) const { return static_cast<double>(j) * dt(); }
    std::size_t size() const { return nx * nt; }

    void validate() const {
        if (!(x_max > 0.0) || !(t_max > 0.0)) {
            throw UsageError("grid extents must be positive");
        }
        if (nx < 2 || nt < 2) {
            throw UsageError("grid needs at least two nodes per axis");
        }
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Renders as the CLI grammar `XxT:NXxNT`.
inline std::string to_string(const GridSpec& g) {
    std::ostringstream os;
    os.precision(17);
    os << g.x_max << 'x' << g.t_max << ':' << g.nx << 'x' << g.nt;
    return os.str();
}

}  // namespace bomber
