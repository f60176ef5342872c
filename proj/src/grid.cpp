#include "spdefind/grid.hpp"

#include <cmath>

#include "spdefind/error.hpp"

namespace spdefind {

std::string to_string(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "dirichlet";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::Periodic;
    if (s == "dirichlet" || s == "dirichlet-zero") return Boundary::DirichletZero;
    throw Error(ErrorCode::InvalidArgument, "unknown boundary '" + s + "'");
}

Grid1d::Grid1d(double length, std::size_t n_nodes, Boundary boundary)
    : length_(length), n_nodes_(n_nodes), boundary_(boundary) {
    if (n_nodes < 3) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 nodes");
    if (!(length > 0.0) || !std::isfinite(length))
        throw Error(ErrorCode::InvalidArgument, "grid length must be positive");
    const double cells = boundary == Boundary::Periodic ? static_cast<double>(n_nodes)
                                                        : static_cast<double>(n_nodes + 1);
    spacing_ = length / cells;
}

Grid1d Grid1d::from_spacing(double dx, std::size_t n_nodes, Boundary boundary) {
    const double cells = boundary == Boundary::Periodic ? static_cast<double>(n_nodes)
                                                        : static_cast<double>(n_nodes + 1);
    Grid1d grid(dx * cells, n_nodes, boundary);
    grid.spacing_ = dx;
    return grid;
}

double Grid1d::node(std::size_t j) const noexcept {
    const double offset = boundary_ == Boundary::Periodic ? 0.0 : 1.0;
    return (static_cast<double>(j) + offset) * spacing_;
}

std::vector<double> Grid1d::nodes() const {
    std::vector<double> x(n_nodes_);
    for (std::size_t j = 0; j < n_nodes_; ++j) x[j] = node(j);
    return x;
}

TimeSpec::TimeSpec(double horizon, double dt) : horizon_(horizon), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw Error(ErrorCode::InvalidArgument, "time step must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw Error(ErrorCode::InvalidArgument, "time horizon must be positive");
    const double steps = std::round(horizon / dt);
    if (steps < 1.0) throw Error(ErrorCode::InvalidArgument, "time horizon shorter than one step");
    n_steps_ = static_cast<std::size_t>(steps) + 1;
}

}  // namespace spdefind
