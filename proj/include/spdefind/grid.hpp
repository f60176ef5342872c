#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace spdefind {

enum class Boundary { Periodic, DirichletZero };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Uniform 1D grid on (0, L).
///
/// Periodic grids place N nodes at x_j = j*dx with dx = L/N; the node at L is
/// identified with the node at 0. DirichletZero grids hold N interior nodes at
/// x_j = (j+1)*dx with dx = L/(N+1); the boundary values are zero.
class Grid1d {
public:
    Grid1d(double length, std::size_t n_nodes, Boundary boundary);

    /// Grid whose spacing is exactly dx (length is derived from it).
    static Grid1d from_spacing(double dx, std::size_t n_nodes, Boundary boundary);

    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_nodes_; }
    [[nodiscard]] double spacing() const noexcept { return spacing_; }
    [[nodiscard]] Boundary boundary() const noexcept { return boundary_; }

    [[nodiscard]] double node(std::size_t j) const noexcept;
    [[nodiscard]] std::vector<double> nodes() const;

private:
    double length_;
    std::size_t n_nodes_;
    Boundary boundary_;
    double spacing_;
};

/// Sampling of [0, T] with N_t = round(T/dt) + 1 stored time levels.
class TimeSpec {
public:
    TimeSpec(double horizon, double dt);

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t n_steps() const noexcept { return n_steps_; }

private:
    double horizon_;
    double dt_;
    std::size_t n_steps_;
};

}  // namespace spdefind
