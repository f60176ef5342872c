#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spdefind/grid.hpp"

namespace spdefind {

/// Ensemble of trajectories u_s(t_n, x_j), stored (ensemble, time, space)
/// row-major.
class EnsembleField {
public:
    EnsembleField(std::size_t n_ensembles, Grid1d grid, TimeSpec time, std::uint64_t seed);
    EnsembleField(std::size_t n_ensembles, Grid1d grid, TimeSpec time, std::uint64_t seed,
                  std::vector<double> data);

    [[nodiscard]] std::size_t n_ensembles() const noexcept { return n_ensembles_; }
    [[nodiscard]] std::size_t n_times() const noexcept { return time_.n_steps(); }
    [[nodiscard]] std::size_t n_space() const noexcept { return grid_.size(); }
    [[nodiscard]] const Grid1d& grid() const noexcept { return grid_; }
    [[nodiscard]] const TimeSpec& time() const noexcept { return time_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] std::span<double> slice(std::size_t s, std::size_t n) noexcept {
        return {data_.data() + offset(s, n), n_space()};
    }
    [[nodiscard]] std::span<const double> slice(std::size_t s, std::size_t n) const noexcept {
        return {data_.data() + offset(s, n), n_space()};
    }
    [[nodiscard]] double at(std::size_t s, std::size_t n, std::size_t j) const noexcept {
        return data_[offset(s, n) + j];
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
    [[nodiscard]] std::vector<double>& data() noexcept { return data_; }

    /// Throws NonFinite if any entry is NaN or infinite.
    void check_finite() const;

private:
    [[nodiscard]] std::size_t offset(std::size_t s, std::size_t n) const noexcept {
        return (s * n_times() + n) * n_space();
    }

    std::size_t n_ensembles_;
    Grid1d grid_;
    TimeSpec time_;
    std::uint64_t seed_;
    std::vector<double> data_;
};

// ".fld" files: ASCII header (SPDEFLD 1, ns, nt, nx, dt, dx, seed, end) then
// ns*nt*nx little-endian float64 values.
// The header carries no boundary tag, so the reader takes it from the caller.
void write_field(const std::filesystem::path& path, const EnsembleField& field);
EnsembleField read_field(const std::filesystem::path& path,
                         Boundary boundary = Boundary::Periodic);

}  // namespace spdefind
