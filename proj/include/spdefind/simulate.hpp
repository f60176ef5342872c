#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "spdefind/field.hpp"
#include "spdefind/grid.hpp"
#include "spdefind/model.hpp"

namespace spdefind {

/// Second-difference operator with rows (1, -2, 1)/dx^2. Periodic grids wrap
/// the corner entries; DirichletZero grids drop them.
Eigen::SparseMatrix<double> build_laplacian(const Grid1d& grid);

/// Seed of the noise stream owned by one ensemble member.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t ensemble_index) noexcept;

/// Gaussian increments with variance dt for a single ensemble member. Draws
/// are consumed one time row at a time.
class WienerStream {
public:
    WienerStream(std::uint64_t seed, std::uint64_t ensemble_index, double dt);
    ~WienerStream();
    WienerStream(WienerStream&&) noexcept;
    WienerStream& operator=(WienerStream&&) noexcept;

    void next(std::span<double> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// dW tensor of shape (n_ensembles, n_steps - 1, n_space).
struct WienerIncrements {
    std::size_t n_ensembles = 0;
    std::size_t n_increments = 0;
    std::size_t n_space = 0;
    double dt = 0.0;
    std::vector<double> dw;

    [[nodiscard]] std::span<const double> row(std::size_t s, std::size_t n) const noexcept {
        return {dw.data() + (s * n_increments + n) * n_space, n_space};
    }
};

/// Same streams that simulate_ensemble consumes, materialized.
WienerIncrements sample_wiener(std::size_t n_ensembles, std::size_t n_steps, const Grid1d& grid,
                               double dt, std::uint64_t seed);

/// Factorizes (I - dt*eps*A) once; each step solves
///   (I - dt*eps*A) u_next = u + dt*explicit_rhs + noise.
class SemiImplicitStepper {
public:
    SemiImplicitStepper(const Grid1d& grid, double dt, double diffusivity);
    ~SemiImplicitStepper();
    SemiImplicitStepper(SemiImplicitStepper&&) noexcept;
    SemiImplicitStepper& operator=(SemiImplicitStepper&&) noexcept;

    [[nodiscard]] double dt() const noexcept { return dt_; }

    /// Overwrites state with the next level. Safe to call concurrently.
    void step(std::span<double> state, std::span<const double> explicit_rhs,
              std::span<const double> noise) const;

private:
    struct Impl;
    double dt_;
    std::unique_ptr<Impl> impl_;
};

/// One step of the model: implicit diffusion, explicit source and noise.
std::vector<double> step_semi_implicit(std::span<const double> state, const SpdeModel& model,
                                       const Grid1d& grid, double dt,
                                       std::span<const double> dw_row);

struct SimulationOptions {
    bool scale_noise_by_sqrt_dx = false;
    double blowup_bound = 1e6;
};

// Explicit drift part: (state, out) -> out = F(state).
using ExplicitDrift = std::function<void(std::span<const double>, std::span<double>)>;
// Pointwise noise amplitude: (state, out) -> out = g(state).
using NoiseAmplitude = std::function<void(std::span<const double>, std::span<double>)>;

/// Generic ensemble integrator shared by data generation and prediction.
/// Each member uses WienerStream(seed, s); members run in parallel.
EnsembleField simulate_paths(const Grid1d& grid, const TimeSpec& time, std::size_t n_ensembles,
                             std::span<const double> initial_condition, std::uint64_t seed,
                             double implicit_diffusivity, const ExplicitDrift& drift,
                             const NoiseAmplitude& noise, const SimulationOptions& options = {});

EnsembleField simulate_ensemble(const SpdeModel& model, const Grid1d& grid, const TimeSpec& time,
                                std::size_t n_ensembles, std::span<const double> initial_condition,
                                std::uint64_t seed, const SimulationOptions& options = {});

EnsembleField simulate_ensemble(const SpdeModel& model, const Grid1d& grid, const TimeSpec& time,
                                std::size_t n_ensembles,
                                const std::function<double(double)>& initial_condition,
                                std::uint64_t seed, const SimulationOptions& options = {});

/// (1 + exp(-(2 - x)/sqrt(2)))^-1, the front used by the benchmark cases.
double sigmoid_front(double x) noexcept;

}  // namespace spdefind
