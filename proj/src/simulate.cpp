#include "spdefind/simulate.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "spdefind/error.hpp"
#include "spdefind/parallel.hpp"

namespace spdefind {

Eigen::SparseMatrix<double> build_laplacian(const Grid1d& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double scale = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        entries.emplace_back(i, i, -2.0 * scale);
        if (i > 0) entries.emplace_back(i, i - 1, scale);
        if (i + 1 < n) entries.emplace_back(i, i + 1, scale);
    }
    if (grid.boundary() == Boundary::Periodic) {
        entries.emplace_back(0, n - 1, scale);
        entries.emplace_back(n - 1, 0, scale);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t ensemble_index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(ensemble_index + 0x632BE59BD9B4E019ull));
}

struct WienerStream::Impl {
    std::mt19937_64 engine;
    std::normal_distribution<double> normal;
};

WienerStream::WienerStream(std::uint64_t seed, std::uint64_t ensemble_index, double dt)
    : impl_(std::make_unique<Impl>(Impl{std::mt19937_64(substream_seed(seed, ensemble_index)),
                                        std::normal_distribution<double>(0.0, std::sqrt(dt))})) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "Wiener increments need dt > 0");
}

WienerStream::~WienerStream() = default;
WienerStream::WienerStream(WienerStream&&) noexcept = default;
WienerStream& WienerStream::operator=(WienerStream&&) noexcept = default;

void WienerStream::next(std::span<double> out) {
    for (double& v : out) v = impl_->normal(impl_->engine);
}

WienerIncrements sample_wiener(std::size_t n_ensembles, std::size_t n_steps, const Grid1d& grid,
                               double dt, std::uint64_t seed) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "Wiener increments need dt > 0");
    if (n_steps < 2) throw Error(ErrorCode::InvalidArgument, "need at least two time levels");
    WienerIncrements w;
    w.n_ensembles = n_ensembles;
    w.n_increments = n_steps - 1;
    w.n_space = grid.size();
    w.dt = dt;
    w.dw.resize(n_ensembles * w.n_increments * w.n_space);
    parallel_for(n_ensembles, [&](std::size_t s) {
        WienerStream stream(seed, s, dt);
        for (std::size_t n = 0; n < w.n_increments; ++n)
            stream.next({w.dw.data() + (s * w.n_increments + n) * w.n_space, w.n_space});
    });
    return w;
}

struct SemiImplicitStepper::Impl {
    bool identity = true;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

SemiImplicitStepper::SemiImplicitStepper(const Grid1d& grid, double dt, double diffusivity)
    : dt_(dt), impl_(std::make_unique<Impl>()) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
    if (diffusivity < 0.0 || !std::isfinite(diffusivity))
        throw Error(ErrorCode::InvalidArgument, "implicit diffusivity must be >= 0");
    if (diffusivity == 0.0) return;

    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    const Eigen::SparseMatrix<double> system = identity - (dt * diffusivity) * build_laplacian(grid);
    impl_->solver.compute(system);
    if (impl_->solver.info() != Eigen::Success)
        throw Error(ErrorCode::LinearSolveFailure, "factorization of the implicit operator failed");
    impl_->identity = false;
}

SemiImplicitStepper::~SemiImplicitStepper() = default;
SemiImplicitStepper::SemiImplicitStepper(SemiImplicitStepper&&) noexcept = default;
SemiImplicitStepper& SemiImplicitStepper::operator=(SemiImplicitStepper&&) noexcept = default;

void SemiImplicitStepper::step(std::span<double> state, std::span<const double> explicit_rhs,
                               std::span<const double> noise) const {
    const auto n = static_cast<Eigen::Index>(state.size());
    Eigen::Map<Eigen::VectorXd> u(state.data(), n);
    const Eigen::Map<const Eigen::VectorXd> f(explicit_rhs.data(), n);
    const Eigen::Map<const Eigen::VectorXd> w(noise.data(), n);
    if (impl_->identity) {
        u += dt_ * f + w;
        return;
    }
    const Eigen::VectorXd rhs = u + dt_ * f + w;
    u = impl_->solver.solve(rhs);
    if (impl_->solver.info() != Eigen::Success)
        throw Error(ErrorCode::LinearSolveFailure, "implicit solve failed");
}

std::vector<double> step_semi_implicit(std::span<const double> state, const SpdeModel& model,
                                       const Grid1d& grid, double dt,
                                       std::span<const double> dw_row) {
    if (state.size() != grid.size() || dw_row.size() != grid.size())
        throw Error(ErrorCode::InvalidArgument, "state and noise must match the grid");
    const SemiImplicitStepper stepper(grid, dt, model.diffusivity);
    std::vector<double> next(state.begin(), state.end());
    std::vector<double> source(state.size());
    std::vector<double> noise(state.size());
    for (std::size_t j = 0; j < state.size(); ++j) {
        source[j] = model.source(state[j]);
        noise[j] = model.noise_amplitude * dw_row[j];
    }
    stepper.step(next, source, noise);
    return next;
}

EnsembleField simulate_paths(const Grid1d& grid, const TimeSpec& time, std::size_t n_ensembles,
                             std::span<const double> initial_condition, std::uint64_t seed,
                             double implicit_diffusivity, const ExplicitDrift& drift,
                             const NoiseAmplitude& noise, const SimulationOptions& options) {
    const std::size_t nx = grid.size();
    if (initial_condition.size() != nx)
        throw Error(ErrorCode::InvalidArgument, "initial condition must have one value per node");
    EnsembleField field(n_ensembles, grid, time, seed);
    const SemiImplicitStepper stepper(grid, time.dt(), implicit_diffusivity);
    const double noise_scale = options.scale_noise_by_sqrt_dx ? 1.0 / std::sqrt(grid.spacing()) : 1.0;

    parallel_for(n_ensembles, [&](std::size_t s) {
        WienerStream stream(seed, s, time.dt());
        std::vector<double> state(initial_condition.begin(), initial_condition.end());
        std::vector<double> rhs(nx), amplitude(nx), dw(nx);
        auto level0 = field.slice(s, 0);
        std::copy(state.begin(), state.end(), level0.begin());
        for (std::size_t n = 1; n < time.n_steps(); ++n) {
            stream.next(dw);
            drift(state, rhs);
            noise(state, amplitude);
            for (std::size_t j = 0; j < nx; ++j) dw[j] *= amplitude[j] * noise_scale;
            stepper.step(state, rhs, dw);
            for (double v : state) {
                if (!(std::abs(v) <= options.blowup_bound))
                    throw Error(ErrorCode::BlowUp, "state exceeded " + std::to_string(options.blowup_bound) +
                                                       " at step " + std::to_string(n) +
                                                       " (ensemble " + std::to_string(s) + ")");
            }
            auto out = field.slice(s, n);
            std::copy(state.begin(), state.end(), out.begin());
        }
    });
    return field;
}

EnsembleField simulate_ensemble(const SpdeModel& model, const Grid1d& grid, const TimeSpec& time,
                                std::size_t n_ensembles, std::span<const double> initial_condition,
                                std::uint64_t seed, const SimulationOptions& options) {
    model.validate();
    const ExplicitDrift drift = [&model](std::span<const double> u, std::span<double> out) {
        for (std::size_t j = 0; j < u.size(); ++j) out[j] = model.source(u[j]);
    };
    const NoiseAmplitude amplitude = [&model](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), model.noise_amplitude);
    };
    return simulate_paths(grid, time, n_ensembles, initial_condition, seed, model.diffusivity, drift,
                          amplitude, options);
}

EnsembleField simulate_ensemble(const SpdeModel& model, const Grid1d& grid, const TimeSpec& time,
                                std::size_t n_ensembles,
                                const std::function<double(double)>& initial_condition,
                                std::uint64_t seed, const SimulationOptions& options) {
    std::vector<double> u0(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) u0[j] = initial_condition(grid.node(j));
    return simulate_ensemble(model, grid, time, n_ensembles, u0, seed, options);
}

double sigmoid_front(double x) noexcept {
    return 1.0 / (1.0 + std::exp(-(2.0 - x) / std::sqrt(2.0)));
}

}  // namespace spdefind
