#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "spdefind/error.hpp"
#include "spdefind/parallel.hpp"
#include "spdefind/simulate.hpp"

using namespace spdefind;

TEST_CASE("dirichlet laplacian on three nodes") {
    const Grid1d g(4.0, 3, Boundary::DirichletZero);
    REQUIRE(g.spacing() == doctest::Approx(1.0));
    const Eigen::MatrixXd a = Eigen::MatrixXd(build_laplacian(g));
    Eigen::MatrixXd expected(3, 3);
    expected << -2, 1, 0, 1, -2, 1, 0, 1, -2;
    CHECK((a - expected).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    CHECK(eig.eigenvalues().maxCoeff() < 0.0);
}

TEST_CASE("periodic laplacian closure and symmetry") {
    const Eigen::MatrixXd a = Eigen::MatrixXd(build_laplacian(Grid1d(4.0, 4, Boundary::Periodic)));
    Eigen::RowVectorXd row0(4);
    row0 << -2, 1, 0, 1;
    CHECK(a.row(0) == row0);
    for (int i = 0; i < 4; ++i) CHECK(a.row(i).sum() == 0.0);
    CHECK(a == a.transpose());
}

TEST_CASE("halving the spacing scales the laplacian by four") {
    const Eigen::MatrixXd a1 = Eigen::MatrixXd(build_laplacian(Grid1d(4.0, 4, Boundary::Periodic)));
    const Eigen::MatrixXd a2 = Eigen::MatrixXd(build_laplacian(Grid1d(2.0, 4, Boundary::Periodic)));
    CHECK((a2 - 4.0 * a1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("wiener increments have variance dt") {
    const Grid1d g(20.0, 64, Boundary::Periodic);
    const double dt = 0.0025;
    const auto w = sample_wiener(2000, 11, g, dt, 42);
    const double n = static_cast<double>(w.dw.size());
    const double mean = std::accumulate(w.dw.begin(), w.dw.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : w.dw) ss += (v - mean) * (v - mean);
    const double var = ss / (n - 1.0);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(dt / n));
    CHECK(var == doctest::Approx(dt).epsilon(0.05));

    const auto again = sample_wiener(2000, 11, g, dt, 42);
    CHECK(again.dw == w.dw);
}

TEST_CASE("semi-implicit step reductions") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const std::vector<double> zero(16, 0.0);

    SUBCASE("constant state is a fixed point of pure diffusion") {
        const SpdeModel m{"d", 1.0, 0.0, {}};
        const std::vector<double> c(16, 0.7);
        const auto next = step_semi_implicit(c, m, g, 0.01, zero);
        for (double v : next) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
    }
    SUBCASE("eps = 0 adds the noise row") {
        const SpdeModel m{"n", 0.0, 2.0, {}};
        std::vector<double> u(16), dw(16);
        for (int j = 0; j < 16; ++j) {
            u[j] = 0.1 * j;
            dw[j] = 0.01 * (j - 8);
        }
        const auto next = step_semi_implicit(u, m, g, 0.01, dw);
        for (int j = 0; j < 16; ++j) CHECK(next[j] == doctest::Approx(u[j] + 2.0 * dw[j]).epsilon(1e-14));
    }
}

TEST_CASE("one implicit step damps a fourier mode by the discrete eigenvalue") {
    const double length = 20.0;
    const Grid1d g(length, 64, Boundary::Periodic);
    const double dx = g.spacing();
    const double dt = 0.0025;
    const double lambda = (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * dx / length)) / (dx * dx);
    const SpdeModel m{"d", 1.0, 0.0, {}};
    std::vector<double> u(64);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sin(2.0 * std::numbers::pi * g.node(j) / length);
    const auto next = step_semi_implicit(u, m, g, dt, std::vector<double>(64, 0.0));
    const double factor = 1.0 / (1.0 + lambda * dt);
    for (std::size_t j = 0; j < u.size(); ++j) CHECK(next[j] == doctest::Approx(factor * u[j]).epsilon(1e-12));
}

TEST_CASE("members use independent streams and runs are reproducible") {
    const Grid1d g(20.0, 32, Boundary::Periodic);
    const TimeSpec t(0.05, 0.0025);
    const auto a = simulate_ensemble(heat_model(), g, t, 2, sigmoid_front, 7);
    const auto b = simulate_ensemble(heat_model(), g, t, 2, sigmoid_front, 7);
    CHECK(a.data() == b.data());
    bool differ = false;
    for (std::size_t j = 0; j < 32; ++j) differ |= a.at(0, t.n_steps() - 1, j) != a.at(1, t.n_steps() - 1, j);
    CHECK(differ);
}

TEST_CASE("results do not depend on the worker count") {
    const Grid1d g(20.0, 32, Boundary::Periodic);
    const TimeSpec t(0.1, 0.0025);
    const auto a = simulate_ensemble(allen_cahn_model(), g, t, 8, sigmoid_front, 3);
    setenv("SPDEFIND_THREADS", "1", 1);
    const auto b = simulate_ensemble(allen_cahn_model(), g, t, 8, sigmoid_front, 3);
    unsetenv("SPDEFIND_THREADS");
    CHECK(a.data() == b.data());
}

TEST_CASE("spatial mean of the heat equation is a martingale") {
    const std::size_t nx = 64, ns = 500;
    const Grid1d g(20.0, nx, Boundary::Periodic);
    const TimeSpec t(1.0, 0.0025);
    const auto f = simulate_ensemble(heat_model(), g, t, ns, sigmoid_front, 11);
    auto spatial_mean = [&](std::size_t s, std::size_t n) {
        const auto row = f.slice(s, n);
        return std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(nx);
    };
    double start = 0.0, end = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
        start += spatial_mean(s, 0);
        end += spatial_mean(s, t.n_steps() - 1);
    }
    start /= ns;
    end /= ns;
    const double se = std::sqrt(1.0 * 1.0 * t.horizon() / static_cast<double>(nx) / static_cast<double>(ns));
    CHECK(std::abs(end - start) < 3.0 * se);
}

TEST_CASE("benchmark configurations stay bounded") {
    const Grid1d g(20.0, 64, Boundary::Periodic);
    for (const auto& [model, dt] : {std::pair{heat_model(), 0.0025}, std::pair{allen_cahn_model(), 0.0025},
                                    std::pair{nagumo_model(), 0.001}}) {
        const auto f = simulate_ensemble(model, g, TimeSpec(1.0, dt), 20, sigmoid_front, 42);
        double peak = 0.0;
        for (double v : f.data()) peak = std::max(peak, std::abs(v));
        CHECK_MESSAGE(peak < 10.0, model.name);
    }
}

TEST_CASE("deterministic semi-implicit run tracks a fine explicit reference") {
    const Grid1d g(20.0, 32, Boundary::Periodic);
    const SpdeModel m{"ac", 1.0, 0.0, {{1, 1.0}, {3, -1.0}}};
    const double horizon = 0.5;
    auto run_semi = [&](double dt) {
        const auto f = simulate_ensemble(m, g, TimeSpec(horizon, dt), 1, sigmoid_front, 1);
        return std::vector<double>(f.slice(0, f.n_times() - 1).begin(), f.slice(0, f.n_times() - 1).end());
    };
    std::vector<double> ref(32);
    for (std::size_t j = 0; j < 32; ++j) ref[j] = sigmoid_front(g.node(j));
    const Eigen::SparseMatrix<double> a = build_laplacian(g);
    const double fine = 1e-5;
    for (int n = 0; n < static_cast<int>(std::lround(horizon / fine)); ++n) {
        const Eigen::Map<const Eigen::VectorXd> u(ref.data(), 32);
        const Eigen::VectorXd lap = a * u;
        for (std::size_t j = 0; j < 32; ++j) ref[j] += fine * (lap(j) + m.source(ref[j]));
    }
    auto err = [&](const std::vector<double>& u) {
        double e = 0.0;
        for (std::size_t j = 0; j < 32; ++j) e = std::max(e, std::abs(u[j] - ref[j]));
        return e;
    };
    const double e1 = err(run_semi(0.01));
    const double e2 = err(run_semi(0.005));
    CHECK(e1 < 0.05);
    CHECK(e2 < e1);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("divergent dynamics raise BlowUp") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const SpdeModel m{"cubic", 0.0, 0.0, {{3, 1.0}}};
    SimulationOptions opt;
    opt.blowup_bound = 100.0;
    try {
        (void)simulate_ensemble(m, g, TimeSpec(5.0, 0.01), 1, [](double) { return 2.0; }, 1, opt);
        FAIL("expected BlowUp");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BlowUp);
    }
}

TEST_CASE("parallel_for visits each index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
