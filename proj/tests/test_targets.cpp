#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spdefind/features.hpp"
#include "spdefind/simulate.hpp"
#include "spdefind/targets.hpp"

using namespace spdefind;

namespace {

EnsembleField pure_noise(double sigma, std::size_t ns, std::uint64_t seed) {
    const Grid1d g(20.0, 64, Boundary::Periodic);
    const SpdeModel m{"noise", 0.0, sigma, {}};
    return simulate_ensemble(m, g, TimeSpec(0.1, 0.0025), ns, [](double) { return 0.0; }, seed);
}

}  // namespace

TEST_CASE("constant drift is recovered exactly") {
    const Grid1d g(20.0, 4, Boundary::Periodic);
    const SpdeModel m{"shift", 0.0, 0.0, {{0, 2.0}}};
    const auto f = simulate_ensemble(m, g, TimeSpec(0.1, 0.0025), 3, [](double) { return 0.5; }, 1);
    const auto y = build_targets(f);
    CHECK(y.drift.size() == 4 * 40);
    for (Eigen::Index i = 0; i < y.drift.size(); ++i) {
        CHECK(y.drift(i) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(y.diffusion(i) == doctest::Approx(4.0 * 0.0025).epsilon(1e-9));
    }
}

TEST_CASE("constant field under noiseless heat has zero targets") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const SpdeModel m{"heat", 1.0, 0.0, {}};
    const auto f = simulate_ensemble(m, g, TimeSpec(0.05, 0.0025), 2, [](double) { return 1.5; }, 1);
    CHECK(drift_target(f).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pure noise calibration") {
    const std::size_t ns = 2000;
    for (double sigma : {0.5, 1.0, 2.0}) {
        const auto f = pure_noise(sigma, ns, 9);
        const auto y = build_targets(f);
        const double dt = f.time().dt();
        const auto n = static_cast<double>(y.drift.size());
        // Each row mean averages ns draws of sigma*dW/dt.
        const double drift_se = sigma / std::sqrt(static_cast<double>(ns) * dt) / std::sqrt(n);
        CHECK(std::abs(y.drift.mean()) < 3.0 * drift_se);
        const double diff_se = std::sqrt(2.0) * sigma * sigma / std::sqrt(static_cast<double>(ns) * n);
        CHECK(std::abs(y.diffusion.mean() - sigma * sigma) < 3.0 * diff_se);
    }
}

TEST_CASE("sigma = 2 gives a diffusion target near four") {
    const auto y = build_targets(pure_noise(2.0, 2000, 4));
    CHECK(y.diffusion.mean() == doctest::Approx(4.0).epsilon(0.01));
    CHECK(y.diffusion.mean() >= 0.0);
}

TEST_CASE("drift target is linear and diffusion target is even") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const TimeSpec t(0.05, 0.0025);
    const auto f = simulate_ensemble(allen_cahn_model(), g, t, 5, sigmoid_front, 8);
    std::vector<double> scaled = f.data(), flipped = f.data();
    for (auto& v : scaled) v *= 3.0;
    for (auto& v : flipped) v = -v;
    const EnsembleField fs(5, g, t, 8, scaled), ff(5, g, t, 8, flipped);
    const auto y = build_targets(f);
    CHECK((drift_target(fs) - 3.0 * y.drift).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((diffusion_target(ff) - y.diffusion).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("target rows line up with dictionary rows") {
    const Grid1d g(20.0, 8, Boundary::Periodic);
    const TimeSpec t(0.02, 0.0025);
    const auto f = simulate_ensemble(heat_model(), g, t, 1, sigmoid_front, 3);
    const auto y = drift_target(f);
    const Dictionary d = build_dictionary(f, std::vector<TermDescriptor>{{1, 0}});
    const auto layout = RowLayout::for_field(f);
    for (std::size_t row = 0; row < layout.rows(); ++row) {
        const auto n = layout.time_of(row), j = layout.space_of(row);
        const auto r = static_cast<Eigen::Index>(row);
        CHECK(d.matrix(r, 0) == f.at(0, n, j));
        CHECK(y(r) == doctest::Approx((f.at(0, n + 1, j) - f.at(0, n, j)) / t.dt()));
    }
}

TEST_CASE("target csv export") {
    const auto path = std::filesystem::temp_directory_path() / "spdefind_target.csv";
    Eigen::VectorXd v(3);
    v << 0.5, -1.0, 2.25;
    write_target_csv(path, v);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "row_index,value");
    std::getline(in, line);
    CHECK(line.rfind("0,0.5", 0) == 0);
    std::filesystem::remove(path);
}
