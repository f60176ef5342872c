#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "spdefind/error.hpp"
#include "spdefind/features.hpp"
#include "spdefind/simulate.hpp"

using namespace spdefind;

namespace {

std::vector<double> sine(const Grid1d& g) {
    std::vector<double> u(g.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sin(2.0 * std::numbers::pi * g.node(j) / g.length());
    return u;
}

double max_error(int order, std::size_t nx) {
    const double length = 20.0;
    const Grid1d g(length, nx, Boundary::Periodic);
    const double k = 2.0 * std::numbers::pi / length;
    const auto d = spatial_derivative(sine(g), g, order);
    double e = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
        const double x = g.node(j);
        const double exact = order == 1 ? k * std::cos(k * x) : -k * k * std::sin(k * x);
        e = std::max(e, std::abs(d[j] - exact));
    }
    return e;
}

}  // namespace

TEST_CASE("derivatives of a constant vanish") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const std::vector<double> c(16, 3.5);
    for (int order = 1; order <= 5; ++order)
        for (double v : spatial_derivative(c, g, order)) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("first derivative of a sine is within the stencil bound") {
    const double length = 20.0;
    const Grid1d g(length, 64, Boundary::Periodic);
    const double k = 2.0 * std::numbers::pi / length;
    CHECK(max_error(1, 64) < k * k * k * g.spacing() * g.spacing());
}

TEST_CASE("second derivative of a sine is exactly the discrete eigenvalue") {
    const double length = 20.0;
    const Grid1d g(length, 64, Boundary::Periodic);
    const double dx = g.spacing();
    const double lambda = (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * dx / length)) / (dx * dx);
    const auto u = sine(g);
    const auto d = spatial_derivative(u, g, 2);
    for (std::size_t j = 0; j < u.size(); ++j) CHECK(d[j] == doctest::Approx(-lambda * u[j]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("second-order convergence for orders one and two") {
    for (int order : {1, 2}) {
        const double r1 = max_error(order, 64) / max_error(order, 128);
        const double r2 = max_error(order, 128) / max_error(order, 256);
        CHECK(r1 == doctest::Approx(4.0).epsilon(0.15));
        CHECK(r2 == doctest::Approx(4.0).epsilon(0.15));
    }
}

TEST_CASE("dirichlet derivative uses zero ghosts") {
    const Grid1d g(4.0, 3, Boundary::DirichletZero);
    const auto d = spatial_derivative(std::vector<double>{1.0, 2.0, 3.0}, g, 2);
    CHECK(d[0] == doctest::Approx(0.0 - 2.0 + 2.0));
    CHECK(d[1] == doctest::Approx(1.0 - 4.0 + 3.0));
    CHECK(d[2] == doctest::Approx(2.0 - 6.0 + 0.0));
}

TEST_CASE("order above five is rejected") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    try {
        (void)spatial_derivative(std::vector<double>(16, 0.0), g, 6);
        FAIL("expected UnsupportedOrder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedOrder);
    }
}

TEST_CASE("term enumeration") {
    const auto small = generate_terms(1, 1, true);
    REQUIRE(small.size() == 4);
    CHECK(term_name(small[0]) == "1");
    CHECK(term_name(small[1]) == "u");
    CHECK(term_name(small[2]) == "u_x");
    CHECK(term_name(small[3]) == "u*u_x");
    CHECK(generate_terms(5, 5, true).size() == 36);
    CHECK(generate_terms(6, 5, true).size() == 42);
    CHECK(generate_terms(6, 4, true).size() == 35);
    CHECK(generate_terms(6, 5, false).size() == 12);

    const auto terms = generate_terms(6, 5, true);
    CHECK(term_name(terms[7]) == "u_x");
    CHECK(term_name(terms[12]) == "u*u_x");
    CHECK(term_name(terms[41]) == "u^6*u_xxxxx");
}

TEST_CASE("term names round trip") {
    CHECK(term_name({0, 0}) == "1");
    CHECK(term_name({3, 0}) == "u^3");
    CHECK(term_name({1, 2}) == "u*u_xx");
    CHECK(term_name({0, 4}) == "u_xxxx");
    for (const auto& t : generate_terms(6, 5, true)) CHECK(parse_term_name(term_name(t)) == t);
    CHECK_THROWS_AS((void)parse_term_name("u^^2"), Error);
    CHECK_THROWS_AS((void)parse_term_name("v"), Error);
}

TEST_CASE("dictionary of a single member is pointwise evaluation") {
    const Grid1d g = Grid1d::from_spacing(1.0, 3, Boundary::Periodic);
    const TimeSpec t(1.0, 1.0);
    EnsembleField f(1, g, t, 0, {1.0, 2.0, 3.0, 0.0, 0.0, 0.0});
    const std::vector<TermDescriptor> terms{{0, 0}, {1, 0}, {2, 0}};
    const Dictionary d = build_dictionary(f, terms);
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 1, 1, 1, 2, 4, 1, 3, 9;
    CHECK(d.matrix == expected);
}

TEST_CASE("ensemble averaging symmetry") {
    const Grid1d g(20.0, 8, Boundary::Periodic);
    const TimeSpec t(0.01, 0.01);
    std::vector<double> data(2 * 2 * 8, 0.0);
    for (std::size_t j = 0; j < 8; ++j) {
        const double v = 0.3 + 0.1 * static_cast<double>(j);
        data[j] = v;
        data[16 + j] = -v;
    }
    EnsembleField f(2, g, t, 0, data);
    const Dictionary d = build_dictionary(f, std::vector<TermDescriptor>{{1, 0}, {2, 0}});
    for (std::size_t j = 0; j < 8; ++j) {
        const double v = data[j];
        CHECK(d.matrix(static_cast<Eigen::Index>(j), 0) == doctest::Approx(0.0));
        CHECK(d.matrix(static_cast<Eigen::Index>(j), 1) == doctest::Approx(v * v));
    }
}

TEST_CASE("dictionary commutes with ensemble concatenation") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const TimeSpec t(0.05, 0.0025);
    const auto full = simulate_ensemble(allen_cahn_model(), g, t, 6, sigmoid_front, 5);
    const std::size_t half = full.data().size() / 2;
    const EnsembleField a(3, g, t, 5, {full.data().begin(), full.data().begin() + static_cast<long>(half)});
    const EnsembleField b(3, g, t, 5, {full.data().begin() + static_cast<long>(half), full.data().end()});
    const auto terms = generate_terms(3, 3, true);
    const Dictionary df = build_dictionary(full, terms);
    const Dictionary da = build_dictionary(a, terms);
    const Dictionary db = build_dictionary(b, terms);
    const Eigen::MatrixXd avg = 0.5 * (da.matrix + db.matrix);
    CHECK((avg - df.matrix).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + df.matrix.cwiseAbs().maxCoeff()));
    CHECK(df.matrix.col(0).isOnes());
}

TEST_CASE("row layout round trip") {
    const RowLayout layout{64, 400};
    CHECK(layout.rows() == 25600);
    for (std::size_t row : {0ul, 63ul, 64ul, 12345ul, 25599ul})
        CHECK(layout.row(layout.time_of(row), layout.space_of(row)) == row);
}

TEST_CASE("benchmark dictionary shape") {
    const Grid1d g(20.0, 64, Boundary::Periodic);
    const TimeSpec t(1.0, 0.0025);
    const auto f = simulate_ensemble(allen_cahn_model(), g, t, 4, sigmoid_front, 42);
    const Dictionary d = build_dictionary(f, generate_terms(6, 5, true));
    CHECK(d.rows() == 64 * 400);
    CHECK(d.cols() == 42);
    CHECK(d.matrix.allFinite());
}

TEST_CASE("standardized columns have unit spread and keep the constant") {
    const Grid1d g(20.0, 16, Boundary::Periodic);
    const auto f = simulate_ensemble(allen_cahn_model(), g, TimeSpec(0.05, 0.0025), 4, sigmoid_front, 1);
    Dictionary d = build_dictionary(f, generate_terms(2, 2, false));
    const Eigen::MatrixXd raw = d.matrix;
    standardize_columns(d);
    CHECK(d.matrix.col(0).isOnes());
    for (Eigen::Index k = 1; k < d.matrix.cols(); ++k) {
        const Eigen::VectorXd c = d.matrix.col(k).array() - d.matrix.col(k).mean();
        CHECK(std::sqrt(c.squaredNorm() / static_cast<double>(c.size())) == doctest::Approx(1.0));
        CHECK((d.matrix.col(k) * d.column_scale(k) - raw.col(k)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dictionary file round trip") {
    const Grid1d g(20.0, 8, Boundary::Periodic);
    const auto f = simulate_ensemble(heat_model(), g, TimeSpec(0.02, 0.0025), 3, sigmoid_front, 2);
    const Dictionary d = build_dictionary(f, generate_terms(2, 2, true));
    const auto path = std::filesystem::temp_directory_path() / "spdefind_test.dic";
    write_dictionary(path, d);
    const Dictionary r = read_dictionary(path);
    CHECK(r.matrix == d.matrix);
    CHECK(r.terms == d.terms);
    std::filesystem::remove(path);
}
