#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdefind/field.hpp"
#include "spdefind/grid.hpp"

namespace spdefind {

inline constexpr int kMaxDerivativeOrder = 5;

/// Regression rows enumerate (n, j) for n in [0, N_t - 2], time-major.
/// Dictionary and target builders both go through this mapping.
struct RowLayout {
    std::size_t n_space = 0;
    std::size_t n_time_rows = 0;

    [[nodiscard]] static RowLayout for_field(const EnsembleField& field) noexcept {
        return {field.n_space(), field.n_times() - 1};
    }
    [[nodiscard]] std::size_t rows() const noexcept { return n_space * n_time_rows; }
    [[nodiscard]] std::size_t row(std::size_t n, std::size_t j) const noexcept {
        return n * n_space + j;
    }
    [[nodiscard]] std::size_t time_of(std::size_t row) const noexcept { return row / n_space; }
    [[nodiscard]] std::size_t space_of(std::size_t row) const noexcept { return row % n_space; }
};

/// Central differences of second-order accuracy. Orders 1 and 2 use the
/// 3-point stencils; higher orders compose them (3 = 1∘2, 4 = 2∘2, 5 = 1∘4).
/// Periodic grids wrap, DirichletZero grids use zero ghost values.
std::vector<double> spatial_derivative(std::span<const double> values, const Grid1d& grid,
                                       int order);

/// Candidate term u^p * d^d u / dx^d. (0, 0) is the constant function.
struct TermDescriptor {
    int poly_power = 0;
    int deriv_order = 0;

    [[nodiscard]] bool is_constant() const noexcept { return poly_power == 0 && deriv_order == 0; }
    [[nodiscard]] bool is_product() const noexcept { return poly_power > 0 && deriv_order > 0; }

    friend bool operator==(const TermDescriptor&, const TermDescriptor&) = default;
};

/// Constant, u^1..u^P, derivatives 1..Dm, then (optionally) u^p * d^d u in
/// p-major order.
std::vector<TermDescriptor> generate_terms(int poly_max, int deriv_max, bool include_products);

/// "1", "u", "u^3", "u_xx", "u^2*u_x", ...
std::string term_name(const TermDescriptor& term);
/// Inverse of term_name. Throws InvalidArgument on malformed names.
TermDescriptor parse_term_name(const std::string& name);

/// Evaluates every term on one spatial slice. out is (n_space x n_terms)
/// column-major, i.e. term k occupies out[k*n_space, (k+1)*n_space).
void evaluate_terms(std::span<const double> values, const Grid1d& grid,
                    std::span<const TermDescriptor> terms, std::span<double> out);

struct Dictionary {
    Eigen::MatrixXd matrix;
    std::vector<TermDescriptor> terms;
    // Column scale factors when standardized (all ones otherwise); a
    // coefficient on the stored column equals scale * coefficient on the raw term.
    Eigen::VectorXd column_scale;

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(matrix.cols()); }
    [[nodiscard]] std::vector<std::string> names() const;
};

/// Ensemble mean of the per-member dictionaries at time levels 0..N_t-2.
/// Throws NonFinite if any evaluated entry overflows.
Dictionary build_dictionary(const EnsembleField& field, std::span<const TermDescriptor> terms);

/// Divides each non-constant column by its standard deviation.
void standardize_columns(Dictionary& dict);

// ".dic" files: ASCII header (SPDEDIC 1, n, k, term <name>..., end) then
// column-major little-endian float64 payload.
void write_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary read_dictionary(const std::filesystem::path& path);

}  // namespace spdefind
