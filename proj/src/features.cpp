#include "spdefind/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdefind/error.hpp"
#include "spdefind/parallel.hpp"

namespace spdefind {

namespace {

// Neighbour values with the grid's boundary closure.
struct Neighbours {
    std::span<const double> u;
    bool periodic;

    [[nodiscard]] double left(std::size_t j) const noexcept {
        if (j > 0) return u[j - 1];
        return periodic ? u[u.size() - 1] : 0.0;
    }
    [[nodiscard]] double right(std::size_t j) const noexcept {
        if (j + 1 < u.size()) return u[j + 1];
        return periodic ? u[0] : 0.0;
    }
};

void first_difference(std::span<const double> u, const Grid1d& grid, std::span<double> out) {
    const Neighbours nb{u, grid.boundary() == Boundary::Periodic};
    const double inv = 0.5 / grid.spacing();
    for (std::size_t j = 0; j < u.size(); ++j) out[j] = (nb.right(j) - nb.left(j)) * inv;
}

void second_difference(std::span<const double> u, const Grid1d& grid, std::span<double> out) {
    const Neighbours nb{u, grid.boundary() == Boundary::Periodic};
    const double inv = 1.0 / (grid.spacing() * grid.spacing());
    for (std::size_t j = 0; j < u.size(); ++j) out[j] = (nb.right(j) - 2.0 * u[j] + nb.left(j)) * inv;
}

// derivs[d-1] receives the order-d derivative for d = 1..max_order.
void derivative_stack(std::span<const double> u, const Grid1d& grid, int max_order,
                      std::vector<std::vector<double>>& derivs) {
    const std::size_t n = u.size();
    derivs.resize(static_cast<std::size_t>(max_order));
    for (auto& d : derivs) d.resize(n);
    if (max_order >= 1) first_difference(u, grid, derivs[0]);
    if (max_order >= 2) second_difference(u, grid, derivs[1]);
    if (max_order >= 3) first_difference(derivs[1], grid, derivs[2]);
    if (max_order >= 4) second_difference(derivs[1], grid, derivs[3]);
    if (max_order >= 5) first_difference(derivs[3], grid, derivs[4]);
}

void check_order(int order) {
    if (order < 1 || order > kMaxDerivativeOrder)
        throw Error(ErrorCode::UnsupportedOrder,
                    "derivative order " + std::to_string(order) + " not in 1..5");
}

}  // namespace

std::vector<double> spatial_derivative(std::span<const double> values, const Grid1d& grid,
                                       int order) {
    check_order(order);
    if (values.size() != grid.size())
        throw Error(ErrorCode::InvalidArgument, "slice length does not match the grid");
    std::vector<std::vector<double>> derivs;
    derivative_stack(values, grid, order, derivs);
    return std::move(derivs[static_cast<std::size_t>(order - 1)]);
}

std::vector<TermDescriptor> generate_terms(int poly_max, int deriv_max, bool include_products) {
    if (poly_max < 1 || deriv_max < 1)
        throw Error(ErrorCode::InvalidArgument, "polynomial and derivative orders must be >= 1");
    check_order(deriv_max);
    std::vector<TermDescriptor> terms;
    terms.push_back({0, 0});
    for (int p = 1; p <= poly_max; ++p) terms.push_back({p, 0});
    for (int d = 1; d <= deriv_max; ++d) terms.push_back({0, d});
    if (include_products)
        for (int p = 1; p <= poly_max; ++p)
            for (int d = 1; d <= deriv_max; ++d) terms.push_back({p, d});
    return terms;
}

std::string term_name(const TermDescriptor& term) {
    if (term.is_constant()) return "1";
    std::string poly;
    if (term.poly_power == 1) poly = "u";
    else if (term.poly_power > 1) poly = "u^" + std::to_string(term.poly_power);
    std::string deriv;
    if (term.deriv_order > 0) deriv = "u_" + std::string(static_cast<std::size_t>(term.deriv_order), 'x');
    if (poly.empty()) return deriv;
    if (deriv.empty()) return poly;
    return poly + "*" + deriv;
}

TermDescriptor parse_term_name(const std::string& name) {
    auto fail = [&] { return Error(ErrorCode::InvalidArgument, "malformed term name '" + name + "'"); };
    if (name == "1") return {0, 0};

    auto parse_poly = [&](const std::string& s) -> int {
        if (s == "u") return 1;
        if (s.size() > 2 && s.rfind("u^", 0) == 0) {
            const std::string digits = s.substr(2);
            if (digits.find_first_not_of("0123456789") != std::string::npos) throw fail();
            const int p = std::stoi(digits);
            if (p < 2) throw fail();
            return p;
        }
        return -1;
    };
    auto parse_deriv = [&](const std::string& s) -> int {
        if (s.size() < 3 || s.rfind("u_", 0) != 0) return -1;
        const std::string xs = s.substr(2);
        if (xs.find_first_not_of('x') != std::string::npos) throw fail();
        return static_cast<int>(xs.size());
    };

    const auto star = name.find('*');
    if (star == std::string::npos) {
        if (const int p = parse_poly(name); p > 0) return {p, 0};
        if (const int d = parse_deriv(name); d > 0) return {0, d};
        throw fail();
    }
    const int p = parse_poly(name.substr(0, star));
    const int d = parse_deriv(name.substr(star + 1));
    if (p <= 0 || d <= 0) throw fail();
    return {p, d};
}

void evaluate_terms(std::span<const double> values, const Grid1d& grid,
                    std::span<const TermDescriptor> terms, std::span<double> out) {
    const std::size_t n = values.size();
    if (n != grid.size()) throw Error(ErrorCode::InvalidArgument, "slice length does not match the grid");
    if (out.size() != n * terms.size())
        throw Error(ErrorCode::InvalidArgument, "output buffer has the wrong size");

    int max_p = 0, max_d = 0;
    for (const auto& t : terms) {
        if (t.poly_power < 0) throw Error(ErrorCode::InvalidArgument, "negative polynomial power");
        if (t.deriv_order != 0) check_order(t.deriv_order);
        max_p = std::max(max_p, t.poly_power);
        max_d = std::max(max_d, t.deriv_order);
    }

    thread_local std::vector<std::vector<double>> derivs;
    thread_local std::vector<double> powers;
    if (max_d > 0) derivative_stack(values, grid, max_d, derivs);
    // powers[(p-1)*n + j] = u_j^p
    powers.resize(static_cast<std::size_t>(max_p) * n);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 1.0;
        for (int p = 1; p <= max_p; ++p) {
            acc *= values[j];
            powers[static_cast<std::size_t>(p - 1) * n + j] = acc;
        }
    }

    for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto& t = terms[k];
        double* col = out.data() + k * n;
        const double* pw = t.poly_power > 0 ? powers.data() + static_cast<std::size_t>(t.poly_power - 1) * n : nullptr;
        const double* dv = t.deriv_order > 0 ? derivs[static_cast<std::size_t>(t.deriv_order - 1)].data() : nullptr;
        if (pw && dv) {
            for (std::size_t j = 0; j < n; ++j) col[j] = pw[j] * dv[j];
        } else if (pw) {
            std::copy(pw, pw + n, col);
        } else if (dv) {
            std::copy(dv, dv + n, col);
        } else {
            std::fill(col, col + n, 1.0);
        }
    }
}

std::vector<std::string> Dictionary::names() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(term_name(t));
    return out;
}

Dictionary build_dictionary(const EnsembleField& field, std::span<const TermDescriptor> terms) {
    const auto layout = RowLayout::for_field(field);
    const std::size_t nx = layout.n_space;
    const std::size_t k = terms.size();
    const std::size_t ns = field.n_ensembles();

    Dictionary dict;
    dict.terms.assign(terms.begin(), terms.end());
    dict.matrix.resize(static_cast<Eigen::Index>(layout.rows()), static_cast<Eigen::Index>(k));
    dict.column_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k));

    // One time level per task, members summed in index order: the result does
    // not depend on the worker count.
    parallel_for(layout.n_time_rows, [&](std::size_t n) {
        std::vector<double> scratch(nx * k), sum(nx * k, 0.0);
        for (std::size_t s = 0; s < ns; ++s) {
            evaluate_terms(field.slice(s, n), field.grid(), terms, scratch);
            for (std::size_t i = 0; i < scratch.size(); ++i) sum[i] += scratch[i];
        }
        const double inv = 1.0 / static_cast<double>(ns);
        const Eigen::Map<const Eigen::MatrixXd> block(sum.data(), static_cast<Eigen::Index>(nx),
                                                      static_cast<Eigen::Index>(k));
        dict.matrix.middleRows(static_cast<Eigen::Index>(layout.row(n, 0)),
                               static_cast<Eigen::Index>(nx)) = block * inv;
    });

    if (!dict.matrix.allFinite())
        throw Error(ErrorCode::NonFinite, "dictionary holds non-finite entries (term overflow)");
    return dict;
}

void standardize_columns(Dictionary& dict) {
    const auto rows = static_cast<double>(dict.matrix.rows());
    for (Eigen::Index c = 0; c < dict.matrix.cols(); ++c) {
        if (dict.terms[static_cast<std::size_t>(c)].is_constant()) continue;
        auto col = dict.matrix.col(c);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / rows);
        if (sd > 0.0) {
            col /= sd;
            dict.column_scale(c) *= sd;
        }
    }
}

void write_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out << "SPDEDIC 1\n"
        << "n " << dict.rows() << '\n'
        << "k " << dict.cols() << '\n';
    for (const auto& t : dict.terms) out << "term " << term_name(t) << '\n';
    out << "end\n";
    out.write(reinterpret_cast<const char*>(dict.matrix.data()),
              static_cast<std::streamsize>(dict.matrix.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

Dictionary read_dictionary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != "SPDEDIC 1") throw Error(ErrorCode::Io, "'" + path.string() + "' is not a dictionary file");
    auto read_count = [&](const char* key) {
        std::getline(in, line);
        std::istringstream ls(line);
        std::string k;
        std::size_t v = 0;
        if (!(ls >> k >> v) || k != key) throw Error(ErrorCode::Io, "dictionary header: bad '" + line + "'");
        return v;
    };
    const std::size_t n = read_count("n");
    const std::size_t k = read_count("k");
    Dictionary dict;
    for (std::size_t c = 0; c < k; ++c) {
        std::getline(in, line);
        if (line.rfind("term ", 0) != 0) throw Error(ErrorCode::Io, "dictionary header: expected term line");
        dict.terms.push_back(parse_term_name(line.substr(5)));
    }
    std::getline(in, line);
    if (line != "end") throw Error(ErrorCode::Io, "dictionary header: missing 'end'");
    dict.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    in.read(reinterpret_cast<char*>(dict.matrix.data()),
            static_cast<std::streamsize>(n * k * sizeof(double)));
    if (!in) throw Error(ErrorCode::Io, "dictionary payload truncated");
    dict.column_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k));
    return dict;
}

}  // namespace spdefind
