#include "spdefind/targets.hpp"

#include <cstdio>
#include <fstream>

#include "spdefind/error.hpp"
#include "spdefind/features.hpp"
#include "spdefind/parallel.hpp"

namespace spdefind {

namespace {

// Ensemble means of (du)^1 and (du)^2 over dt, one time level per task.
TargetVectors increment_moments(const EnsembleField& field, bool want_drift, bool want_diffusion) {
    const auto layout = RowLayout::for_field(field);
    const std::size_t nx = layout.n_space;
    const std::size_t ns = field.n_ensembles();
    const double scale = 1.0 / (static_cast<double>(ns) * field.time().dt());

    TargetVectors t;
    if (want_drift) t.drift = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.rows()));
    if (want_diffusion) t.diffusion = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.rows()));

    parallel_for(layout.n_time_rows, [&](std::size_t n) {
        std::vector<double> first(nx, 0.0), second(nx, 0.0);
        for (std::size_t s = 0; s < ns; ++s) {
            const auto now = field.slice(s, n);
            const auto next = field.slice(s, n + 1);
            for (std::size_t j = 0; j < nx; ++j) {
                const double du = next[j] - now[j];
                first[j] += du;
                second[j] += du * du;
            }
        }
        for (std::size_t j = 0; j < nx; ++j) {
            const auto row = static_cast<Eigen::Index>(layout.row(n, j));
            if (want_drift) t.drift(row) = first[j] * scale;
            if (want_diffusion) t.diffusion(row) = second[j] * scale;
        }
    });
    return t;
}

}  // namespace

Eigen::VectorXd drift_target(const EnsembleField& field) {
    return increment_moments(field, true, false).drift;
}

Eigen::VectorXd diffusion_target(const EnsembleField& field) {
    return increment_moments(field, false, true).diffusion;
}

TargetVectors build_targets(const EnsembleField& field) {
    return increment_moments(field, true, true);
}

void write_target_csv(const std::filesystem::path& path, const Eigen::VectorXd& target) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out << "row_index,value\n";
    char buf[64];
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", target(i));
        out << i << ',' << buf << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

}  // namespace spdefind
