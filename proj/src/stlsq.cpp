#include "spdefind/stlsq.hpp"

#include <cmath>

#include <Eigen/QR>

#include "spdefind/error.hpp"

namespace spdefind {

void StlsqConfig::validate() const {
    if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "STLSQ threshold must be >= 0");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "STLSQ max_iters must be >= 1");
    if (!(ridge >= 0.0)) throw Error(ErrorCode::InvalidArgument, "STLSQ ridge must be >= 0");
}

namespace {

// Least squares on the listed columns via complete orthogonal decomposition;
// the minimum-norm solution when rank deficient. A positive ridge appends
// sqrt(ridge) * I rows.
Eigen::VectorXd solve_active(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                             const std::vector<Eigen::Index>& cols, double ridge, bool& deficient) {
    const auto n = design.rows();
    const auto r = static_cast<Eigen::Index>(cols.size());
    const Eigen::Index extra = ridge > 0.0 ? r : 0;
    Eigen::MatrixXd a(n + extra, r);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + extra);
    b.head(n) = target;
    for (Eigen::Index c = 0; c < r; ++c) a.col(c).head(n) = design.col(cols[static_cast<std::size_t>(c)]);
    if (extra > 0) {
        a.bottomRows(extra).setZero();
        a.bottomRows(extra).diagonal().setConstant(std::sqrt(ridge));
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    if (cod.rank() < r) deficient = true;
    return cod.solve(b);
}

}  // namespace

StlsqResult stlsq(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                  const StlsqConfig& config) {
    config.validate();
    if (design.rows() != target.size())
        throw Error(ErrorCode::InvalidArgument, "design and target row counts differ");
    const auto k = design.cols();

    StlsqResult result;
    result.active.assign(static_cast<std::size_t>(k), true);
    result.coef = Eigen::VectorXd::Zero(k);

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        result.iterations = iter;
        std::vector<Eigen::Index> cols;
        for (Eigen::Index c = 0; c < k; ++c)
            if (result.active[static_cast<std::size_t>(c)]) cols.push_back(c);

        result.coef.setZero();
        if (cols.empty()) break;
        const Eigen::VectorXd fit = solve_active(design, target, cols, config.ridge, result.rank_deficient);
        for (std::size_t i = 0; i < cols.size(); ++i) result.coef(cols[i]) = fit(static_cast<Eigen::Index>(i));

        bool changed = false;
        for (Eigen::Index c : cols) {
            if (std::abs(result.coef(c)) < config.threshold) {
                result.active[static_cast<std::size_t>(c)] = false;
                result.coef(c) = 0.0;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return result;
}

}  // namespace spdefind
