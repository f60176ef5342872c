#include "spdefind/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "spdefind/error.hpp"

namespace spdefind {

double relative_l2(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
    if (truth.size() != estimate.size())
        throw Error(ErrorCode::InvalidArgument, "coefficient vectors differ in length");
    const double norm = truth.norm();
    if (norm == 0.0) throw Error(ErrorCode::ZeroTruth, "true coefficient vector is zero");
    return (truth - estimate).norm() / norm;
}

double fpr(const std::vector<bool>& selected, const std::vector<bool>& true_support) {
    if (selected.size() != true_support.size())
        throw Error(ErrorCode::InvalidArgument, "support vectors differ in length");
    if (selected.empty()) return 0.0;
    std::size_t false_positives = 0;
    for (std::size_t k = 0; k < selected.size(); ++k)
        if (selected[k] && !true_support[k]) ++false_positives;
    return 100.0 * static_cast<double>(false_positives) / static_cast<double>(selected.size());
}

double diffusion_amplitude(double coef_g_squared) {
    if (coef_g_squared < -1e-6)
        throw Error(ErrorCode::NegativeVariance,
                    "fitted squared diffusion " + std::to_string(coef_g_squared) + " is negative");
    return std::sqrt(std::max(coef_g_squared, 0.0));
}

}  // namespace spdefind
