#pragma once

#include <vector>

#include <Eigen/Dense>

namespace spdefind {

struct StlsqConfig {
    double threshold = 0.3;
    int max_iters = 20;
    double ridge = 0.0;

    void validate() const;
};

struct StlsqResult {
    Eigen::VectorXd coef;
    std::vector<bool> active;
    int iterations = 0;
    bool rank_deficient = false;  // a minimum-norm solution was used
};

/// Sequentially thresholded least squares: fit the active columns, drop every
/// |coef| < threshold, refit, until the active set stops changing.
StlsqResult stlsq(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                  const StlsqConfig& config);

}  // namespace spdefind
