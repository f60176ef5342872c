#pragma once

#include <vector>

#include <Eigen/Dense>

namespace spdefind {

/// ||truth - estimate|| / ||truth||. Throws ZeroTruth if truth is zero.
double relative_l2(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate);

/// Percentage of dictionary terms selected but absent from the truth.
double fpr(const std::vector<bool>& selected, const std::vector<bool>& true_support);

/// sqrt of a fitted g^2 coefficient. Values in [-1e-6, 0) clamp to 0;
/// anything lower throws NegativeVariance.
double diffusion_amplitude(double coef_g_squared);

}  // namespace spdefind
