#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "spdefind/field.hpp"

namespace spdefind {

/// First and second conditional increment moments per regression row, divided
/// by dt. Row order follows RowLayout.
struct TargetVectors {
    Eigen::VectorXd drift;
    Eigen::VectorXd diffusion;
};

Eigen::VectorXd drift_target(const EnsembleField& field);
Eigen::VectorXd diffusion_target(const EnsembleField& field);
TargetVectors build_targets(const EnsembleField& field);

/// "row_index,value" CSV.
void write_target_csv(const std::filesystem::path& path, const Eigen::VectorXd& target);

}  // namespace spdefind
