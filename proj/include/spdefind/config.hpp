#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spdefind/grid.hpp"
#include "spdefind/model.hpp"
#include "spdefind/ssvb.hpp"
#include "spdefind/stlsq.hpp"

namespace spdefind {

/// Everything a simulate -> discover -> evaluate run needs.
///
/// Text form is one `section.key = value` per line with `#` comments. A
/// `model.preset` line is applied before every other key regardless of where
/// it appears, so explicit keys override the preset.
struct ExperimentConfig {
    // heat | allen-cahn | nagumo | custom | none. "none" carries no ground truth.
    std::string preset = "none";
    SpdeModel model;
    bool scale_noise_by_sqrt_dx = false;

    double grid_length = 20.0;
    std::size_t grid_nodes = 64;
    Boundary boundary = Boundary::Periodic;

    double horizon = 1.0;
    double dt = 0.0025;

    std::size_t ensembles = 2000;
    std::uint64_t seed = 42;
    double blowup_bound = 1e6;
    std::string initial = "sigmoid";  // sigmoid | sine | zero

    int poly_max = 6;
    int deriv_max = 5;
    bool products = true;
    bool standardize = false;

    // ELBO-guided backward elimination after the first VB fit.
    bool prune = true;

    SsHyperparams vb;
    StlsqConfig stlsq;

    std::size_t prediction_ensembles = 200;

    [[nodiscard]] Grid1d grid() const { return {grid_length, grid_nodes, boundary}; }
    [[nodiscard]] TimeSpec time() const { return {horizon, dt}; }
    [[nodiscard]] bool has_truth() const noexcept { return preset != "none"; }
    [[nodiscard]] std::vector<double> initial_condition() const;

    /// Checks every field against the invariants of the module it feeds.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"heat", "allen-cahn", "nagumo"};
    return names;
}

/// Benchmark setups: 64 nodes on [0, 20), periodic, T = 1, 2000 members.
ExperimentConfig preset_config(const std::string& name);

/// Throws ConfigParse with the offending line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

}  // namespace spdefind
