#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spdefind/config.hpp"
#include "spdefind/features.hpp"
#include "spdefind/field.hpp"
#include "spdefind/model_file.hpp"

namespace spdefind {

inline constexpr const char* kToolVersion = "0.1.0";

/// Wall-clock seconds per stage, kept apart from the report so that reports
/// stay byte-reproducible.
using StageTimings = std::vector<std::pair<std::string, double>>;

EnsembleField simulate_from_config(const ExperimentConfig& config);

struct ComponentFits {
    ModelFile vb;
    ModelFile stlsq;
    bool vb_converged = false;
    bool stlsq_rank_deficient = false;
};

struct DiscoveryResult {
    std::vector<TermDescriptor> terms;
    ComponentFits drift;
    ComponentFits diffusion;
    StageTimings timings;
};

/// Dictionary and Kramers-Moyal targets, STLSQ baseline, then VB initialized
/// from the baseline support. Drift and diffusion fits run concurrently.
DiscoveryResult discover(const EnsembleField& field, const ExperimentConfig& config);

/// drift.spm, diffusion.spm, drift_stlsq.spm, diffusion_stlsq.spm.
void write_discovery(const std::filesystem::path& dir, const DiscoveryResult& result);

/// Coefficients of the configured model over a dictionary: drift first, then
/// g^2 for the diffusion. Throws MissingTruth when the config has none.
struct GroundTruth {
    Eigen::VectorXd drift;
    Eigen::VectorXd diffusion;
};
GroundTruth ground_truth(const ExperimentConfig& config, const std::vector<TermDescriptor>& terms);

/// Dense coefficient vector of a model file over the given terms.
Eigen::VectorXd coefficients(const ModelFile& model, const std::vector<TermDescriptor>& terms);
std::vector<bool> support(const ModelFile& model, const std::vector<TermDescriptor>& terms);

struct MethodMetrics {
    double stacked_l2 = 0.0;
    double drift_l2 = 0.0;
    double fpr = 0.0;
    double drift_fpr = 0.0;
    double diffusion_fpr = 0.0;
};

MethodMetrics score(const ModelFile& drift, const ModelFile& diffusion,
                    const ExperimentConfig& config, const std::vector<TermDescriptor>& terms);

/// Simulates the SPDE encoded by two model files. A nonnegative u_xx drift
/// coefficient is treated implicitly; everything else explicitly.
EnsembleField simulate_discovered(const ModelFile& drift, const ModelFile& diffusion,
                                  const ExperimentConfig& config, std::size_t n_ensembles,
                                  std::uint64_t seed);

/// "x,t,mean,std" over every (t, x) of the field.
void write_prediction_csv(const std::filesystem::path& path, const EnsembleField& field);

struct EvaluationResult {
    nlohmann::ordered_json report;
    StageTimings timings;
};

/// Metrics for the VB models (and the baseline when present), plus 200-member
/// prediction ensembles from the truth and the discovered model written as CSV
/// next to the report.
EvaluationResult evaluate(const std::filesystem::path& model_dir, const ExperimentConfig& config,
                          const std::filesystem::path& report_path);

struct PaperCaseResult {
    std::string name;
    MethodMetrics vb;
    MethodMetrics stlsq;
    StageTimings timings;
};

/// simulate -> discover -> evaluate for one preset, writing all artifacts into
/// out_dir. A seed or ensemble override of 0 keeps the preset value.
PaperCaseResult run_paper_case(const std::string& preset, const std::filesystem::path& out_dir,
                               std::uint64_t seed_override = 0, std::size_t ensembles_override = 0);

std::string comparison_table(const std::vector<PaperCaseResult>& cases);

void write_timings(const std::filesystem::path& path, const StageTimings& timings);

}  // namespace spdefind
