#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdefind/config.hpp"
#include "spdefind/error.hpp"
#include "spdefind/field.hpp"
#include "spdefind/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spdefind;

namespace {

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

nlohmann::ordered_json terms_json(const ModelFile& m) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& t : m.terms) a.push_back({{"name", t.name}, {"mean", t.mean}, {"std", t.std}, {"pip", t.pip}});
    return a;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    const ExperimentConfig config = load_config(config_path);
    const EnsembleField field = simulate_from_config(config);
    write_field(out_path, field);
    std::printf("wrote %s: ns=%zu nt=%zu nx=%zu dt=%g\n", out_path.c_str(), field.n_ensembles(),
                field.n_times(), field.n_space(), field.time().dt());
    return 0;
}

int cmd_discover(const std::string& data_path, const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig config = load_config(config_path);
    const EnsembleField field = read_field(data_path, config.boundary);
    const DiscoveryResult found = discover(field, config);
    write_discovery(out_dir, found);

    nlohmann::ordered_json report;
    report["tool"] = "spdefind";
    report["version"] = kToolVersion;
    report["data"] = {{"ns", field.n_ensembles()}, {"nt", field.n_times()}, {"nx", field.n_space()}};
    report["drift"] = {{"terms", terms_json(found.drift.vb)},
                       {"converged", found.drift.vb_converged},
                       {"baseline_terms", terms_json(found.drift.stlsq)}};
    report["diffusion"] = {{"terms", terms_json(found.diffusion.vb)},
                           {"converged", found.diffusion.vb_converged},
                           {"baseline_terms", terms_json(found.diffusion.stlsq)}};
    report["config"] = serialize_config(config);
    write_json(fs::path(out_dir) / "discovery.json", report);
    write_timings(fs::path(out_dir) / "timings.json", found.timings);

    for (const auto* m : {&found.drift.vb, &found.diffusion.vb}) {
        std::printf("%s:", m->component.c_str());
        for (const auto& t : m->terms) std::printf(" %+.4f %s", t.mean, t.name.c_str());
        std::printf("\n");
    }
    return 0;
}

int cmd_evaluate(const std::string& models, const std::string& config_path, const std::string& report_path) {
    const ExperimentConfig config = load_config(config_path);
    const EvaluationResult result = evaluate(models, config, report_path);
    const auto& vb = result.report["metrics"]["vb"];
    std::printf("stacked L2 %.4f, drift L2 %.4f, FPR %.4f%%\n", vb["stacked_l2"].get<double>(),
                vb["drift_l2"].get<double>(), vb["fpr_percent"].get<double>());
    return 0;
}

int cmd_run_paper(const std::string& which, const std::string& out_dir, std::uint64_t seed, std::size_t ensembles) {
    std::vector<std::string> cases;
    if (which == "all") cases = preset_names();
    else cases = {which};
    std::vector<PaperCaseResult> results;
    for (const auto& c : cases) {
        const fs::path dir = which == "all" ? fs::path(out_dir) / c : fs::path(out_dir);
        std::printf("[%s] running into %s\n", c.c_str(), dir.string().c_str());
        std::fflush(stdout);
        results.push_back(run_paper_case(c, dir, seed, ensembles));
    }
    const std::string table = comparison_table(results);
    std::fputs(table.c_str(), stdout);
    std::ofstream out(fs::path(out_dir) / "comparison.txt", std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write comparison table");
    out << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse discovery of stochastic PDEs from ensemble data"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string config, out, data, out_dir, models, report, which;
    std::uint64_t seed = 0;
    std::size_t ensembles = 0;

    auto* sim = app.add_subcommand("simulate", "simulate an ensemble and write a field file");
    sim->add_option("--config", config, "config file")->required();
    sim->add_option("--out", out, "output .fld path")->required();

    auto* disc = app.add_subcommand("discover", "fit drift and diffusion models to a field file");
    disc->add_option("--data", data, "input .fld path")->required();
    disc->add_option("--config", config, "config file")->required();
    disc->add_option("--out-dir", out_dir, "output directory")->required();

    auto* eval = app.add_subcommand("evaluate", "score discovered models against the preset truth");
    eval->add_option("--models", models, "directory holding drift.spm and diffusion.spm")->required();
    eval->add_option("--config", config, "config file")->required();
    eval->add_option("--report", report, "report JSON path")->required();

    auto* paper = app.add_subcommand("run-paper", "simulate, discover and evaluate a benchmark case");
    paper->add_option("--case", which, "heat | allen-cahn | nagumo | all")
        ->required()
        ->check(CLI::IsMember({"heat", "allen-cahn", "nagumo", "all"}));
    paper->add_option("--out-dir", out_dir, "output directory")->required();
    paper->add_option("--seed", seed, "seed override");
    paper->add_option("--ensembles", ensembles, "ensemble count override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) return cmd_simulate(config, out);
        if (*disc) return cmd_discover(data, config, out_dir);
        if (*eval) return cmd_evaluate(models, config, report);
        if (*paper) return cmd_run_paper(which, out_dir, seed, ensembles);
    } catch (const Error& e) {
        std::fprintf(stderr, "spdefind: %s: %s\n", to_string(e.code()), e.what());
        return exit_status(e.code());
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "spdefind: io: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "spdefind: %s\n", e.what());
        return 3;
    }
    return 0;
}
