#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>

#include "spdefind/error.hpp"
#include "spdefind/features.hpp"
#include "spdefind/pipeline.hpp"
#include "spdefind/simulate.hpp"

using namespace spdefind;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("spdefind_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& args) {
    const std::string cmd = std::string(SPDEFIND_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ModelFile model(const std::string& component, std::vector<std::pair<std::string, double>> terms) {
    ModelFile m;
    m.component = component;
    m.method = "vb";
    for (auto& [name, coef] : terms) m.terms.push_back({name, 1.0, coef, 0.0});
    return m;
}

ExperimentConfig small_allen_cahn() {
    ExperimentConfig c = preset_config("allen-cahn");
    c.ensembles = 40;
    c.horizon = 0.25;
    c.prediction_ensembles = 10;
    return c;
}

}  // namespace

TEST_CASE("ground truth over the benchmark dictionary") {
    const auto c = preset_config("allen-cahn");
    const auto terms = generate_terms(c.poly_max, c.deriv_max, c.products);
    const GroundTruth t = ground_truth(c, terms);
    CHECK(t.drift(1) == 1.0);
    CHECK(t.drift(3) == -1.0);
    CHECK(t.drift(8) == 1.0);
    CHECK(t.drift.cwiseAbs().sum() == 3.0);
    CHECK(t.diffusion(0) == 1.0);
    CHECK(t.diffusion.cwiseAbs().sum() == 1.0);

    ExperimentConfig none;
    try {
        (void)ground_truth(none, terms);
        FAIL("expected MissingTruth");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingTruth);
    }
}

TEST_CASE("a perfect model scores zero") {
    const auto c = preset_config("nagumo");
    const auto terms = generate_terms(c.poly_max, c.deriv_max, c.products);
    const ModelFile f = model("drift", {{"u", 0.5}, {"u^2", 0.5}, {"u^3", -1.0}, {"u_xx", 1.0}});
    const ModelFile g = model("diffusion", {{"1", 1.0}});
    const MethodMetrics m = score(f, g, c, terms);
    CHECK(m.stacked_l2 == 0.0);
    CHECK(m.drift_l2 == 0.0);
    CHECK(m.fpr == 0.0);

    const ModelFile extra = model("drift", {{"u", 0.5}, {"u^2", 0.5}, {"u^3", -1.0}, {"u_xx", 1.0}, {"u_x", 0.1}});
    CHECK(score(extra, g, c, terms).drift_fpr == doctest::Approx(100.0 / 35.0));
}

TEST_CASE("simulating the true model from model files matches the data generator") {
    ExperimentConfig c = small_allen_cahn();
    const ModelFile f = model("drift", {{"u", 1.0}, {"u^3", -1.0}, {"u_xx", 1.0}});
    const ModelFile g = model("diffusion", {{"1", 1.0}});
    const auto a = simulate_discovered(f, g, c, 5, 3);
    const auto b = simulate_ensemble(c.model, c.grid(), c.time(), 5, c.initial_condition(), 3);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
    CHECK(diff < 1e-10);
}

TEST_CASE("noise-free heat data yields a negligible diffusion fit") {
    ExperimentConfig c = preset_config("heat");
    c.model.noise_amplitude = 0.0;
    c.ensembles = 2;
    const auto field = simulate_from_config(c);
    const auto found = discover(field, c);
    const Dictionary dict = build_dictionary(field, found.terms);
    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(dict.matrix.rows());
    const auto names = dict.names();
    for (const auto& t : found.diffusion.vb.terms) {
        CHECK(t.name != "1");
        const auto k = std::find(names.begin(), names.end(), t.name) - names.begin();
        fitted += t.mean * dict.matrix.col(k);
    }
    CHECK(fitted.cwiseAbs().mean() < 1e-3);
}

TEST_CASE("discovery is deterministic") {
    const auto c = small_allen_cahn();
    const auto field = simulate_from_config(c);
    const auto a = discover(field, c);
    const auto b = discover(field, c);
    CHECK(format_model(a.drift.vb) == format_model(b.drift.vb));
    CHECK(format_model(a.diffusion.vb) == format_model(b.diffusion.vb));
    CHECK(format_model(a.drift.stlsq) == format_model(b.drift.stlsq));
}

TEST_CASE("command line round trip and exit codes") {
    const fs::path dir = scratch("cli");
    save_config(dir / "ac.cfg", small_allen_cahn());

    REQUIRE(run("simulate --config " + (dir / "ac.cfg").string() + " --out " + (dir / "ac.fld").string()) == 0);
    REQUIRE(run("discover --data " + (dir / "ac.fld").string() + " --config " + (dir / "ac.cfg").string()
                + " --out-dir " + (dir / "models").string()) == 0);
    for (const char* f : {"drift.spm", "diffusion.spm", "drift_stlsq.spm", "diffusion_stlsq.spm", "discovery.json"})
        CHECK(fs::exists(dir / "models" / f));
    CHECK(slurp(dir / "models" / "drift_stlsq.spm").find("method stlsq") != std::string::npos);
    CHECK(slurp(dir / "models" / "drift.spm").find("method") == std::string::npos);

    REQUIRE(run("evaluate --models " + (dir / "models").string() + " --config " + (dir / "ac.cfg").string()
                + " --report " + (dir / "eval" / "report.json").string()) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "eval" / "report.json"));
    CHECK(report["metrics"]["vb"].contains("stacked_l2"));
    CHECK(report["prediction"]["ensembles"] == 10);
    CHECK(fs::exists(dir / "eval" / "prediction_truth.csv"));
    CHECK(slurp(dir / "eval" / "prediction_truth.csv").rfind("x,t,mean,std\n", 0) == 0);

    // The config echo reproduces the report.
    std::ofstream(dir / "echo.cfg") << report["config"].get<std::string>();
    REQUIRE(run("evaluate --models " + (dir / "models").string() + " --config " + (dir / "echo.cfg").string()
                + " --report " + (dir / "eval2" / "report.json").string()) == 0);
    CHECK(slurp(dir / "eval" / "report.json") == slurp(dir / "eval2" / "report.json"));

    std::ofstream(dir / "bad.cfg") << "grid.nx = many\n";
    CHECK(run("simulate --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x.fld").string()) == 2);
    CHECK(run("simulate --config " + (dir / "missing.cfg").string() + " --out " + (dir / "x.fld").string()) == 4);
    CHECK(run("discover --data " + (dir / "missing.fld").string() + " --config " + (dir / "ac.cfg").string()
              + " --out-dir " + (dir / "m2").string()) == 4);
    std::ofstream(dir / "none.cfg") << "time.horizon = 0.01\nsim.ensembles = 2\n";
    CHECK(run("evaluate --models " + (dir / "models").string() + " --config " + (dir / "none.cfg").string()
              + " --report " + (dir / "r.json").string()) == 2);
    CHECK(run("run-paper --case burgers --out-dir " + (dir / "p").string()) == 2);
    CHECK(run("frobnicate") == 2);
    fs::remove_all(dir);
}

TEST_CASE("single-member ensembles are valid") {
    ExperimentConfig c = small_allen_cahn();
    c.ensembles = 1;
    const auto f = simulate_from_config(c);
    CHECK(f.n_ensembles() == 1);
    const fs::path dir = scratch("single");
    write_field(dir / "one.fld", f);
    CHECK(read_field(dir / "one.fld").data() == f.data());
    fs::remove_all(dir);
}
