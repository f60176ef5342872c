#include "spdefind/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>

#include "spdefind/error.hpp"
#include "spdefind/metrics.hpp"
#include "spdefind/simulate.hpp"
#include "spdefind/ssvb.hpp"
#include "spdefind/stlsq.hpp"
#include "spdefind/targets.hpp"

namespace spdefind {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<TermDescriptor> config_terms(const ExperimentConfig& config) {
    return generate_terms(config.poly_max, config.deriv_max, config.products);
}

std::size_t index_of(const std::vector<TermDescriptor>& terms, const TermDescriptor& t) {
    for (std::size_t k = 0; k < terms.size(); ++k)
        if (terms[k] == t) return k;
    throw Error(ErrorCode::InvalidArgument, "term '" + term_name(t) + "' is not in the dictionary");
}

ComponentFits fit_component(const Dictionary& dict, const Eigen::VectorXd& target,
                            const ExperimentConfig& config, const std::string& component) {
    const auto names = dict.names();
    const auto& scale = dict.column_scale;
    ComponentFits out;

    const StlsqResult base = stlsq(dict.matrix, target, config.stlsq);
    out.stlsq_rank_deficient = base.rank_deficient;
    out.stlsq.component = component;
    out.stlsq.method = "stlsq";
    out.stlsq.elbo = std::nan("");
    out.stlsq.iters = base.iterations;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (!base.active[k]) continue;
        const auto i = static_cast<Eigen::Index>(k);
        out.stlsq.terms.push_back({names[k], 1.0, base.coef(i) / scale(i), 0.0});
    }

    const GramSystem sys = GramSystem::from(dict.matrix, target);
    VbFit fit = vb_fit(sys, config.vb, inclusion_from_support(base.active), names);
    if (config.prune) fit = vb_prune(sys, config.vb, std::move(fit), names);
    out.vb_converged = fit.converged;
    out.vb.component = component;
    out.vb.method = "vb";
    out.vb.elbo = fit.posterior.elbo_final;
    out.vb.iters = fit.iterations;
    for (auto k : fit.posterior.selected) {
        const auto i = static_cast<Eigen::Index>(k);
        out.vb.terms.push_back({names[k], fit.posterior.pip(i), fit.posterior.mean(i) / scale(i),
                                fit.posterior.stddev(k) / scale(i)});
    }
    return out;
}

nlohmann::ordered_json model_json(const ModelFile& m) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& t : m.terms)
        terms.push_back({{"name", t.name}, {"mean", t.mean}, {"std", t.std}, {"pip", t.pip}});
    nlohmann::ordered_json j;
    j["method"] = m.method;
    j["terms"] = std::move(terms);
    if (std::isfinite(m.elbo)) j["elbo"] = m.elbo;
    j["iters"] = m.iters;
    return j;
}

nlohmann::ordered_json metrics_json(const MethodMetrics& m) {
    return {{"stacked_l2", m.stacked_l2},
            {"drift_l2", m.drift_l2},
            {"fpr_percent", m.fpr},
            {"drift_fpr_percent", m.drift_fpr},
            {"diffusion_fpr_percent", m.diffusion_fpr}};
}

std::vector<double> ensemble_mean(const EnsembleField& f) {
    std::vector<double> mean(f.n_times() * f.n_space(), 0.0);
    for (std::size_t s = 0; s < f.n_ensembles(); ++s)
        for (std::size_t n = 0; n < f.n_times(); ++n) {
            const auto row = f.slice(s, n);
            for (std::size_t j = 0; j < row.size(); ++j) mean[n * f.n_space() + j] += row[j];
        }
    for (auto& v : mean) v /= static_cast<double>(f.n_ensembles());
    return mean;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace

EnsembleField simulate_from_config(const ExperimentConfig& config) {
    config.validate();
    SimulationOptions options;
    options.scale_noise_by_sqrt_dx = config.scale_noise_by_sqrt_dx;
    options.blowup_bound = config.blowup_bound;
    const auto ic = config.initial_condition();
    return simulate_ensemble(config.model, config.grid(), config.time(), config.ensembles, ic,
                             config.seed, options);
}

DiscoveryResult discover(const EnsembleField& field, const ExperimentConfig& config) {
    config.validate();
    DiscoveryResult result;
    result.terms = config_terms(config);

    auto start = Clock::now();
    Dictionary dict = build_dictionary(field, result.terms);
    if (config.standardize) standardize_columns(dict);
    result.timings.emplace_back("dictionary", seconds_since(start));

    start = Clock::now();
    const TargetVectors targets = build_targets(field);
    result.timings.emplace_back("targets", seconds_since(start));

    start = Clock::now();
    auto diffusion = std::async(std::launch::async, [&] {
        return fit_component(dict, targets.diffusion, config, "diffusion");
    });
    result.drift = fit_component(dict, targets.drift, config, "drift");
    result.diffusion = diffusion.get();
    result.timings.emplace_back("regression", seconds_since(start));
    return result;
}

void write_discovery(const std::filesystem::path& dir, const DiscoveryResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_model(dir / "drift.spm", result.drift.vb);
    write_model(dir / "diffusion.spm", result.diffusion.vb);
    write_model(dir / "drift_stlsq.spm", result.drift.stlsq);
    write_model(dir / "diffusion_stlsq.spm", result.diffusion.stlsq);
}

GroundTruth ground_truth(const ExperimentConfig& config, const std::vector<TermDescriptor>& terms) {
    if (!config.has_truth())
        throw Error(ErrorCode::MissingTruth, "config has no ground truth (set model.preset)");
    const auto k = static_cast<Eigen::Index>(terms.size());
    GroundTruth truth{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
    for (const auto& p : config.model.drift_poly)
        if (p.coef != 0.0) truth.drift(static_cast<Eigen::Index>(index_of(terms, {p.power, 0}))) += p.coef;
    if (config.model.diffusivity != 0.0)
        truth.drift(static_cast<Eigen::Index>(index_of(terms, {0, 2}))) += config.model.diffusivity;
    double g2 = config.model.noise_amplitude * config.model.noise_amplitude;
    if (config.scale_noise_by_sqrt_dx) g2 /= config.grid().spacing();
    if (g2 != 0.0) truth.diffusion(static_cast<Eigen::Index>(index_of(terms, {0, 0}))) = g2;
    return truth;
}

Eigen::VectorXd coefficients(const ModelFile& model, const std::vector<TermDescriptor>& terms) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(terms.size()));
    for (const auto& t : model.terms)
        c(static_cast<Eigen::Index>(index_of(terms, parse_term_name(t.name)))) = t.mean;
    return c;
}

std::vector<bool> support(const ModelFile& model, const std::vector<TermDescriptor>& terms) {
    std::vector<bool> s(terms.size(), false);
    for (const auto& t : model.terms) s[index_of(terms, parse_term_name(t.name))] = true;
    return s;
}

MethodMetrics score(const ModelFile& drift, const ModelFile& diffusion,
                    const ExperimentConfig& config, const std::vector<TermDescriptor>& terms) {
    const GroundTruth truth = ground_truth(config, terms);
    const Eigen::VectorXd f = coefficients(drift, terms);
    const Eigen::VectorXd g = coefficients(diffusion, terms);
    const auto k = f.size();

    Eigen::VectorXd truth_all(2 * k), est_all(2 * k);
    truth_all << truth.drift, truth.diffusion;
    est_all << f, g;

    auto nonzero = [](const Eigen::VectorXd& v) {
        std::vector<bool> s(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) s[static_cast<std::size_t>(i)] = v(i) != 0.0;
        return s;
    };
    const auto sel_f = support(drift, terms);
    const auto sel_g = support(diffusion, terms);
    const auto true_f = nonzero(truth.drift);
    const auto true_g = nonzero(truth.diffusion);
    auto sel_all = sel_f;
    sel_all.insert(sel_all.end(), sel_g.begin(), sel_g.end());
    auto true_all = true_f;
    true_all.insert(true_all.end(), true_g.begin(), true_g.end());

    MethodMetrics m;
    m.stacked_l2 = relative_l2(truth_all, est_all);
    m.drift_l2 = relative_l2(truth.drift, f);
    m.fpr = fpr(sel_all, true_all);
    m.drift_fpr = fpr(sel_f, true_f);
    m.diffusion_fpr = fpr(sel_g, true_g);
    return m;
}

EnsembleField simulate_discovered(const ModelFile& drift, const ModelFile& diffusion,
                                  const ExperimentConfig& config, std::size_t n_ensembles,
                                  std::uint64_t seed) {
    const TermDescriptor laplace{0, 2};
    double implicit = 0.0;
    std::vector<TermDescriptor> f_terms;
    std::vector<double> f_coef;
    for (const auto& t : drift.terms) {
        const TermDescriptor d = parse_term_name(t.name);
        if (d == laplace && t.mean >= 0.0) {
            implicit = t.mean;
            continue;
        }
        f_terms.push_back(d);
        f_coef.push_back(t.mean);
    }
    std::vector<TermDescriptor> g_terms;
    std::vector<double> g_coef;
    for (const auto& t : diffusion.terms) {
        g_terms.push_back(parse_term_name(t.name));
        g_coef.push_back(t.mean);
    }

    const Grid1d grid = config.grid();
    auto combine = [grid](const std::vector<TermDescriptor>& terms, const std::vector<double>& coef,
                          std::span<const double> u, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (terms.empty()) return;
        thread_local std::vector<double> buf;
        buf.resize(u.size() * terms.size());
        evaluate_terms(u, grid, terms, buf);
        for (std::size_t k = 0; k < terms.size(); ++k)
            for (std::size_t j = 0; j < u.size(); ++j) out[j] += coef[k] * buf[k * u.size() + j];
    };
    const ExplicitDrift f = [&](std::span<const double> u, std::span<double> out) {
        combine(f_terms, f_coef, u, out);
    };
    const NoiseAmplitude g = [&](std::span<const double> u, std::span<double> out) {
        combine(g_terms, g_coef, u, out);
        for (auto& v : out) v = std::sqrt(std::max(v, 0.0));
    };

    SimulationOptions options;
    options.blowup_bound = config.blowup_bound;
    const auto ic = config.initial_condition();
    return simulate_paths(grid, config.time(), n_ensembles, ic, seed, implicit, f, g, options);
}

void write_prediction_csv(const std::filesystem::path& path, const EnsembleField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    const auto mean = ensemble_mean(field);
    const std::size_t nx = field.n_space();
    std::vector<double> var(mean.size(), 0.0);
    for (std::size_t s = 0; s < field.n_ensembles(); ++s)
        for (std::size_t n = 0; n < field.n_times(); ++n) {
            const auto row = field.slice(s, n);
            for (std::size_t j = 0; j < nx; ++j) {
                const double d = row[j] - mean[n * nx + j];
                var[n * nx + j] += d * d;
            }
        }
    const double denom = field.n_ensembles() > 1 ? static_cast<double>(field.n_ensembles() - 1) : 1.0;
    out << "x,t,mean,std\n";
    char line[128];
    for (std::size_t n = 0; n < field.n_times(); ++n)
        for (std::size_t j = 0; j < nx; ++j) {
            const std::size_t i = n * nx + j;
            std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g\n", field.grid().node(j),
                          static_cast<double>(n) * field.time().dt(), mean[i], std::sqrt(var[i] / denom));
            out << line;
        }
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

EvaluationResult evaluate(const std::filesystem::path& model_dir, const ExperimentConfig& config,
                          const std::filesystem::path& report_path) {
    config.validate();
    if (!config.has_truth())
        throw Error(ErrorCode::MissingTruth, "evaluation needs a ground-truth preset");
    const auto terms = config_terms(config);
    const ModelFile drift = read_model(model_dir / "drift.spm");
    const ModelFile diffusion = read_model(model_dir / "diffusion.spm");
    const bool has_baseline = std::filesystem::exists(model_dir / "drift_stlsq.spm")
                              && std::filesystem::exists(model_dir / "diffusion_stlsq.spm");

    EvaluationResult result;
    auto& r = result.report;
    r["tool"] = "spdefind";
    r["version"] = kToolVersion;
    r["preset"] = config.preset;
    r["drift"] = model_json(drift);
    r["diffusion"] = model_json(diffusion);
    for (const auto& t : diffusion.terms)
        if (t.name == "1") r["diffusion"]["noise_amplitude"] = diffusion_amplitude(t.mean);

    auto start = Clock::now();
    r["metrics"]["vb"] = metrics_json(score(drift, diffusion, config, terms));
    if (has_baseline) {
        const ModelFile bd = read_model(model_dir / "drift_stlsq.spm");
        const ModelFile bg = read_model(model_dir / "diffusion_stlsq.spm");
        r["baseline"]["drift"] = model_json(bd);
        r["baseline"]["diffusion"] = model_json(bg);
        r["metrics"]["stlsq"] = metrics_json(score(bd, bg, config, terms));
    }
    result.timings.emplace_back("metrics", seconds_since(start));

    start = Clock::now();
    const auto out_dir = report_path.has_parent_path() ? report_path.parent_path() : std::filesystem::path(".");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());
    const std::uint64_t pred_seed = config.seed + 1;
    nlohmann::ordered_json pred;
    pred["ensembles"] = config.prediction_ensembles;
    pred["seed"] = pred_seed;

    SimulationOptions options;
    options.scale_noise_by_sqrt_dx = config.scale_noise_by_sqrt_dx;
    options.blowup_bound = config.blowup_bound;
    const EnsembleField reference = simulate_ensemble(config.model, config.grid(), config.time(),
                                                      config.prediction_ensembles,
                                                      config.initial_condition(), pred_seed, options);
    write_prediction_csv(out_dir / "prediction_truth.csv", reference);
    pred["truth_csv"] = "prediction_truth.csv";
    try {
        const EnsembleField predicted =
            simulate_discovered(drift, diffusion, config, config.prediction_ensembles, pred_seed);
        write_prediction_csv(out_dir / "prediction_model.csv", predicted);
        const auto a = ensemble_mean(reference);
        const auto b = ensemble_mean(predicted);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num += (a[i] - b[i]) * (a[i] - b[i]);
            den += a[i] * a[i];
        }
        pred["status"] = "ok";
        pred["model_csv"] = "prediction_model.csv";
        pred["mean_field_rel_error"] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::BlowUp && e.code() != ErrorCode::NonFinite) throw;
        pred["status"] = "blow-up";
    }
    r["prediction"] = std::move(pred);
    result.timings.emplace_back("prediction", seconds_since(start));

    r["config"] = serialize_config(config);
    write_text(report_path, r.dump(2) + "\n");
    return result;
}

PaperCaseResult run_paper_case(const std::string& preset, const std::filesystem::path& out_dir,
                               std::uint64_t seed_override, std::size_t ensembles_override) {
    ExperimentConfig config = preset_config(preset);
    if (seed_override != 0) config.seed = seed_override;
    if (ensembles_override != 0) config.ensembles = ensembles_override;
    config.validate();

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());
    save_config(out_dir / "config.txt", config);

    PaperCaseResult result;
    result.name = preset;
    auto start = Clock::now();
    const EnsembleField field = simulate_from_config(config);
    result.timings.emplace_back("simulate", seconds_since(start));

    DiscoveryResult found = discover(field, config);
    write_discovery(out_dir, found);
    result.timings.insert(result.timings.end(), found.timings.begin(), found.timings.end());

    EvaluationResult eval = evaluate(out_dir, config, out_dir / "report.json");
    result.timings.insert(result.timings.end(), eval.timings.begin(), eval.timings.end());

    result.vb = score(found.drift.vb, found.diffusion.vb, config, found.terms);
    result.stlsq = score(found.drift.stlsq, found.diffusion.stlsq, config, found.terms);
    write_timings(out_dir / "timings.json", result.timings);
    return result;
}

std::string comparison_table(const std::vector<PaperCaseResult>& cases) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %12s %12s %12s %12s\n", "case", "L2 e-SINDy", "L2 VB",
                  "FPR% e-SINDy", "FPR% VB");
    out += line;
    for (const auto& c : cases) {
        std::snprintf(line, sizeof line, "%-12s %12.4f %12.4f %12.4f %12.4f\n", c.name.c_str(),
                      c.stlsq.stacked_l2, c.vb.stacked_l2, c.stlsq.drift_fpr, c.vb.drift_fpr);
        out += line;
    }
    return out;
}

void write_timings(const std::filesystem::path& path, const StageTimings& timings) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [stage, secs] : timings) j[stage] = secs;
    write_text(path, j.dump(2) + "\n");
}

}  // namespace spdefind
