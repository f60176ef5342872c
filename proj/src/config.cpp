#include "spdefind/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "spdefind/error.hpp"
#include "spdefind/simulate.hpp"

namespace spdefind {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
    Int v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("expected true/false, got '" + s + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_drift(const std::vector<PolyTerm>& poly) {
    std::string out;
    for (const auto& t : poly) {
        if (!out.empty()) out += ',';
        out += std::to_string(t.power) + ':' + fmt_double(t.coef);
    }
    return out;
}

std::vector<PolyTerm> parse_drift(const std::string& s) {
    std::vector<PolyTerm> poly;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("drift term '" + item + "' is not power:coef");
        poly.push_back({parse_int<int>(trim(item.substr(0, colon))), parse_double(trim(item.substr(colon + 1)))});
    }
    return poly;
}

struct Field {
    const char* key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define SPDEFIND_DOUBLE(key, member)                                        \
    Field{key, [](const ExperimentConfig& c) { return fmt_double(c.member); }, \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(v); }}
#define SPDEFIND_INT(key, member, type)                                         \
    Field{key, [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_int<type>(v); }}
#define SPDEFIND_BOOL(key, member)                                        \
    Field{key, [](const ExperimentConfig& c) { return fmt_bool(c.member); }, \
          [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(v); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        Field{"model.preset", [](const ExperimentConfig& c) { return c.preset; },
              [](ExperimentConfig& c, const std::string& v) { c.preset = v; }},
        Field{"model.name", [](const ExperimentConfig& c) { return c.model.name; },
              [](ExperimentConfig& c, const std::string& v) { c.model.name = v; }},
        SPDEFIND_DOUBLE("model.epsilon", model.diffusivity),
        SPDEFIND_DOUBLE("model.sigma", model.noise_amplitude),
        Field{"model.drift", [](const ExperimentConfig& c) { return fmt_drift(c.model.drift_poly); },
              [](ExperimentConfig& c, const std::string& v) { c.model.drift_poly = parse_drift(v); }},
        SPDEFIND_BOOL("model.scale_noise_by_sqrt_dx", scale_noise_by_sqrt_dx),
        SPDEFIND_DOUBLE("grid.length", grid_length),
        SPDEFIND_INT("grid.nx", grid_nodes, std::size_t),
        Field{"grid.boundary", [](const ExperimentConfig& c) { return to_string(c.boundary); },
              [](ExperimentConfig& c, const std::string& v) { c.boundary = boundary_from_string(v); }},
        SPDEFIND_DOUBLE("time.horizon", horizon),
        SPDEFIND_DOUBLE("time.dt", dt),
        SPDEFIND_INT("sim.ensembles", ensembles, std::size_t),
        SPDEFIND_INT("sim.seed", seed, std::uint64_t),
        SPDEFIND_DOUBLE("sim.blowup_bound", blowup_bound),
        Field{"sim.initial", [](const ExperimentConfig& c) { return c.initial; },
              [](ExperimentConfig& c, const std::string& v) { c.initial = v; }},
        SPDEFIND_INT("dictionary.poly_max", poly_max, int),
        SPDEFIND_INT("dictionary.deriv_max", deriv_max, int),
        SPDEFIND_BOOL("dictionary.products", products),
        SPDEFIND_BOOL("dictionary.standardize", standardize),
        SPDEFIND_DOUBLE("vb.slab_variance", vb.slab_variance),
        SPDEFIND_DOUBLE("vb.inclusion_prior", vb.inclusion_prior),
        SPDEFIND_DOUBLE("vb.noise_shape", vb.noise_shape),
        SPDEFIND_DOUBLE("vb.noise_rate", vb.noise_rate),
        SPDEFIND_DOUBLE("vb.tau_init", vb.tau_init),
        SPDEFIND_DOUBLE("vb.elbo_tol", vb.elbo_tol),
        SPDEFIND_DOUBLE("vb.pip_threshold", vb.pip_threshold),
        SPDEFIND_INT("vb.max_iters", vb.max_iters, int),
        SPDEFIND_BOOL("vb.prune", prune),
        SPDEFIND_DOUBLE("stlsq.threshold", stlsq.threshold),
        SPDEFIND_INT("stlsq.max_iters", stlsq.max_iters, int),
        SPDEFIND_DOUBLE("stlsq.ridge", stlsq.ridge),
        SPDEFIND_INT("eval.prediction_ensembles", prediction_ensembles, std::size_t),
    };
    return table;
}

#undef SPDEFIND_DOUBLE
#undef SPDEFIND_INT
#undef SPDEFIND_BOOL

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

std::vector<double> ExperimentConfig::initial_condition() const {
    const Grid1d g = grid();
    std::vector<double> u(g.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = g.node(j);
        if (initial == "sigmoid") u[j] = sigmoid_front(x);
        else if (initial == "sine") u[j] = std::sin(2.0 * std::numbers::pi * x / grid_length);
        else if (initial == "zero") u[j] = 0.0;
        else throw Error(ErrorCode::InvalidArgument, "unknown initial condition '" + initial + "'");
    }
    return u;
}

void ExperimentConfig::validate() const {
    const auto& names = preset_names();
    require(preset == "none" || preset == "custom"
                || std::find(names.begin(), names.end(), preset) != names.end(),
            "unknown preset '" + preset + "'");
    model.validate();
    require(std::isfinite(grid_length) && grid_length > 0.0, "grid.length must be > 0");
    require(grid_nodes >= 3, "grid.nx must be >= 3");
    require(std::isfinite(dt) && dt > 0.0, "time.dt must be > 0");
    require(std::isfinite(horizon) && horizon >= dt, "time.horizon must be >= time.dt");
    require(ensembles >= 1, "sim.ensembles must be >= 1");
    require(blowup_bound > 0.0, "sim.blowup_bound must be > 0");
    require(initial == "sigmoid" || initial == "sine" || initial == "zero",
            "sim.initial must be sigmoid, sine or zero");
    require(poly_max >= 0 && poly_max <= 6, "dictionary.poly_max must be in 0..6");
    require(deriv_max >= 0 && deriv_max <= 5, "dictionary.deriv_max must be in 0..5");
    vb.validate();
    stlsq.validate();
    require(prediction_ensembles >= 1, "eval.prediction_ensembles must be >= 1");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return serialize_config(a) == serialize_config(b);
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "heat") {
        c.model = heat_model();
    } else if (name == "allen-cahn") {
        c.model = allen_cahn_model();
    } else if (name == "nagumo") {
        c.model = nagumo_model();
        c.dt = 0.001;
        c.deriv_max = 4;
    } else {
        throw Error(ErrorCode::ConfigParse, "unknown preset '" + name + "'");
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::tuple<std::size_t, std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigParse, "line " + std::to_string(line_no) + ": expected 'key = value'");
        entries.emplace_back(line_no, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }

    ExperimentConfig config;
    for (const auto& [no, key, value] : entries) {
        if (key != "model.preset" || value == "none" || value == "custom") continue;
        try {
            config = preset_config(value);
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigParse, "line " + std::to_string(no) + ": " + e.what());
        }
    }

    const auto& table = fields();
    for (const auto& [no, key, value] : entries) {
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
        if (it == table.end())
            throw Error(ErrorCode::ConfigParse, "line " + std::to_string(no) + ": unknown key '" + key + "'");
        try {
            it->set(config, value);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::ConfigParse, "line " + std::to_string(no) + " (" + key + "): " + e.what());
        }
    }

    try {
        config.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigParse, e.what());
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += " = ";
        out += f.get(config);
        out += '\n';
    }
    return out;
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write config " + path.string());
    out << serialize_config(config);
    if (!out) throw Error(ErrorCode::Io, "failed writing config " + path.string());
}

}  // namespace spdefind
