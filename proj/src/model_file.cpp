#include "spdefind/model_file.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spdefind/error.hpp"

namespace spdefind {
namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ConfigParse, "model file line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string format_model(const ModelFile& model) {
    std::string out = "SPDEMDL 1\ncomponent " + model.component + "\n";
    if (model.method == "stlsq") out += "method stlsq\n";
    for (const auto& t : model.terms)
        out += "term " + t.name + " " + fmt(t.pip) + " " + fmt(t.mean) + " " + fmt(t.std) + "\n";
    out += "elbo " + fmt(model.elbo) + "\n";
    out += "iters " + std::to_string(model.iters) + "\nend\n";
    return out;
}

ModelFile parse_model(const std::string& text) {
    ModelFile model;
    model.method = "vb";
    std::istringstream in(text);
    std::string line;
    std::size_t no = 0;
    bool header = false;
    bool ended = false;
    while (std::getline(in, line)) {
        ++no;
        std::istringstream words(line);
        std::string tag;
        if (!(words >> tag)) continue;
        if (ended) bad(no, "content after 'end'");
        if (!header) {
            int version = 0;
            if (tag != "SPDEMDL" || !(words >> version) || version != 1) bad(no, "expected 'SPDEMDL 1'");
            header = true;
            continue;
        }
        try {
            if (tag == "component") {
                words >> model.component;
                if (model.component != "drift" && model.component != "diffusion")
                    bad(no, "component must be drift or diffusion");
            } else if (tag == "method") {
                words >> model.method;
            } else if (tag == "term") {
                ModelTerm t;
                std::string pip, mean, sd;
                if (!(words >> t.name >> pip >> mean >> sd)) bad(no, "expected 'term <name> <pip> <mean> <std>'");
                t.pip = parse_real(pip);
                t.mean = parse_real(mean);
                t.std = parse_real(sd);
                model.terms.push_back(t);
            } else if (tag == "elbo") {
                std::string v;
                words >> v;
                model.elbo = parse_real(v);
            } else if (tag == "iters") {
                if (!(words >> model.iters)) bad(no, "expected an integer");
            } else if (tag == "end") {
                ended = true;
            } else {
                bad(no, "unknown record '" + tag + "'");
            }
        } catch (const std::invalid_argument&) {
            bad(no, "malformed number");
        } catch (const std::out_of_range&) {
            bad(no, "number out of range");
        }
    }
    if (!header) bad(no, "missing header");
    if (!ended) bad(no, "missing 'end'");
    if (model.component.empty()) bad(no, "missing component");
    return model;
}

void write_model(const std::filesystem::path& path, const ModelFile& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << format_model(model);
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

ModelFile read_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_model(text.str());
}

}  // namespace spdefind
