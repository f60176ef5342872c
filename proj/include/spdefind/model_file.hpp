#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace spdefind {

struct ModelTerm {
    std::string name;
    double pip = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

/// Contents of a ".spm" file: one fitted component (drift or diffusion).
struct ModelFile {
    std::string component;  // drift | diffusion
    std::string method;     // vb | stlsq
    std::vector<ModelTerm> terms;
    double elbo = 0.0;
    int iters = 0;
};

std::string format_model(const ModelFile& model);
ModelFile parse_model(const std::string& text);
void write_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile read_model(const std::filesystem::path& path);

}  // namespace spdefind
