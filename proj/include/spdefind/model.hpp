#pragma once

#include <string>
#include <vector>

namespace spdefind {

struct PolyTerm {
    int power = 0;
    double coef = 0.0;

    friend bool operator==(const PolyTerm&, const PolyTerm&) = default;
};

/// du = (eps * u_xx + sum_p c_p u^p) dt + sigma dW with additive noise.
struct SpdeModel {
    std::string name;
    double diffusivity = 0.0;
    double noise_amplitude = 0.0;
    std::vector<PolyTerm> drift_poly;

    /// Throws InvalidArgument on negative eps/sigma, powers outside 0..6, or
    /// repeated powers.
    void validate() const;

    [[nodiscard]] double source(double u) const noexcept;

    friend bool operator==(const SpdeModel&, const SpdeModel&) = default;
};

SpdeModel heat_model();
SpdeModel allen_cahn_model();
/// Nagumo source u(1-u)(u-alpha), stored expanded.
SpdeModel nagumo_model(double alpha = -0.5);

}  // namespace spdefind
