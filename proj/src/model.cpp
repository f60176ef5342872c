#include "spdefind/model.hpp"

#include <cmath>
#include <set>

#include "spdefind/error.hpp"

namespace spdefind {

void SpdeModel::validate() const {
    if (!(diffusivity >= 0.0) || !std::isfinite(diffusivity))
        throw Error(ErrorCode::InvalidArgument, "diffusivity must be >= 0");
    if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude))
        throw Error(ErrorCode::InvalidArgument, "noise amplitude must be >= 0");
    std::set<int> seen;
    for (const auto& t : drift_poly) {
        if (t.power < 0 || t.power > 6)
            throw Error(ErrorCode::InvalidArgument, "drift power must be in 0..6");
        if (!std::isfinite(t.coef))
            throw Error(ErrorCode::InvalidArgument, "drift coefficient must be finite");
        if (!seen.insert(t.power).second)
            throw Error(ErrorCode::InvalidArgument, "repeated drift power");
    }
}

double SpdeModel::source(double u) const noexcept {
    double f = 0.0;
    for (const auto& t : drift_poly) {
        double term = t.coef;
        for (int p = 0; p < t.power; ++p) term *= u;
        f += term;
    }
    return f;
}

SpdeModel heat_model() {
    return {"heat", 1.0, 1.0, {}};
}

SpdeModel allen_cahn_model() {
    return {"allen-cahn", 1.0, 1.0, {{1, 1.0}, {3, -1.0}}};
}

SpdeModel nagumo_model(double alpha) {
    // u(1-u)(u-alpha) = -alpha u + (1+alpha) u^2 - u^3
    return {"nagumo", 1.0, 1.0, {{1, -alpha}, {2, 1.0 + alpha}, {3, -1.0}}};
}

}  // namespace spdefind
