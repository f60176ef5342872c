#include "spdefind/ssvb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Cholesky>

#include "spdefind/error.hpp"

namespace spdefind {

void SsHyperparams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorCode::InvalidArgument, what);
    };
    require(slab_variance > 0.0, "slab variance must be > 0");
    require(inclusion_prior > 0.0 && inclusion_prior < 1.0, "inclusion prior must lie in (0, 1)");
    require(noise_shape > 0.0, "noise shape must be > 0");
    require(noise_rate > 0.0, "noise rate must be > 0");
    require(tau_init > 0.0, "initial precision must be > 0");
    require(elbo_tol > 0.0, "ELBO tolerance must be > 0");
    require(pip_threshold > 0.0 && pip_threshold < 1.0, "PIP threshold must lie in (0, 1)");
    require(max_iters >= 1, "max_iters must be >= 1");
}

GramSystem GramSystem::from(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
    if (design.rows() != target.size())
        throw Error(ErrorCode::InvalidArgument, "design and target row counts differ");
    GramSystem sys;
    const auto k = design.cols();
    sys.gram = Eigen::MatrixXd::Zero(k, k);
    sys.gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    sys.gram = sys.gram.selfadjointView<Eigen::Lower>();
    sys.cross = design.transpose() * target;
    sys.yy = target.squaredNorm();
    sys.n_rows = static_cast<std::size_t>(design.rows());
    return sys;
}

VbState VbState::initial(const GramSystem& sys, const SsHyperparams& hyper,
                         const Eigen::VectorXd& w_init) {
    const auto k = static_cast<Eigen::Index>(sys.k());
    if (w_init.size() != k) throw Error(ErrorCode::InvalidArgument, "w_init has the wrong length");
    for (Eigen::Index i = 0; i < k; ++i)
        if (!(w_init(i) > 0.0 && w_init(i) < 1.0))
            throw Error(ErrorCode::InvalidArgument, "w_init entries must lie in (0, 1)");
    VbState s;
    s.mean = Eigen::VectorXd::Zero(k);
    s.cov = Eigen::MatrixXd::Identity(k, k);
    s.inclusion = w_init;
    s.shape = hyper.noise_shape + 0.5 * static_cast<double>(sys.n_rows) + 0.5 * static_cast<double>(k);
    s.tau = hyper.tau_init;
    s.rate = s.shape / s.tau;
    return s;
}

Eigen::MatrixXd inclusion_moment(const Eigen::VectorXd& w) {
    Eigen::MatrixXd omega = w * w.transpose();
    omega.diagonal() += (w.array() * (1.0 - w.array())).matrix();
    return omega;
}

namespace {

// (D^T D) ⊙ Omega + I / v_s
Eigen::MatrixXd precision_core(const GramSystem& sys, const Eigen::VectorXd& w, double slab_variance) {
    Eigen::MatrixXd m = sys.gram.cwiseProduct(inclusion_moment(w));
    m.diagonal().array() += 1.0 / slab_variance;
    return m;
}

// Expected squared residual plus the prior quadratic form:
// y'y - 2 y'DWmu + tr(M (mu mu' + Sigma)).
double expected_residual(const GramSystem& sys, const Eigen::MatrixXd& core, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
    const double cross = w.cwiseProduct(sys.cross).dot(mu);
    const double quad = mu.dot(core * mu) + core.cwiseProduct(cov).sum();
    return sys.yy - 2.0 * cross + quad;
}

struct Inverse {
    Eigen::MatrixXd inv;
    double log_det_inv = 0.0;
};

// Inverse of a symmetric positive definite matrix by Cholesky, escalating a
// diagonal jitter (relative to the mean diagonal) on failure.
Inverse spd_inverse(const Eigen::MatrixXd& p) {
    const auto k = p.rows();
    const double scale = p.diagonal().mean();
    static constexpr std::array<double, 4> jitters{0.0, 1e-12, 1e-10, 1e-8};
    for (double jitter : jitters) {
        Eigen::MatrixXd shifted = p;
        shifted.diagonal().array() += jitter * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() != Eigen::Success) continue;
        const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
        if (!(diag.array() > 0.0).all() || !diag.allFinite()) continue;
        Inverse out;
        out.inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
        out.inv = 0.5 * (out.inv + out.inv.transpose());
        out.log_det_inv = -2.0 * diag.array().log().sum();
        if (out.inv.allFinite()) return out;
    }
    throw Error(ErrorCode::SingularPrecision,
                "variational precision matrix is singular (degenerate or duplicated dictionary columns?)");
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double expit(double eta) {
    eta = std::clamp(eta, -kEtaClamp, kEtaClamp);
    return 1.0 / (1.0 + std::exp(-eta));
}

}  // namespace

VbState vb_update_sweep(const VbState& state, const GramSystem& sys, const SsHyperparams& hyper) {
    const auto k = static_cast<Eigen::Index>(sys.k());
    const double n = static_cast<double>(sys.n_rows);
    VbState next = state;
    const Eigen::VectorXd& w = state.inclusion;

    const Eigen::MatrixXd core = precision_core(sys, w, hyper.slab_variance);
    const Inverse inv = spd_inverse(state.tau * core);
    next.cov = inv.inv;
    next.log_det_cov = inv.log_det_inv;
    next.mean = state.tau * (next.cov * w.cwiseProduct(sys.cross));

    next.shape = hyper.noise_shape + 0.5 * n + 0.5 * static_cast<double>(k);
    const double residual = expected_residual(sys, core, w, next.mean, next.cov);
    next.rate = hyper.noise_rate + 0.5 * std::max(residual, 0.0);
    next.tau = next.shape / next.rate;

    const double prior_logit = logit(hyper.inclusion_prior);
    const double tau = next.tau;
    const Eigen::VectorXd& mu = next.mean;
    const Eigen::MatrixXd& cov = next.cov;
    Eigen::VectorXd& wq = next.inclusion;
    for (Eigen::Index i = 0; i < k; ++i) {
        double coupling = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j == i) continue;
            coupling += sys.gram(i, j) * wq(j) * (mu(j) * mu(i) + cov(j, i));
        }
        const double eta = prior_logit
                         - 0.5 * tau * (mu(i) * mu(i) + cov(i, i)) * sys.gram(i, i)
                         + tau * (sys.cross(i) * mu(i) - coupling);
        wq(i) = expit(eta);
    }
    return next;
}

VbState vb_update_sweep(const VbState& state, const Eigen::MatrixXd& design,
                        const Eigen::VectorXd& target, const SsHyperparams& hyper) {
    return vb_update_sweep(state, GramSystem::from(design, target), hyper);
}

double elbo_constant(std::size_t k, std::size_t n, double slab_variance) {
    const double kk = static_cast<double>(k);
    return 0.5 * kk - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi)
         - 0.5 * kk * std::log(slab_variance);
}

double bernoulli_kl_sum(const Eigen::VectorXd& w, double p0) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double wi = w(i);
        sum += wi * std::log(p0 / wi) + (1.0 - wi) * std::log((1.0 - p0) / (1.0 - wi));
    }
    return sum;
}

double compute_elbo(const VbState& state, const GramSystem& sys, const SsHyperparams& hyper) {
    const double a = hyper.noise_shape;
    const double b = hyper.noise_rate;
    const double closed_form = elbo_constant(sys.k(), sys.n_rows, hyper.slab_variance)
                             + a * std::log(b) - std::lgamma(a)
                             + std::lgamma(state.shape) - state.shape * std::log(state.rate)
                             + 0.5 * state.log_det_cov
                             + bernoulli_kl_sum(state.inclusion, hyper.inclusion_prior);
    // Zero when rate was computed from the current (mu, Sigma, w).
    const Eigen::MatrixXd core = precision_core(sys, state.inclusion, hyper.slab_variance);
    const double residual = expected_residual(sys, core, state.inclusion, state.mean, state.cov);
    const double stale = state.shape - state.tau * (b + 0.5 * residual);
    return closed_form + stale;
}

double compute_elbo(const VbState& state, const Eigen::MatrixXd& design,
                    const Eigen::VectorXd& target, const SsHyperparams& hyper) {
    return compute_elbo(state, GramSystem::from(design, target), hyper);
}

bool SparsePosterior::is_selected(std::size_t k) const {
    return std::binary_search(selected.begin(), selected.end(), k);
}

double SparsePosterior::stddev(std::size_t k) const {
    return std::sqrt(std::max(cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)), 0.0));
}

SparsePosterior select_model(const VbState& state, double pip_threshold,
                             std::vector<std::string> names) {
    const auto k = state.inclusion.size();
    SparsePosterior post;
    post.pip = state.inclusion;
    post.mean = Eigen::VectorXd::Zero(k);
    post.cov = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        if (state.inclusion(i) > pip_threshold) post.selected.push_back(static_cast<std::size_t>(i));
    for (std::size_t i : post.selected) {
        const auto ii = static_cast<Eigen::Index>(i);
        post.mean(ii) = state.mean(ii);
        for (std::size_t j : post.selected)
            post.cov(ii, static_cast<Eigen::Index>(j)) = state.cov(ii, static_cast<Eigen::Index>(j));
    }
    post.elbo_final = state.elbo_trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : state.elbo_trace.back();
    post.names = std::move(names);
    return post;
}

VbFit vb_fit(const GramSystem& sys, const SsHyperparams& hyper, const Eigen::VectorXd& w_init,
             std::vector<std::string> names) {
    hyper.validate();
    for (Eigen::Index i = 0; i < sys.gram.rows(); ++i)
        if (!(sys.gram(i, i) > 0.0))
            throw Error(ErrorCode::InvalidArgument, "dictionary column " + std::to_string(i) + " is identically zero");

    VbFit fit;
    fit.state = VbState::initial(sys, hyper, w_init);
    for (int iter = 1; iter <= hyper.max_iters; ++iter) {
        auto trace = std::move(fit.state.elbo_trace);
        fit.state = vb_update_sweep(fit.state, sys, hyper);
        trace.push_back(compute_elbo(fit.state, sys, hyper));
        fit.state.elbo_trace = std::move(trace);
        fit.iterations = iter;

        const auto& t = fit.state.elbo_trace;
        if (t.size() >= 2) {
            const double gain = t.back() - t[t.size() - 2];
            if (gain < hyper.elbo_tol && gain >= -1e-6) {
                fit.converged = true;
                break;
            }
        }
    }
    fit.posterior = select_model(fit.state, hyper.pip_threshold, std::move(names));
    return fit;
}

VbFit vb_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
             const SsHyperparams& hyper, const Eigen::VectorXd& w_init,
             std::vector<std::string> names) {
    return vb_fit(GramSystem::from(design, target), hyper, w_init, std::move(names));
}

VbFit vb_prune(const GramSystem& sys, const SsHyperparams& hyper, VbFit fit,
               std::vector<std::string> names) {
    const auto k = static_cast<std::size_t>(sys.k());
    for (;;) {
        std::vector<bool> current(k, false);
        for (auto i : fit.posterior.selected) current[i] = true;
        const std::size_t size = fit.posterior.selected.size();
        std::optional<VbFit> best;
        auto consider = [&](const std::vector<bool>& trial) {
            VbFit refit = vb_fit(sys, hyper, inclusion_from_support(trial), names);
            if (refit.posterior.selected.size() > size) return;
            const double bar = best ? best->posterior.elbo_final : fit.posterior.elbo_final + hyper.elbo_tol;
            if (refit.posterior.elbo_final > bar) best = std::move(refit);
        };
        for (auto i : fit.posterior.selected) {
            auto trial = current;
            trial[i] = false;
            consider(trial);
            for (std::size_t j = 0; j < k; ++j) {
                if (current[j]) continue;
                trial[j] = true;
                consider(trial);
                trial[j] = false;
            }
        }
        if (!best) break;
        fit = std::move(*best);
    }
    return fit;
}

Eigen::VectorXd exact_ss_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                                   const SsHyperparams& hyper) {
    hyper.validate();
    const auto k = design.cols();
    if (k > 12) throw Error(ErrorCode::TooLarge, "exact enumeration supports at most 12 columns");
    const GramSystem sys = GramSystem::from(design, target);
    const double n = static_cast<double>(sys.n_rows);
    const double a_post = hyper.noise_shape + 0.5 * n;
    const double log_p0 = std::log(hyper.inclusion_prior);
    const double log_q0 = std::log1p(-hyper.inclusion_prior);

    const std::size_t n_models = std::size_t{1} << k;
    std::vector<double> log_post(n_models);
    for (std::size_t mask = 0; mask < n_models; ++mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < k; ++i)
            if (mask & (std::size_t{1} << i)) idx.push_back(i);
        const auto r = static_cast<Eigen::Index>(idx.size());
        double quad = sys.yy;
        double log_det = 0.0;  // ln|I + v_s G_sub|
        if (r > 0) {
            Eigen::MatrixXd g(r, r);
            Eigen::VectorXd c(r);
            for (Eigen::Index i = 0; i < r; ++i) {
                c(i) = sys.cross(idx[static_cast<std::size_t>(i)]);
                for (Eigen::Index j = 0; j < r; ++j)
                    g(i, j) = sys.gram(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
            }
            g.diagonal().array() += 1.0 / hyper.slab_variance;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
            quad -= c.dot(ldlt.solve(c));
            log_det = static_cast<double>(r) * std::log(hyper.slab_variance)
                    + ldlt.vectorD().array().log().sum();
        }
        const double rr = static_cast<double>(r);
        log_post[mask] = -0.5 * log_det - a_post * std::log(hyper.noise_rate + 0.5 * std::max(quad, 0.0))
                       + rr * log_p0 + (static_cast<double>(k) - rr) * log_q0;
    }

    const double top = *std::max_element(log_post.begin(), log_post.end());
    double total = 0.0;
    Eigen::VectorXd pip = Eigen::VectorXd::Zero(k);
    for (std::size_t mask = 0; mask < n_models; ++mask) {
        const double weight = std::exp(log_post[mask] - top);
        total += weight;
        for (Eigen::Index i = 0; i < k; ++i)
            if (mask & (std::size_t{1} << i)) pip(i) += weight;
    }
    return pip / total;
}

Eigen::VectorXd inclusion_from_support(const std::vector<bool>& active) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) w(static_cast<Eigen::Index>(i)) = active[i] ? 0.99 : 0.01;
    return w;
}

}  // namespace spdefind
