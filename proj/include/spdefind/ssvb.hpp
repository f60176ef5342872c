#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spdefind {

/// Spike-and-slab hierarchy: y ~ N(D diag(z) beta, s2 I), beta_k ~ N(0, s2 v_s),
/// z_k ~ Bern(p0), s2 ~ IG(a, b).
struct SsHyperparams {
    double slab_variance = 10.0;
    double inclusion_prior = 0.1;
    double noise_shape = 1e-4;
    double noise_rate = 1e-4;
    double tau_init = 1000.0;
    double elbo_tol = 1e-6;
    double pip_threshold = 0.5;
    int max_iters = 500;

    void validate() const;
};

/// Sufficient statistics of (D, y): everything the updates touch.
struct GramSystem {
    Eigen::MatrixXd gram;     // D^T D
    Eigen::VectorXd cross;    // D^T y
    double yy = 0.0;          // y^T y
    std::size_t n_rows = 0;

    static GramSystem from(const Eigen::MatrixXd& design, const Eigen::VectorXd& target);
    [[nodiscard]] std::size_t k() const noexcept { return static_cast<std::size_t>(gram.rows()); }
};

struct VbState {
    Eigen::VectorXd mean;        // mu^q
    Eigen::MatrixXd cov;         // Sigma^q
    double log_det_cov = 0.0;    // ln|Sigma^q|
    double shape = 0.0;          // a_sigma^q
    double rate = 0.0;           // b_sigma^q
    double tau = 0.0;            // a_sigma^q / b_sigma^q
    Eigen::VectorXd inclusion;   // w^q
    std::vector<double> elbo_trace;

    /// Starting state: w = w_init, tau = tau_init, no Gaussian factor yet.
    static VbState initial(const GramSystem& sys, const SsHyperparams& hyper,
                           const Eigen::VectorXd& w_init);
};

inline constexpr double kEtaClamp = 35.0;

/// Omega = w w^T + W(I - W).
Eigen::MatrixXd inclusion_moment(const Eigen::VectorXd& w);

/// One coordinate-ascent sweep: Sigma, mu, (a, b), tau, then w_k for
/// k = 1..K in order, each w_k seeing the already-updated entries.
/// Throws SingularPrecision if the K x K solve fails after jitter.
VbState vb_update_sweep(const VbState& state, const GramSystem& sys, const SsHyperparams& hyper);
VbState vb_update_sweep(const VbState& state, const Eigen::MatrixXd& design,
                        const Eigen::VectorXd& target, const SsHyperparams& hyper);

/// kappa = 0.5K - 0.5N ln(2 pi) - 0.5K ln(v_s).
double elbo_constant(std::size_t k, std::size_t n, double slab_variance);

/// Sum_k [w ln(p0/w) + (1-w) ln((1-p0)/(1-w))].
double bernoulli_kl_sum(const Eigen::VectorXd& w, double p0);

/// Evidence lower bound of the state.
///
/// Evaluated as kappa + a ln b - lnG(a) + lnG(a^q) - a^q ln b^q + 0.5 ln|Sigma|
/// + KL-sum + a^q - tau (b + R/2), where R is the expected residual under the
/// state's own w. The last three terms cancel whenever b^q is current, which
/// leaves the familiar closed form.
double compute_elbo(const VbState& state, const GramSystem& sys, const SsHyperparams& hyper);
double compute_elbo(const VbState& state, const Eigen::MatrixXd& design,
                    const Eigen::VectorXd& target, const SsHyperparams& hyper);

struct SparsePosterior {
    std::vector<std::size_t> selected;   // 0-based, ascending
    Eigen::VectorXd mean;                // zero off-support
    Eigen::MatrixXd cov;                 // zero rows/cols off-support
    Eigen::VectorXd pip;
    double elbo_final = 0.0;
    std::vector<std::string> names;      // empty unless supplied

    [[nodiscard]] bool is_selected(std::size_t k) const;
    [[nodiscard]] double stddev(std::size_t k) const;
};

SparsePosterior select_model(const VbState& state, double pip_threshold,
                             std::vector<std::string> names = {});

struct VbFit {
    VbState state;
    SparsePosterior posterior;
    int iterations = 0;
    bool converged = false;
};

/// Alternates sweeps and ELBO evaluation until the signed ELBO gain drops
/// below elbo_tol (checked from the second sweep on, and only while the gain
/// is >= -1e-6), or max_iters is reached (converged = false).
VbFit vb_fit(const GramSystem& sys, const SsHyperparams& hyper, const Eigen::VectorXd& w_init,
             std::vector<std::string> names = {});
VbFit vb_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
             const SsHyperparams& hyper, const Eigen::VectorXd& w_init,
             std::vector<std::string> names = {});

/// Local search over supports on the ELBO. Each round refits from the
/// indicator of every support obtained by dropping one selected term or
/// swapping it for an unselected one. The best refit is kept if it raises
/// the ELBO by more than elbo_tol and selects no more terms than the current
/// fit. Repeats until no candidate qualifies.
VbFit vb_prune(const GramSystem& sys, const SsHyperparams& hyper, VbFit fit,
               std::vector<std::string> names = {});

/// Exact marginal inclusion probabilities of the conjugate spike-and-slab
/// model by enumerating all 2^K supports. Throws TooLarge for K > 12.
Eigen::VectorXd exact_ss_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                                   const SsHyperparams& hyper);

/// Initial inclusion vector from a baseline support: 0.99 on, 0.01 off.
Eigen::VectorXd inclusion_from_support(const std::vector<bool>& active);

}  // namespace spdefind
