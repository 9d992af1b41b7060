#include "polyscan/bayes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polyscan/special_functions.hpp"

namespace polyscan {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Pieces of the log marginal likelihood that are shared by every model of
// one SNP (they depend only on n and the tau prior).
struct SharedGammaTerms {
    double a1n;
    double log_gamma_a1n;
    double prior_constant; // -a1 ln a2 - ln Gamma(a1)

    SharedGammaTerms(std::int64_t n, const NormalGammaPrior& prior)
        : a1n(prior.a1 + 0.5 * static_cast<double>(n)),
          log_gamma_a1n(log_gamma(a1n)),
          prior_constant(-prior.a1 * std::log(prior.a2) - log_gamma(prior.a1)) {}
};

double assemble_log_ml(std::int64_t n, double log_det_prior_precision,
                       double log_det_post_precision, double a2n,
                       const SharedGammaTerms& g) {
    return -0.5 * static_cast<double>(n) * kLogTwoPi +
           0.5 * (log_det_prior_precision - log_det_post_precision) +
           g.a1n * std::log(a2n) + g.log_gamma_a1n + g.prior_constant;
}

double updated_a2(double quad, double a2) {
    const double denom = 0.5 * quad + 1.0 / a2;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw std::runtime_error(
            "updated scale parameter is non-positive; sufficient statistics are corrupted");
    }
    return 1.0 / denom;
}

ModelEvidence constrained_impl(GeneticModel model, const SnpSuffStats& stats,
                               const NormalGammaPrior& prior, const PolynomialPosterior& poly,
                               const Mat3& r0_inv, const Mat3& rn_inv,
                               const SharedGammaTerms& g) {
    const OmegaMatrix& w = omega(model);

    const auto [theta0, s0] = transform_gaussian(prior.beta0, r0_inv, w);
    const auto [theta_n, s_n] = transform_gaussian(poly.beta_n, rn_inv, w);

    ModelEvidence ev;
    ev.model = model;
    ev.log_bf_vs_null = std::numeric_limits<double>::quiet_NaN();
    ev.flags = stats.data_flags();
    try {
        ConstrainedGaussian pri = condition_theta2_zero(theta0, s0);
        ConstrainedGaussian post = condition_theta2_zero(theta_n, s_n);

        const auto chol_c0 = cholesky(pri.sigma_inv);
        const auto chol_cn = cholesky(post.sigma_inv);

        // mu^T Sigma mu with Sigma = sigma_inv^-1.
        const double prior_quad = dot(pri.mu, chol_c0.solve(pri.mu));
        const double post_quad = dot(post.mu, chol_cn.solve(post.mu));

        const double a2n = updated_a2(stats.yty + prior_quad - post_quad, prior.a2);

        // |Sigma_0| / |Sigma_n| in terms of the covariance scales:
        // ln|Sigma_0| - ln|Sigma_n| = ln|C_n| - ln|C_0|.
        ev.log_ml = assemble_log_ml(stats.n(), chol_cn.log_det(), chol_c0.log_det(), a2n, g);
        ev.point_estimates.values = {post.mu[0], post.mu[1], 0.0};
        ev.point_estimates.count = 2;
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string(model_name(model)) + ": " + e.what(), e.pivot());
    }
    return ev;
}

ModelEvidence genotypic_impl(const PolynomialPosterior& poly, FlagSet flags) {
    ModelEvidence ev;
    ev.model = GeneticModel::Genotypic;
    ev.log_ml = poly.log_ml; // p(y|M_G) = p(y|M_P), same number by construction
    ev.log_bf_vs_null = std::numeric_limits<double>::quiet_NaN();
    const Vec3 gamma_n = omega(GeneticModel::Genotypic).m * poly.beta_n;
    ev.point_estimates.values = {gamma_n[0], gamma_n[1], gamma_n[2]};
    ev.point_estimates.count = 3;
    ev.flags = flags;
    return ev;
}

ModelEvidence null_impl(const SnpSuffStats& stats, const NormalGammaPrior& prior,
                        const SharedGammaTerms& g) {
    const double r0 = prior.r0(0, 0);
    const double b0 = prior.beta0[0];
    const double n = static_cast<double>(stats.n());

    const double rn = r0 + n;
    const double rhs = r0 * b0 + stats.sum_y();
    const double bn = rhs / rn;
    const double a2n = updated_a2(stats.yty + r0 * b0 * b0 - bn * rhs, prior.a2);

    ModelEvidence ev;
    ev.model = GeneticModel::Null;
    ev.log_ml = assemble_log_ml(stats.n(), std::log(r0), std::log(rn), a2n, g);
    ev.log_bf_vs_null = 0.0;
    ev.point_estimates.values = {bn, 0.0, 0.0};
    ev.point_estimates.count = 1;
    ev.flags = stats.data_flags();
    return ev;
}

} // namespace

void NormalGammaPrior::validate() const {
    if (!(a1 > 0.0) || !(a2 > 0.0)) {
        throw std::invalid_argument("prior requires a1 > 0 and a2 > 0");
    }
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(beta0[i])) throw std::invalid_argument("prior mean is not finite");
    }
    cholesky(r0); // throws SingularMatrixError when R0 is not SPD
}

SnpSuffStats accumulate_stats(std::span<const Dosage> dosages, std::span<const double> trait) {
    if (dosages.size() != trait.size()) {
        throw AlignmentError("accumulate_stats: " + std::to_string(dosages.size()) +
                             " dosages vs " + std::to_string(trait.size()) + " trait values");
    }
    SnpSuffStats stats;
    for (std::size_t i = 0; i < dosages.size(); ++i) {
        if (!dosages[i].is_missing() && !std::isfinite(trait[i])) {
            throw std::invalid_argument("accumulate_stats: non-finite trait value at index " +
                                        std::to_string(i));
        }
        stats.add(dosages[i], trait[i]);
    }
    if (stats.n() == 0) {
        throw EmptyDataError("accumulate_stats: no non-missing individuals");
    }
    return stats;
}

PolynomialPosterior fit_polynomial(const SnpSuffStats& stats, const NormalGammaPrior& prior) {
    PolynomialPosterior post;
    post.rn = prior.r0 + stats.xtx();

    const auto chol_r0 = cholesky(prior.r0);
    const auto chol_rn = cholesky(post.rn);

    Vec3 rhs = prior.r0 * prior.beta0;
    for (int i = 0; i < 3; ++i) rhs[i] += stats.xty[i];
    post.beta_n = chol_rn.solve(rhs);

    const SharedGammaTerms g(stats.n(), prior);
    post.a1n = g.a1n;
    // R_n beta_n = rhs by construction, so beta_n^T R_n beta_n = beta_n . rhs.
    const double quad = stats.yty + quadratic_form(prior.r0, prior.beta0) - dot(post.beta_n, rhs);
    post.a2n = updated_a2(quad, prior.a2);
    post.log_ml = assemble_log_ml(stats.n(), chol_r0.log_det(), chol_rn.log_det(), post.a2n, g);
    return post;
}

std::pair<Vec3, Mat3> transform_gaussian(const Vec3& mean, const Mat3& cov_scale,
                                         const OmegaMatrix& w) {
    return {w.m * mean, (w.m * cov_scale * w.m.transposed()).symmetrized()};
}

ConstrainedGaussian condition_theta2_zero(const Vec3& theta, const Mat3& s) {
    const double s33 = s(2, 2);
    if (!(s33 > 0.0)) {
        throw SingularMatrixError("conditioning block s33 <= 0", 2);
    }
    const double inv = 1.0 / s33;

    ConstrainedGaussian out;
    out.mu = {theta[0] - s(0, 2) * inv * theta[2],
              theta[1] - s(1, 2) * inv * theta[2]};
    Mat2 c;
    c(0, 0) = s(0, 0) - s(0, 2) * inv * s(2, 0);
    c(0, 1) = s(0, 1) - s(0, 2) * inv * s(2, 1);
    c(1, 0) = s(1, 0) - s(1, 2) * inv * s(2, 0);
    c(1, 1) = s(1, 1) - s(1, 2) * inv * s(2, 1);
    out.sigma_inv = c.symmetrized();
    return out;
}

ModelEvidence evidence_constrained(GeneticModel model, const SnpSuffStats& stats,
                                   const NormalGammaPrior& prior,
                                   const PolynomialPosterior& poly) {
    bool constrained = false;
    for (GeneticModel m : kConstrainedModels) constrained |= (m == model);
    if (!constrained) {
        throw std::invalid_argument("evidence_constrained: model '" +
                                    std::string(model_name(model)) + "' is not constrained");
    }
    const SharedGammaTerms g(stats.n(), prior);
    return constrained_impl(model, stats, prior, poly, spd_inverse(prior.r0),
                            spd_inverse(poly.rn), g);
}

ModelEvidence evidence_genotypic(const PolynomialPosterior& poly) {
    return genotypic_impl(poly, FlagSet{});
}

ModelEvidence evidence_null(const SnpSuffStats& stats, const NormalGammaPrior& prior) {
    return null_impl(stats, prior, SharedGammaTerms(stats.n(), prior));
}

ModelSelection select_model(std::span<const ModelEvidence> alternatives,
                            const ModelEvidence& null_model) {
    if (alternatives.size() != kAlternativeModels.size()) {
        throw std::invalid_argument("select_model: expected 5 alternative evidences");
    }
    int best = 0;
    for (int i = 1; i < static_cast<int>(alternatives.size()); ++i) {
        if (alternatives[i].log_ml > alternatives[best].log_ml) best = i;
    }
    return {alternatives[best].model, alternatives[best].log_ml - null_model.log_ml};
}

const ModelEvidence& SnpEvidence::alternative(GeneticModel m) const {
    for (std::size_t i = 0; i < kAlternativeModels.size(); ++i) {
        if (kAlternativeModels[i] == m) return alternatives[i];
    }
    throw std::invalid_argument("SnpEvidence: not an alternative model");
}

SnpEvidence evaluate_snp(const SnpSuffStats& stats, const NormalGammaPrior& prior) {
    const SharedGammaTerms g(stats.n(), prior);
    const PolynomialPosterior poly = fit_polynomial(stats, prior);
    const Mat3 r0_inv = spd_inverse(prior.r0);
    const Mat3 rn_inv = spd_inverse(poly.rn);

    SnpEvidence out;
    out.flags = stats.data_flags();
    out.null_model = null_impl(stats, prior, g);
    for (std::size_t i = 0; i < kAlternativeModels.size(); ++i) {
        const GeneticModel m = kAlternativeModels[i];
        out.alternatives[i] = (m == GeneticModel::Genotypic)
                                  ? genotypic_impl(poly, out.flags)
                                  : constrained_impl(m, stats, prior, poly, r0_inv, rn_inv, g);
        out.alternatives[i].log_bf_vs_null = out.alternatives[i].log_ml - out.null_model.log_ml;
    }
    const ModelSelection sel = select_model(out.alternatives, out.null_model);
    out.best_model = sel.best_model;
    out.log_bf_max = sel.log_bf_max;
    return out;
}

} // namespace polyscan
