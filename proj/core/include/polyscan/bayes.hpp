#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "polyscan/flags.hpp"
#include "polyscan/genetics.hpp"
#include "polyscan/small_matrix.hpp"

namespace polyscan {

// Conjugate normal-gamma prior for the 3-parameter polynomial model:
// tau ~ Gamma(a1, a2) (shape/scale, E[tau] = a1*a2) and
// beta | tau ~ N(beta0, (tau R0)^-1).
struct NormalGammaPrior {
    Vec3 beta0{};
    Mat3 r0 = Mat3::identity();
    double a1 = 1.0;
    double a2 = 1.0;

    // Throws std::invalid_argument / SingularMatrixError when the prior is
    // unusable (a1, a2 <= 0; R0 not SPD).
    void validate() const;
};

// Single-pass per-SNP accumulators. Every model's evidence and every
// frequentist fit is assembled from these moments alone; no per-model design
// matrix is ever materialized at scan time. Genotype power sums are exact
// integer arithmetic on the class counts.
struct SnpSuffStats {
    std::array<std::int64_t, 3> genotype_counts{};
    Vec3 xty{};  // (sum y, sum g*y, sum g^2*y) over non-missing individuals
    double yty = 0.0;

    void add(Dosage g, double y) {
        if (g.is_missing()) return;
        const int gv = g.value();
        const double x = static_cast<double>(gv);
        ++genotype_counts[gv];
        xty[0] += y;
        xty[1] += x * y;
        xty[2] += (x * x) * y;
        yty += y * y;
    }

    // Field-wise sum; accumulating halves and merging matches a single pass
    // up to summation rounding.
    void merge(const SnpSuffStats& o) {
        for (int k = 0; k < 3; ++k) genotype_counts[k] += o.genotype_counts[k];
        for (int k = 0; k < 3; ++k) xty[k] += o.xty[k];
        yty += o.yty;
    }

    std::int64_t n() const {
        return genotype_counts[0] + genotype_counts[1] + genotype_counts[2];
    }

    double sum_y() const { return xty[0]; }

    // X^T X of the polynomial design (1, g, g^2); entries are integer-exact.
    Mat3 xtx() const {
        const double c1 = static_cast<double>(genotype_counts[1]);
        const double c2 = static_cast<double>(genotype_counts[2]);
        const double s0 = static_cast<double>(n());
        const double s1 = c1 + 2.0 * c2;
        const double s2 = c1 + 4.0 * c2;
        const double s3 = c1 + 8.0 * c2;
        const double s4 = c1 + 16.0 * c2;
        Mat3 m;
        m.a = {s0, s1, s2,
               s1, s2, s3,
               s2, s3, s4};
        return m;
    }

    // Per-genotype-class trait sums, recovered exactly from xty.
    std::array<double, 3> class_trait_sums() const {
        const double s2 = 0.5 * (xty[2] - xty[1]);
        const double s1 = xty[1] - 2.0 * s2;
        return {xty[0] - s1 - s2, s1, s2};
    }

    FlagSet data_flags() const {
        FlagSet f;
        const int classes = (genotype_counts[0] > 0) + (genotype_counts[1] > 0) +
                            (genotype_counts[2] > 0);
        if (classes <= 1) f.set(SnpFlag::Monomorphic);
        if (genotype_counts[1] == 0) f.set(SnpFlag::NoHet);
        if (genotype_counts[2] == 0) f.set(SnpFlag::NoHomMinor);
        return f;
    }
};

// Throws AlignmentError on length mismatch, std::invalid_argument on
// non-finite trait values, EmptyDataError when no individual is usable.
SnpSuffStats accumulate_stats(std::span<const Dosage> dosages, std::span<const double> trait);

// Updated hyper-parameters and log marginal likelihood of the polynomial fit.
struct PolynomialPosterior {
    Mat3 rn;
    Vec3 beta_n{};
    double a1n = 0.0;
    double a2n = 0.0;
    double log_ml = 0.0;
};

PolynomialPosterior fit_polynomial(const SnpSuffStats& stats, const NormalGammaPrior& prior);

// Pushforward of a Gaussian scale family through the linear map w:
// (mean, cov_scale) -> (w mean, w cov_scale w^T). cov_scale is the covariance
// scale (R^-1), not the precision.
std::pair<Vec3, Mat3> transform_gaussian(const Vec3& mean, const Mat3& cov_scale,
                                         const OmegaMatrix& w);

// Distribution of (theta0, theta1) given theta2 = 0:
// alpha | tau ~ N(mu, tau^-1 sigma_inv).
struct ConstrainedGaussian {
    std::optional<GeneticModel> model; // stamped by evidence_constrained
    Vec2 mu{};
    Mat2 sigma_inv; // covariance scale of alpha given tau
};

// Schur-complement conditioning of N(theta, tau^-1 S) on the third coordinate
// being zero. Throws SingularMatrixError when s33 <= 0.
ConstrainedGaussian condition_theta2_zero(const Vec3& theta, const Mat3& s);

// Evidence and point estimates for one model.
struct PointEstimates {
    std::array<double, 3> values{};
    int count = 0;

    std::span<const double> span() const {
        return {values.data(), static_cast<std::size_t>(count)};
    }
};

struct ModelEvidence {
    GeneticModel model = GeneticModel::Null;
    double log_ml = 0.0;
    // log_ml - log_ml(null) for the same SNP and prior; NaN until the full
    // evidence set is assembled.
    double log_bf_vs_null = 0.0;
    PointEstimates point_estimates;
    FlagSet flags;
};

// Conditioning-route evidence for one of the four constrained models. `poly`
// must come from the same stats and prior.
ModelEvidence evidence_constrained(GeneticModel model, const SnpSuffStats& stats,
                                   const NormalGammaPrior& prior,
                                   const PolynomialPosterior& poly);

// The genotypic model inherits the polynomial marginal likelihood exactly;
// only the point estimates are re-expressed as gamma_n = omega beta_n.
ModelEvidence evidence_genotypic(const PolynomialPosterior& poly);

// Intercept-only conjugate fit using the scalar slice (beta0[0], r0[0][0],
// a1, a2) of the prior.
ModelEvidence evidence_null(const SnpSuffStats& stats, const NormalGammaPrior& prior);

struct ModelSelection {
    GeneticModel best_model;
    double log_bf_max;
};

// Argmax of log_ml over the five alternatives; ties go to the earliest model
// in kAlternativeModels order. alternatives must be in that order.
ModelSelection select_model(std::span<const ModelEvidence> alternatives,
                            const ModelEvidence& null_model);

// All six evidences of one SNP from a single polynomial fit, with Bayes
// factors and selection filled in.
struct SnpEvidence {
    ModelEvidence null_model;
    std::array<ModelEvidence, 5> alternatives; // kAlternativeModels order
    GeneticModel best_model;
    double log_bf_max;
    FlagSet flags;

    const ModelEvidence& alternative(GeneticModel m) const;
};

SnpEvidence evaluate_snp(const SnpSuffStats& stats, const NormalGammaPrior& prior);

} // namespace polyscan
