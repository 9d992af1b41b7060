#include "polyscan/freq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polyscan/special_functions.hpp"

namespace polyscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Residuals below this fraction of the uncentered trait energy are treated
// as an exact fit (residual variance 0).
constexpr double kPerfectFitTol = 1e-12;

bool is_perfect(double rss, double yty) {
    return rss <= kPerfectFitTol * (yty > 1.0 ? yty : 1.0);
}

struct SlopeTest {
    double p = 1.0;
    bool degenerate = false;
    bool perfect = false;
};

// Slope t-test of the 2-column design (1, x) from its moments. sx and sxx are
// integer-exact genotype sums, so the rank test det == 0 is exact.
SlopeTest slope_test(double n, double sx, double sxx, double sxy, double sy, double syy,
                     std::int64_t df) {
    SlopeTest out;
    const double det = n * sxx - sx * sx;
    if (det == 0.0 || df < 1) {
        out.degenerate = true;
        return out;
    }
    const double b1 = (n * sxy - sx * sy) / det;
    const double b0 = (sxx * sy - sx * sxy) / det;
    const double rss = syy - b0 * sy - b1 * sxy;
    if (is_perfect(rss, syy)) {
        out.perfect = true;
        out.p = 0.0;
        return out;
    }
    const double sigma2 = rss / static_cast<double>(df);
    const double t = b1 / std::sqrt(sigma2 * n / det);
    out.p = p_value_t(t, df);
    return out;
}

} // namespace

double p_value_t(double t, std::int64_t df) {
    if (df < 1) {
        throw std::domain_error("p_value_t: require df >= 1, got " + std::to_string(df));
    }
    if (std::isinf(t)) return 0.0;
    const double d = static_cast<double>(df);
    return reg_inc_beta(0.5 * d, 0.5, d / (d + t * t));
}

double p_value_f(double f, std::int64_t df1, std::int64_t df2) {
    if (df1 < 1 || df2 < 1) {
        throw std::domain_error("p_value_f: require df1 >= 1 and df2 >= 1");
    }
    if (!(f >= 0.0)) throw std::domain_error("p_value_f: require f >= 0");
    if (std::isinf(f)) return 0.0;
    const double d1 = static_cast<double>(df1);
    const double d2 = static_cast<double>(df2);
    return reg_inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

OlsFit ols_fit(std::span<const double> design, int k, std::span<const double> trait) {
    if (k < 1 || k > 3) {
        throw std::invalid_argument("ols_fit: supported column counts are 1..3");
    }
    const std::int64_t n = static_cast<std::int64_t>(trait.size());
    if (design.size() != static_cast<std::size_t>(n) * k) {
        throw AlignmentError("ols_fit: design size does not match n x k");
    }

    OlsFit fit;
    fit.residual_df = n - k;
    fit.coefficients.assign(k, 0.0);
    fit.standard_errors.assign(k, 0.0);
    fit.t_stats.assign(k, 0.0);
    fit.p_values.assign(k, 1.0);

    // Normal-equation moments.
    double xtx[9] = {0};
    double xty[3] = {0};
    double yty = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* row = design.data() + i * k;
        const double y = trait[i];
        for (int r = 0; r < k; ++r) {
            for (int c = r; c < k; ++c) xtx[r * k + c] += row[r] * row[c];
            xty[r] += row[r] * y;
        }
        yty += y * y;
    }
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < r; ++c) xtx[r * k + c] = xtx[c * k + r];

    if (fit.residual_df < 1) {
        fit.degenerate = true;
        return fit;
    }

    // Solve and invert; a failed Cholesky pivot means rank deficiency.
    double inv_diag[3] = {0};
    double rss = 0.0;
    if (k == 1) {
        if (!(xtx[0] > 0.0)) {
            fit.degenerate = true;
            return fit;
        }
        fit.coefficients[0] = xty[0] / xtx[0];
        inv_diag[0] = 1.0 / xtx[0];
        rss = yty - fit.coefficients[0] * xty[0];
    } else {
        const auto run = [&]<int K>() -> bool {
            SquareMatrix<K> m;
            for (int i = 0; i < K * K; ++i) m.a[i] = xtx[i];
            const auto chol = try_cholesky(m);
            if (!chol) return false;
            Vec<K> b{};
            for (int i = 0; i < K; ++i) b[i] = xty[i];
            const Vec<K> coef = chol->solve(b);
            rss = yty;
            for (int i = 0; i < K; ++i) {
                fit.coefficients[i] = coef[i];
                rss -= coef[i] * xty[i];
            }
            const SquareMatrix<K> inv = spd_inverse(m);
            for (int i = 0; i < K; ++i) inv_diag[i] = inv(i, i);
            return true;
        };
        const bool ok = (k == 2) ? run.template operator()<2>() : run.template operator()<3>();
        if (!ok) {
            fit.degenerate = true;
            return fit;
        }
    }

    if (is_perfect(rss, yty)) {
        fit.perfect_fit = true;
        for (int i = 0; i < k; ++i) {
            fit.t_stats[i] = kInf;
            fit.p_values[i] = 0.0;
        }
        return fit;
    }

    const double sigma2 = rss / static_cast<double>(fit.residual_df);
    for (int i = 0; i < k; ++i) {
        fit.standard_errors[i] = std::sqrt(sigma2 * inv_diag[i]);
        fit.t_stats[i] = fit.coefficients[i] / fit.standard_errors[i];
        fit.p_values[i] = p_value_t(fit.t_stats[i], fit.residual_df);
    }
    return fit;
}

FreqScanRecord min_p_from_stats(const SnpSuffStats& stats, bool use_genotypic_f_test) {
    FreqScanRecord rec;
    rec.flags = stats.data_flags();

    const double n = static_cast<double>(stats.n());
    const double c0 = static_cast<double>(stats.genotype_counts[0]);
    const double c1 = static_cast<double>(stats.genotype_counts[1]);
    const double c2 = static_cast<double>(stats.genotype_counts[2]);
    const auto sums = stats.class_trait_sums();
    const double sy = stats.sum_y();
    const double syy = stats.yty;
    const std::int64_t df2 = stats.n() - 2;

    bool any_degenerate = false;
    bool any_perfect = false;
    const auto apply = [&](const SlopeTest& t, double& p_out) {
        any_degenerate |= t.degenerate;
        any_perfect |= t.perfect;
        p_out = t.p;
    };

    apply(slope_test(n, c1 + 2.0 * c2, c1 + 4.0 * c2, stats.xty[1], sy, syy, df2),
          rec.p_additive);
    apply(slope_test(n, c1 + c2, c1 + c2, sums[1] + sums[2], sy, syy, df2), rec.p_dominant);
    apply(slope_test(n, c2, c2, sums[2], sy, syy, df2), rec.p_recessive);
    apply(slope_test(n, c1, c1, sums[1], sy, syy, df2), rec.p_codominant);

    // Genotypic model: three free group means, two indicator contrasts vs AA.
    bool genotypic_valid = false;
    double p_joint_f = 1.0;
    if (stats.genotype_counts[0] > 0 && stats.genotype_counts[1] > 0 &&
        stats.genotype_counts[2] > 0 && stats.n() - 3 >= 1) {
        const std::int64_t df3 = stats.n() - 3;
        const double rss = syy - (sums[0] * sums[0] / c0 + sums[1] * sums[1] / c1 +
                                  sums[2] * sums[2] / c2);
        if (is_perfect(rss, syy)) {
            any_perfect = true;
            rec.p_het = 0.0;
            rec.p_hom = 0.0;
            p_joint_f = 0.0;
        } else {
            const double sigma2 = rss / static_cast<double>(df3);
            const double m0 = sums[0] / c0;
            const double t_het = (sums[1] / c1 - m0) / std::sqrt(sigma2 * (1.0 / c1 + 1.0 / c0));
            const double t_hom = (sums[2] / c2 - m0) / std::sqrt(sigma2 * (1.0 / c2 + 1.0 / c0));
            rec.p_het = p_value_t(t_het, df3);
            rec.p_hom = p_value_t(t_hom, df3);
            const double tss = syy - sy * sy / n;
            // tss - rss >= 0 up to rounding; keep the F statistic in domain
            p_joint_f = p_value_f(std::max(0.0, 0.5 * (tss - rss) / sigma2), 2, df3);
        }
        genotypic_valid = true;
    } else {
        any_degenerate = true;
    }

    if (any_degenerate) rec.flags.set(SnpFlag::DegenerateFreq);
    if (any_perfect) rec.flags.set(SnpFlag::PerfectFit);

    // Min over all six p-values (degenerate entries sit at 1), best model over
    // the valid fits only, ties to the earliest in kAlternativeModels order.
    const double det_a = n * (c1 + 4.0 * c2) - (c1 + 2.0 * c2) * (c1 + 2.0 * c2);
    const bool valid_a = det_a != 0.0 && df2 >= 1;
    const double sd = c1 + c2;
    const bool valid_d = (n * sd - sd * sd) != 0.0 && df2 >= 1;
    const bool valid_r = (n * c2 - c2 * c2) != 0.0 && df2 >= 1;
    const bool valid_c = (n * c1 - c1 * c1) != 0.0 && df2 >= 1;

    const struct {
        GeneticModel model;
        double p;
        bool valid;
    } candidates[] = {
        {GeneticModel::Additive, rec.p_additive, valid_a},
        {GeneticModel::Dominant, rec.p_dominant, valid_d},
        {GeneticModel::Recessive, rec.p_recessive, valid_r},
        {GeneticModel::Codominant, rec.p_codominant, valid_c},
        {GeneticModel::Genotypic, use_genotypic_f_test ? p_joint_f : rec.p_genotypic(),
         genotypic_valid},
    };

    rec.min_p = 1.0;
    for (const auto& cand : candidates) {
        if (cand.p < rec.min_p) rec.min_p = cand.p;
    }
    double best_p = kInf;
    for (const auto& cand : candidates) {
        if (!cand.valid) continue;
        if (cand.p < best_p) { // strict, so the earliest model wins ties
            best_p = cand.p;
            rec.best_model = cand.model;
        }
    }
    return rec;
}

FreqScanRecord min_p_scan(std::span<const Dosage> dosages, std::span<const double> trait,
                          bool use_genotypic_f_test) {
    const SnpSuffStats stats = accumulate_stats(dosages, trait);
    if (stats.n() < 4) {
        throw std::invalid_argument("min_p_scan: need at least 4 non-missing individuals");
    }
    return min_p_from_stats(stats, use_genotypic_f_test);
}

} // namespace polyscan
