#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polyscan/bayes.hpp"
#include "polyscan/flags.hpp"
#include "polyscan/genetics.hpp"

namespace polyscan {

// Ordinary least squares fit of a small design (k <= 3 columns).
struct OlsFit {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> t_stats;
    std::vector<double> p_values;
    std::int64_t residual_df = 0;
    bool degenerate = false;  // rank-deficient design or df < 1; p-values are 1
    bool perfect_fit = false; // zero residual variance; p-values are 0
};

// design is row-major n x k. Requires n > k for a non-degenerate fit.
OlsFit ols_fit(std::span<const double> design, int k, std::span<const double> trait);

// Two-sided p-value of a t statistic: I_{df/(df+t^2)}(df/2, 1/2).
// Throws std::domain_error for df < 1.
double p_value_t(double t, std::int64_t df);

// Upper-tail p-value of an F statistic with (df1, df2) degrees of freedom.
double p_value_f(double f, std::int64_t df1, std::int64_t df2);

// Five-model frequentist scan record: slope p-values for the four constrained
// codings plus the two genotypic indicator p-values, and the min-p selection.
struct FreqScanRecord {
    double p_additive = 1.0;
    double p_dominant = 1.0;
    double p_recessive = 1.0;
    double p_codominant = 1.0;
    double p_het = 1.0; // genotypic AB indicator
    double p_hom = 1.0; // genotypic BB indicator
    double min_p = 1.0;
    std::optional<GeneticModel> best_model;
    FlagSet flags;

    double p_genotypic() const { return p_het < p_hom ? p_het : p_hom; }
};

// O(1) assembly of all five fits from the per-SNP moments; this is the path
// the scan uses so the dosage vector is only ever read once. When
// use_genotypic_f_test is set, the genotypic model enters the min-p selection
// through its joint 2-df F-test instead of the smaller of the two indicator
// p-values (the indicator pair is still reported).
FreqScanRecord min_p_from_stats(const SnpSuffStats& stats, bool use_genotypic_f_test = false);

// Convenience wrapper: one accumulation pass, then min_p_from_stats.
// Requires at least 4 non-missing individuals.
FreqScanRecord min_p_scan(std::span<const Dosage> dosages, std::span<const double> trait,
                          bool use_genotypic_f_test = false);

} // namespace polyscan
