#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polyscan/bayes.hpp"
#include "polyscan/freq.hpp"
#include "polyscan/genetics.hpp"
#include "polyscan/rng.hpp"

namespace polyscan {

// How locus-specific heritability is split across causal SNPs. Uniform gives
// every causal SNP total_h2 / n_causal; the other two rules shrink additive
// contributions and grow dominant/recessive ones so the total is unchanged.
enum class H2Rule { Uniform, AdditiveHalved, AdditiveQuartered };

struct SimConfig {
    std::int64_t n_individuals = 10'000;
    std::int64_t n_snps = 50'000;
    int n_causal = 100;
    std::array<int, 3> causal_split{34, 33, 33}; // additive, dominant, recessive
    double total_h2 = 0.4;
    H2Rule h2_rule = H2Rule::Uniform;
    double maf_beta_a = 2.0;
    double maf_beta_b = 8.0;
    double maf_floor = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CausalSpec {
    std::int64_t snp_index = 0;
    GeneticModel mode = GeneticModel::Additive;
    double maf = 0.0;
    double h2 = 0.0;
    double effect_a = 0.0;   // a_j
    double dominance_d = 0.0; // d_j: 0, +a, or -a by mode
};

struct TruthTable {
    std::int64_t n_snps = 0;
    std::vector<CausalSpec> causal; // sorted by snp_index

    const CausalSpec* find(std::int64_t snp_index) const;
    bool is_causal(std::int64_t snp_index) const { return find(snp_index) != nullptr; }
};

// ---- Elementary generators -------------------------------------------------

// Beta(a, b) draw, rejection-resampled until >= floor.
double draw_maf(CounterRng& rng, double beta_a = 2.0, double beta_b = 8.0, double floor = 0.01);

// Hardy-Weinberg genotypes for coded-allele frequency p_b:
// P(2) = p_b^2, P(1) = 2 p_b (1 - p_b), P(0) = (1 - p_b)^2.
void genotypes_hwe(double p_b, std::span<Dosage> out, CounterRng& rng);
std::vector<Dosage> genotypes_hwe(double p_b, std::int64_t n, CounterRng& rng);

// Effect sizes (a, d) solving the locus heritability identity
//   h2 = 2p(1-p)[a + d(1-2p)]^2 + [2p(1-p)d]^2
// with sigma_total^2 = 1 and d = 0 / a / -a for additive / dominant /
// recessive modes.
std::pair<double, double> effect_size(double h2, double p, GeneticModel mode);

// The identity itself, for round-trip checks.
double heritability_identity(double a, double d, double p);

// Step-5 phenotype synthesis: per causal SNP j and individual i, a draw from
// N(a_j G_ij, 1/n_causal_total) is added to y_i. G uses the mode's coding
// (dosage for additive, carrier indicator for dominant, homozygote indicator
// for recessive). n_causal_total is the divisor for the noise variance;
// passing the full configured causal count keeps partial sums composable.
std::vector<double> simulate_phenotypes(std::span<const CausalSpec> causal,
                                        std::span<const std::vector<Dosage>> causal_genotypes,
                                        std::int64_t n, int n_causal_total, CounterRng& rng);

std::vector<double> permute_trait(std::span<const double> trait, CounterRng& rng);

// ---- Deterministic per-SNP substream generation ----------------------------

double snp_maf(const SimConfig& cfg, std::int64_t snp_index);
void snp_genotypes(const SimConfig& cfg, std::int64_t snp_index, std::span<Dosage> out);

TruthTable make_truth_table(const SimConfig& cfg);

// Sum of per-causal-SNP contributions, each from its own substream.
std::vector<double> make_phenotypes(const SimConfig& cfg, const TruthTable& truth);

// Null trait for the permutation study: iid standard normal.
std::vector<double> make_null_trait(const SimConfig& cfg);

// Dense in-memory genotype matrix (one byte per cell) for studies that
// re-scan the same genotypes many times.
struct DosageMatrix {
    std::int64_t n_snps = 0;
    std::int64_t n_samples = 0;
    std::vector<std::uint8_t> cells; // row-major, 0/1/2, kMissingCell = missing

    static constexpr std::uint8_t kMissingCell = 0xff;

    std::span<const std::uint8_t> row(std::int64_t snp) const {
        return {cells.data() + snp * n_samples, static_cast<std::size_t>(n_samples)};
    }
};

DosageMatrix generate_dosage_matrix(const SimConfig& cfg, int workers = 0);

// ---- Evaluation ------------------------------------------------------------

struct BayesOutcome {
    double log_bf_max = 0.0;
    GeneticModel best_model = GeneticModel::Additive;
};

struct FreqOutcome {
    double min_p = 1.0;
    std::optional<GeneticModel> best_model;
};

struct ThresholdEval {
    double p_threshold = 0.0;
    double matched_log_bf = 0.0; // -inf when every null SNP is allowed through
    std::int64_t fp_count = 0;   // frequentist null hits; Bayes matches by construction
    std::int64_t power_any_bayes = 0;
    std::int64_t power_any_freq = 0;
    std::array<std::int64_t, 3> correct_bayes{}; // additive, dominant, recessive
    std::array<std::int64_t, 3> correct_freq{};
};

struct EvalReport {
    std::int64_t n_snps = 0;
    int n_causal = 0;
    std::vector<ThresholdEval> rows;
};

// Matches a BF cutoff to each frequentist p threshold so both arms admit the
// same number of null hits, then counts detections and correct-model
// detections on the causal SNPs. Records must be indexed by SNP.
EvalReport evaluate(std::span<const BayesOutcome> bayes, std::span<const FreqOutcome> freq,
                    const TruthTable& truth, std::span<const double> p_thresholds);

void write_eval_report(const EvalReport& report, const std::string& path);

// ---- Study drivers ----------------------------------------------------------

struct PermutationStudyConfig {
    int reps = 200;
    std::uint64_t seed = 0;
    std::vector<double> p_thresholds{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    std::vector<double> bf_thresholds{100, 500, 1000, 1500, 3000, 5000};
    int workers = 0;
};

struct PermutationThresholdSummary {
    double threshold = 0.0;
    double median_count = 0.0;
    double median_rate = 0.0;
};

struct PermutationStudyResult {
    int reps = 0;
    std::int64_t n_snps = 0;
    std::vector<PermutationThresholdSummary> bf_rows; // count of log BF_max > ln(threshold)
    std::vector<PermutationThresholdSummary> p_rows;  // count of min_p < threshold
};

// Study 1: permute the trait `reps` times; per permutation scan every SNP with
// both engines and count hits per threshold; report per-permutation medians.
PermutationStudyResult permutation_study(const DosageMatrix& genotypes,
                                         std::span<const double> trait,
                                         const NormalGammaPrior& prior,
                                         const PermutationStudyConfig& cfg);

void write_permutation_result(const PermutationStudyResult& result, const std::string& path);

// Studies 2 and 3 end to end, streaming per-SNP generation (nothing the size
// of the genotype matrix is ever held).
struct PowerStudyResult {
    TruthTable truth;
    EvalReport report;
};

PowerStudyResult run_power_study(const SimConfig& cfg, std::span<const double> p_thresholds,
                                 const NormalGammaPrior& prior = {}, int workers = 0);

} // namespace polyscan
