#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyscan/bayes.hpp"
#include "polyscan/freq.hpp"
#include "polyscan/io.hpp"

namespace polyscan {

struct ScanOptions {
    NormalGammaPrior prior;
    bool run_freq_baseline = false;
    // Let the genotypic model compete in the min-p selection through its joint
    // 2-df F-test instead of the smaller of its two coefficient p-values.
    bool genotypic_f_test = false;
    bool standardize = false;     // center/scale the trait before scanning
    double bf_threshold = 1500.0; // summary reporting threshold
    double p_threshold = 1e-5;
    int workers = 0; // 0 = hardware concurrency
};

// One output row of the scan.
struct ScanRecord {
    std::string snp_id;
    std::int64_t n_used = 0;
    double logml_null = 0.0;
    double logml_g = 0.0;
    double logml_a = 0.0;
    double logml_d = 0.0;
    double logml_r = 0.0;
    double logml_c = 0.0;
    double log_bf_max = 0.0;
    GeneticModel best_model = GeneticModel::Additive;
    PointEstimates estimates; // of the best model: 3 values for G, else 2
    std::optional<double> min_p;
    std::optional<GeneticModel> freq_best;
    FlagSet flags;
};

// Counts how many dosage cells the kernel actually reads; lets tests assert
// the one-pass-per-SNP claim.
struct ScanInstrumentation {
    std::atomic<std::uint64_t> dosage_cells_read{0};
};

// Per-SNP kernel: one pass over `dosages`, then evidence (and optionally the
// frequentist baseline) from the accumulated moments only. `present` masks
// samples lacking a phenotype; empty means all present.
ScanRecord scan_snp(std::string snp_id, std::span<const Dosage> dosages,
                    std::span<const double> trait, std::span<const char> present,
                    const ScanOptions& options, ScanInstrumentation* instrumentation = nullptr);

// In-memory scan; output order equals input SNP order.
std::vector<ScanRecord> scan(const GenotypeMatrix& genotypes, const AlignedPhenotype& phenotype,
                             const ScanOptions& options,
                             ScanInstrumentation* instrumentation = nullptr);

struct ScanSummary {
    std::int64_t n_snps = 0;
    std::int64_t n_samples = 0;
    std::int64_t n_samples_used = 0;
    std::int64_t n_samples_dropped = 0;
    std::int64_t n_bf_hits = 0; // BF_max > bf_threshold
    std::int64_t n_p_hits = 0;  // min_p < p_threshold (baseline only)
};

// Streaming file-to-file scan: genotype rows are parsed, evaluated and
// serialized by a worker pool in bounded chunks, and written back in input
// order. Memory stays O(samples + workers), independent of SNP count.
ScanSummary scan_file(const std::string& genotype_path, const std::string& phenotype_path,
                      const std::string& output_path, const ScanOptions& options);

// ---- results serialization ---------------------------------------------------

// Fixed header; floating point uses 17 significant digits so a read-back is
// bit-exact.
std::string results_header();
std::string format_record(const ScanRecord& record);

void write_results(std::span<const ScanRecord> records, const std::string& path);
std::vector<ScanRecord> read_results(const std::string& path);

// Trait standardization used by --standardize: (y - mean) / sd over the
// present samples. Throws when the trait is constant.
void standardize_trait(std::vector<double>& values, std::span<const char> present);

} // namespace polyscan
