#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyscan/genetics.hpp"
#include "polyscan/sim.hpp"

namespace polyscan {

// Whole-file genotype container. Format: UTF-8, tab-separated; header
// `snp_id<TAB>sample_1<TAB>...`; one row per SNP; dosage tokens 0/1/2/NA.
struct GenotypeMatrix {
    std::vector<std::string> snp_ids;
    std::vector<std::string> sample_ids;
    std::vector<std::vector<Dosage>> dosages; // [snp][sample]
};

// Throws ParseError (with 1-based line/column) on malformed headers, ragged
// rows, invalid tokens, or duplicate SNP ids.
GenotypeMatrix load_genotypes(const std::string& path);

Dosage parse_dosage_token(std::string_view token, std::int64_t line, std::int64_t column);

// Phenotype values aligned to a genotype sample order. Samples without a
// phenotype stay in the matrix but are excluded from every statistic.
struct AlignedPhenotype {
    std::vector<double> values; // indexed like sample_ids; NaN where absent
    std::vector<char> present;
    std::int64_t n_present = 0;
    std::int64_t n_missing_phenotype = 0;   // genotyped samples without a value
    std::int64_t n_unmatched_phenotype = 0; // phenotype rows naming unknown samples
};

// Two tab-separated columns `sample_id<TAB>value` with one header line.
// Throws ParseError on duplicates / non-numeric values, AlignmentError when
// no sample overlaps.
AlignedPhenotype load_phenotype(const std::string& path,
                                std::span<const std::string> sample_ids);

// ---- writers used by `simulate` ---------------------------------------------

void write_genotype_file(const std::string& path, const SimConfig& cfg);
void write_phenotype_file(const std::string& path, std::span<const double> values,
                          std::int64_t n_individuals);
void write_truth_file(const std::string& path, const TruthTable& truth);

// Truth rows as written by `simulate` (snp ids instead of indices).
struct NamedCausalSpec {
    std::string snp_id;
    GeneticModel mode;
    double maf, h2, effect_a, dominance_d;
};

std::vector<NamedCausalSpec> load_truth_file(const std::string& path);

// Canonical simulated identifiers.
std::string sim_snp_id(std::int64_t snp_index);
std::string sim_sample_id(std::int64_t sample_index);

} // namespace polyscan
