// Command-line front end: scan, simulate, permute, evaluate.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyscan/errors.hpp"
#include "polyscan/io.hpp"
#include "polyscan/log_value.hpp"
#include "polyscan/scan.hpp"
#include "polyscan/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitIo = 3;

struct ScanArgs {
    std::string geno, pheno, out;
    double prior_r0_scale = 1.0;
    bool standardize = false;
    bool freq_baseline = false;
    bool genotypic_f_test = false;
    double bf_threshold = 1500.0;
    double p_threshold = 1e-5;
    int workers = 0;
};

struct SimulateArgs {
    std::string out_prefix;
    std::string study = "2";
    polyscan::SimConfig cfg;
    std::vector<int> split{34, 33, 33};
};

struct PermuteArgs {
    std::string geno, pheno, out;
    int reps = 200;
    std::uint64_t seed = 0;
    int workers = 0;
};

struct EvaluateArgs {
    std::string records, truth, out;
    std::vector<double> p_thresholds{1e-7, 5e-7, 1e-6, 5e-6};
};

int run_scan(const ScanArgs& args) {
    polyscan::ScanOptions options;
    options.prior.r0 = polyscan::Mat3::scaled_identity(args.prior_r0_scale);
    options.prior.validate();
    options.standardize = args.standardize;
    options.run_freq_baseline = args.freq_baseline;
    options.genotypic_f_test = args.genotypic_f_test;
    options.bf_threshold = args.bf_threshold;
    options.p_threshold = args.p_threshold;
    options.workers = args.workers;

    const polyscan::ScanSummary s =
        polyscan::scan_file(args.geno, args.pheno, args.out, options);

    std::printf("scanned %lld SNPs x %lld samples (%lld used, %lld without phenotype)\n",
                static_cast<long long>(s.n_snps), static_cast<long long>(s.n_samples),
                static_cast<long long>(s.n_samples_used),
                static_cast<long long>(s.n_samples_dropped));
    std::printf("BF_max > %.1e: %lld SNPs\n", args.bf_threshold,
                static_cast<long long>(s.n_bf_hits));
    if (args.freq_baseline) {
        std::printf("min_p < %.1e: %lld SNPs\n", args.p_threshold,
                    static_cast<long long>(s.n_p_hits));
    }
    return kExitOk;
}

int run_simulate(SimulateArgs& args) {
    polyscan::SimConfig& cfg = args.cfg;
    cfg.causal_split = {args.split[0], args.split[1], args.split[2]};
    if (args.study == "1") {
        cfg.n_causal = 0;
        cfg.causal_split = {0, 0, 0};
    } else if (args.study == "2") {
        cfg.h2_rule = polyscan::H2Rule::Uniform;
    } else if (args.study == "3a") {
        cfg.h2_rule = polyscan::H2Rule::AdditiveHalved;
    } else if (args.study == "3b") {
        cfg.h2_rule = polyscan::H2Rule::AdditiveQuartered;
    } else {
        std::fprintf(stderr, "unknown study '%s' (expected 1, 2, 3a or 3b)\n",
                     args.study.c_str());
        return kExitUsage;
    }
    cfg.validate();

    const polyscan::TruthTable truth = polyscan::make_truth_table(cfg);
    const std::vector<double> trait = args.study == "1" ? polyscan::make_null_trait(cfg)
                                                        : polyscan::make_phenotypes(cfg, truth);

    polyscan::write_genotype_file(args.out_prefix + ".geno.tsv", cfg);
    polyscan::write_phenotype_file(args.out_prefix + ".pheno.tsv", trait, cfg.n_individuals);
    polyscan::write_truth_file(args.out_prefix + ".truth.tsv", truth);

    std::printf("simulated %lld SNPs x %lld individuals (%d causal) -> %s.{geno,pheno,truth}.tsv\n",
                static_cast<long long>(cfg.n_snps), static_cast<long long>(cfg.n_individuals),
                cfg.n_causal, args.out_prefix.c_str());
    return kExitOk;
}

int run_permute(const PermuteArgs& args) {
    const polyscan::GenotypeMatrix geno = polyscan::load_genotypes(args.geno);
    const polyscan::AlignedPhenotype pheno = polyscan::load_phenotype(args.pheno, geno.sample_ids);

    // Compact to samples that carry a phenotype.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < geno.sample_ids.size(); ++i) {
        if (pheno.present[i]) kept.push_back(i);
    }
    polyscan::DosageMatrix matrix;
    matrix.n_snps = static_cast<std::int64_t>(geno.snp_ids.size());
    matrix.n_samples = static_cast<std::int64_t>(kept.size());
    matrix.cells.resize(static_cast<std::size_t>(matrix.n_snps) * matrix.n_samples);
    std::vector<double> trait(kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) trait[j] = pheno.values[kept[j]];
    for (std::int64_t snp = 0; snp < matrix.n_snps; ++snp) {
        const auto& row = geno.dosages[static_cast<std::size_t>(snp)];
        std::uint8_t* out = matrix.cells.data() + snp * matrix.n_samples;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            const polyscan::Dosage d = row[kept[j]];
            out[j] = d.is_missing() ? polyscan::DosageMatrix::kMissingCell
                                    : static_cast<std::uint8_t>(d.value());
        }
    }

    polyscan::PermutationStudyConfig cfg;
    cfg.reps = args.reps;
    cfg.seed = args.seed;
    cfg.workers = args.workers;

    const polyscan::PermutationStudyResult result =
        polyscan::permutation_study(matrix, trait, polyscan::NormalGammaPrior{}, cfg);
    polyscan::write_permutation_result(result, args.out);

    std::printf("permutation study: %d reps over %lld SNPs -> %s\n", result.reps,
                static_cast<long long>(result.n_snps), args.out.c_str());
    for (const auto& row : result.bf_rows) {
        std::printf("  BF > %-7.1e median rate %.1e\n", row.threshold, row.median_rate);
    }
    for (const auto& row : result.p_rows) {
        std::printf("  p  < %-7.1e median rate %.1e\n", row.threshold, row.median_rate);
    }
    return kExitOk;
}

int run_evaluate(const EvaluateArgs& args) {
    const std::vector<polyscan::ScanRecord> records = polyscan::read_results(args.records);
    const std::vector<polyscan::NamedCausalSpec> named = polyscan::load_truth_file(args.truth);

    std::unordered_map<std::string, std::int64_t> index_of;
    for (std::size_t i = 0; i < records.size(); ++i) {
        index_of.emplace(records[i].snp_id, static_cast<std::int64_t>(i));
    }

    polyscan::TruthTable truth;
    truth.n_snps = static_cast<std::int64_t>(records.size());
    for (const auto& row : named) {
        const auto it = index_of.find(row.snp_id);
        if (it == index_of.end()) {
            throw polyscan::AlignmentError("truth names SNP '" + row.snp_id +
                                           "' absent from the records");
        }
        polyscan::CausalSpec spec;
        spec.snp_index = it->second;
        spec.mode = row.mode;
        spec.maf = row.maf;
        spec.h2 = row.h2;
        spec.effect_a = row.effect_a;
        spec.dominance_d = row.dominance_d;
        truth.causal.push_back(spec);
    }
    std::sort(truth.causal.begin(), truth.causal.end(),
              [](const auto& a, const auto& b) { return a.snp_index < b.snp_index; });

    std::vector<polyscan::BayesOutcome> bayes(records.size());
    std::vector<polyscan::FreqOutcome> freq(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        bayes[i] = {records[i].log_bf_max, records[i].best_model};
        if (!records[i].min_p) {
            throw polyscan::AlignmentError(
                "records lack the frequentist baseline; rerun scan with --freq-baseline");
        }
        freq[i] = {*records[i].min_p, records[i].freq_best};
    }

    const polyscan::EvalReport report =
        polyscan::evaluate(bayes, freq, truth, args.p_thresholds);
    polyscan::write_eval_report(report, args.out);

    std::printf("evaluated %lld SNPs (%d causal) -> %s\n",
                static_cast<long long>(report.n_snps), report.n_causal, args.out.c_str());
    for (const auto& row : report.rows) {
        const double bf = polyscan::LogValue::from_log(row.matched_log_bf).linear();
        std::printf("  p < %-7.1e matched BF %-9.3g fp %lld bayes %lld/%d freq %lld/%d\n",
                    row.p_threshold, bf, static_cast<long long>(row.fp_count),
                    static_cast<long long>(row.power_any_bayes), report.n_causal,
                    static_cast<long long>(row.power_any_freq), report.n_causal);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian five-model SNP association scan with a frequentist min-p baseline"};
    app.set_version_flag("--version", "polyscan 0.1.0");
    app.require_subcommand(0, 1);

    ScanArgs scan_args;
    CLI::App* scan = app.add_subcommand("scan", "Scan a genotype/phenotype pair");
    scan->add_option("--geno", scan_args.geno, "Genotype TSV")->required();
    scan->add_option("--pheno", scan_args.pheno, "Phenotype TSV")->required();
    scan->add_option("--out", scan_args.out, "Output records TSV")->required();
    scan->add_option("--prior-r0-scale", scan_args.prior_r0_scale,
                     "Scale s of the prior precision R0 = s*I");
    scan->add_flag("--standardize", scan_args.standardize, "Standardize the trait first");
    scan->add_flag("--freq-baseline", scan_args.freq_baseline,
                   "Also run the five-model min-p baseline");
    scan->add_flag("--genotypic-f-test", scan_args.genotypic_f_test,
                   "Min-p uses the genotypic joint F-test rather than its two t-tests");
    scan->add_option("--bf-threshold", scan_args.bf_threshold, "Reporting threshold on BF_max");
    scan->add_option("--p-threshold", scan_args.p_threshold, "Reporting threshold on min p");
    scan->add_option("--workers", scan_args.workers, "Worker threads (0 = hardware)");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Write a simulated dataset");
    simulate->add_option("--out-prefix", sim_args.out_prefix, "Output path prefix")->required();
    simulate->add_option("--study", sim_args.study, "1 (null), 2 (uniform), 3a, 3b");
    simulate->add_option("--n", sim_args.cfg.n_individuals, "Individuals");
    simulate->add_option("--snps", sim_args.cfg.n_snps, "SNP count");
    simulate->add_option("--causal", sim_args.cfg.n_causal, "Causal SNP count");
    simulate->add_option("--split", sim_args.split, "Causal counts: additive dominant recessive")
        ->expected(3);
    simulate->add_option("--h2", sim_args.cfg.total_h2, "Total heritability");
    simulate->add_option("--seed", sim_args.cfg.seed, "Master seed");
    simulate->add_option("--maf-floor", sim_args.cfg.maf_floor, "Minimum MAF");

    PermuteArgs perm_args;
    CLI::App* permute = app.add_subcommand("permute", "Permutation null study");
    permute->add_option("--geno", perm_args.geno, "Genotype TSV")->required();
    permute->add_option("--pheno", perm_args.pheno, "Phenotype TSV")->required();
    permute->add_option("--out", perm_args.out, "Output TSV")->required();
    permute->add_option("--reps", perm_args.reps, "Permutations");
    permute->add_option("--seed", perm_args.seed, "Master seed");
    permute->add_option("--workers", perm_args.workers, "Worker threads (0 = hardware)");

    EvaluateArgs eval_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Match thresholds and count detections");
    evaluate->add_option("--records", eval_args.records, "Scan records TSV")->required();
    evaluate->add_option("--truth", eval_args.truth, "Truth TSV from simulate")->required();
    evaluate->add_option("--out", eval_args.out, "Output TSV")->required();
    evaluate->add_option("--p-thresholds", eval_args.p_thresholds, "Frequentist p thresholds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (scan->parsed()) return run_scan(scan_args);
        if (simulate->parsed()) return run_simulate(sim_args);
        if (permute->parsed()) return run_permute(perm_args);
        if (evaluate->parsed()) return run_evaluate(eval_args);
        std::fputs(app.help().c_str(), stdout);
        return kExitOk;
    } catch (const polyscan::ParseError& e) {
        if (e.line() > 0) {
            std::fprintf(stderr, "parse error at line %lld, column %lld: %s\n",
                         static_cast<long long>(e.line()), static_cast<long long>(e.column()),
                         e.what());
        } else {
            std::fprintf(stderr, "parse error: %s\n", e.what());
        }
        return kExitParse;
    } catch (const polyscan::AlignmentError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitParse;
    } catch (const polyscan::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}
