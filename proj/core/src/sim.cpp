#include "polyscan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "polyscan/log_value.hpp"
#include "polyscan/thread_pool.hpp"

namespace polyscan {

namespace {

double median_of(std::vector<std::int64_t> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return static_cast<double>(values[n / 2]);
    return 0.5 * (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2]));
}

// n_causal distinct SNP indices, uniform without replacement (partial
// Fisher-Yates over an implicit identity array).
std::vector<std::int64_t> pick_causal_indices(std::int64_t n_snps, int n_causal,
                                              CounterRng& rng) {
    std::unordered_map<std::int64_t, std::int64_t> swapped;
    std::vector<std::int64_t> picked;
    picked.reserve(n_causal);
    for (int i = 0; i < n_causal; ++i) {
        const std::int64_t j =
            i + static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n_snps - i)));
        const auto value_at = [&](std::int64_t k) {
            const auto it = swapped.find(k);
            return it == swapped.end() ? k : it->second;
        };
        const std::int64_t vi = value_at(i);
        const std::int64_t vj = value_at(j);
        picked.push_back(vj);
        swapped[j] = vi;
    }
    return picked;
}

double per_snp_h2(const SimConfig& cfg, GeneticModel mode) {
    const double base = cfg.total_h2 / static_cast<double>(cfg.n_causal);
    if (cfg.h2_rule == H2Rule::Uniform) return base;

    const double keep = cfg.h2_rule == H2Rule::AdditiveHalved ? 0.5 : 0.25;
    if (mode == GeneticModel::Additive) return base * keep;

    // The heritability shed by additive SNPs is spread evenly over the
    // dominant and recessive ones so the total is conserved exactly.
    const double n_add = static_cast<double>(cfg.causal_split[0]);
    const double n_dr = static_cast<double>(cfg.causal_split[1] + cfg.causal_split[2]);
    return base * (static_cast<double>(cfg.n_causal) - n_add * keep) / n_dr;
}

} // namespace

void SimConfig::validate() const {
    if (n_individuals < 1) throw std::invalid_argument("n_individuals must be positive");
    if (n_snps < 1) throw std::invalid_argument("n_snps must be positive");
    if (n_causal < 0 || n_causal > n_snps) {
        throw std::invalid_argument("n_causal must lie in [0, n_snps]");
    }
    if (causal_split[0] + causal_split[1] + causal_split[2] != n_causal) {
        throw std::invalid_argument("causal_split must sum to n_causal");
    }
    if (n_causal > 0 && !(total_h2 > 0.0 && total_h2 < 1.0)) {
        throw std::invalid_argument("total_h2 must lie in (0, 1)");
    }
    if (h2_rule != H2Rule::Uniform && causal_split[1] + causal_split[2] == 0) {
        throw std::invalid_argument("rebalancing rules need dominant/recessive causal SNPs");
    }
    if (!(maf_beta_a > 0.0 && maf_beta_b > 0.0)) {
        throw std::invalid_argument("MAF beta parameters must be positive");
    }
    if (!(maf_floor >= 0.0 && maf_floor < 0.5)) {
        throw std::invalid_argument("maf_floor must lie in [0, 0.5)");
    }
}

const CausalSpec* TruthTable::find(std::int64_t snp_index) const {
    const auto it = std::lower_bound(causal.begin(), causal.end(), snp_index,
                                     [](const CausalSpec& s, std::int64_t idx) {
                                         return s.snp_index < idx;
                                     });
    if (it == causal.end() || it->snp_index != snp_index) return nullptr;
    return &*it;
}

double draw_maf(CounterRng& rng, double beta_a, double beta_b, double floor) {
    // Beta(a, b) as Gamma(a) / (Gamma(a) + Gamma(b)); integer shapes here.
    const int ka = static_cast<int>(beta_a);
    const int kb = static_cast<int>(beta_b);
    if (static_cast<double>(ka) != beta_a || static_cast<double>(kb) != beta_b || ka < 1 ||
        kb < 1) {
        throw std::invalid_argument("draw_maf: beta shape parameters must be positive integers");
    }
    for (int tries = 0; tries < 10000; ++tries) {
        const double ga = rng.next_gamma_int(ka);
        const double gb = rng.next_gamma_int(kb);
        const double x = ga / (ga + gb);
        if (x >= floor) return x;
    }
    throw std::runtime_error("draw_maf: rejection sampling failed to clear the MAF floor");
}

void genotypes_hwe(double p_b, std::span<Dosage> out, CounterRng& rng) {
    if (!(p_b > 0.0 && p_b < 1.0)) {
        throw std::domain_error("genotypes_hwe: allele frequency must lie in (0, 1)");
    }
    // Exact 64-bit thresholds: u < t2 -> BB, u < t1 -> AB, else AA.
    const long double scale = 18446744073709551616.0L; // 2^64
    const long double p = p_b;
    const std::uint64_t t2 = static_cast<std::uint64_t>(p * p * scale);
    const std::uint64_t t1 = static_cast<std::uint64_t>((p * p + 2.0L * p * (1.0L - p)) * scale);
    for (auto& g : out) {
        const std::uint64_t u = rng.next_u64();
        g = Dosage(u < t2 ? 2 : (u < t1 ? 1 : 0));
    }
}

std::vector<Dosage> genotypes_hwe(double p_b, std::int64_t n, CounterRng& rng) {
    std::vector<Dosage> out(static_cast<std::size_t>(n));
    genotypes_hwe(p_b, out, rng);
    return out;
}

double heritability_identity(double a, double d, double p) {
    const double het = 2.0 * p * (1.0 - p);
    const double add = a + d * (1.0 - 2.0 * p);
    const double dom = het * d;
    return het * add * add + dom * dom;
}

std::pair<double, double> effect_size(double h2, double p, GeneticModel mode) {
    if (!(h2 > 0.0)) throw std::domain_error("effect_size: h2 must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("effect_size: p must lie in (0, 1)");

    const double het = 2.0 * p * (1.0 - p);
    double denom = 0.0;
    double d_sign = 0.0;
    switch (mode) {
    case GeneticModel::Additive:
        denom = het;
        d_sign = 0.0;
        break;
    case GeneticModel::Dominant: {
        const double u = 2.0 - 2.0 * p; // a + d(1-2p) = a(2-2p) at d = a
        denom = het * u * u + het * het;
        d_sign = 1.0;
        break;
    }
    case GeneticModel::Recessive: {
        const double u = 2.0 * p; // a + d(1-2p) = 2ap at d = -a
        denom = het * u * u + het * het;
        d_sign = -1.0;
        break;
    }
    default:
        throw std::invalid_argument("effect_size: mode must be additive, dominant or recessive");
    }
    const double a = std::sqrt(h2 / denom);
    return {a, d_sign * a};
}

std::vector<double> simulate_phenotypes(std::span<const CausalSpec> causal,
                                        std::span<const std::vector<Dosage>> causal_genotypes,
                                        std::int64_t n, int n_causal_total, CounterRng& rng) {
    if (causal.size() != causal_genotypes.size()) {
        throw AlignmentError("simulate_phenotypes: specs and genotype rows differ in count");
    }
    if (n_causal_total < 1) {
        throw std::invalid_argument("simulate_phenotypes: n_causal_total must be positive");
    }
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    const double sd = std::sqrt(1.0 / static_cast<double>(n_causal_total));
    for (std::size_t j = 0; j < causal.size(); ++j) {
        const CausalSpec& spec = causal[j];
        const auto& geno = causal_genotypes[j];
        if (static_cast<std::int64_t>(geno.size()) != n) {
            throw AlignmentError("simulate_phenotypes: genotype row length mismatch");
        }
        for (std::int64_t i = 0; i < n; ++i) {
            const double g = geno[i].is_missing()
                                 ? 0.0
                                 : model_design_value(spec.mode, geno[i].value());
            y[i] += spec.effect_a * g + sd * rng.next_normal();
        }
    }
    return y;
}

std::vector<double> permute_trait(std::span<const double> trait, CounterRng& rng) {
    if (trait.empty()) throw std::invalid_argument("permute_trait: empty trait");
    std::vector<double> out(trait.begin(), trait.end());
    rng.shuffle(std::span<double>(out));
    return out;
}

double snp_maf(const SimConfig& cfg, std::int64_t snp_index) {
    CounterRng rng = CounterRng::substream(cfg.seed, CounterRng::Domain::Maf,
                                           static_cast<std::uint64_t>(snp_index));
    return draw_maf(rng, cfg.maf_beta_a, cfg.maf_beta_b, cfg.maf_floor);
}

void snp_genotypes(const SimConfig& cfg, std::int64_t snp_index, std::span<Dosage> out) {
    CounterRng rng = CounterRng::substream(cfg.seed, CounterRng::Domain::Genotype,
                                           static_cast<std::uint64_t>(snp_index));
    genotypes_hwe(snp_maf(cfg, snp_index), out, rng);
}

TruthTable make_truth_table(const SimConfig& cfg) {
    cfg.validate();
    TruthTable truth;
    truth.n_snps = cfg.n_snps;
    if (cfg.n_causal == 0) return truth;

    CounterRng rng = CounterRng::substream(cfg.seed, CounterRng::Domain::Selection, 0);
    std::vector<std::int64_t> indices = pick_causal_indices(cfg.n_snps, cfg.n_causal, rng);
    std::sort(indices.begin(), indices.end());

    std::vector<GeneticModel> modes;
    modes.reserve(cfg.n_causal);
    for (int i = 0; i < cfg.causal_split[0]; ++i) modes.push_back(GeneticModel::Additive);
    for (int i = 0; i < cfg.causal_split[1]; ++i) modes.push_back(GeneticModel::Dominant);
    for (int i = 0; i < cfg.causal_split[2]; ++i) modes.push_back(GeneticModel::Recessive);
    rng.shuffle(std::span<GeneticModel>(modes));

    truth.causal.reserve(cfg.n_causal);
    for (int j = 0; j < cfg.n_causal; ++j) {
        CausalSpec spec;
        spec.snp_index = indices[j];
        spec.mode = modes[j];
        spec.maf = snp_maf(cfg, spec.snp_index);
        spec.h2 = per_snp_h2(cfg, spec.mode);
        const auto [a, d] = effect_size(spec.h2, spec.maf, spec.mode);
        spec.effect_a = a;
        spec.dominance_d = d;
        truth.causal.push_back(spec);
    }
    return truth;
}

std::vector<double> make_phenotypes(const SimConfig& cfg, const TruthTable& truth) {
    std::vector<double> y(static_cast<std::size_t>(cfg.n_individuals), 0.0);
    std::vector<std::vector<Dosage>> row(1);
    row[0].resize(static_cast<std::size_t>(cfg.n_individuals));
    for (const CausalSpec& spec : truth.causal) {
        snp_genotypes(cfg, spec.snp_index, row[0]);
        CounterRng rng = CounterRng::substream(cfg.seed, CounterRng::Domain::Phenotype,
                                               static_cast<std::uint64_t>(spec.snp_index));
        const std::vector<double> part = simulate_phenotypes(
            std::span<const CausalSpec>(&spec, 1), row, cfg.n_individuals, cfg.n_causal, rng);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += part[i];
    }
    return y;
}

std::vector<double> make_null_trait(const SimConfig& cfg) {
    CounterRng rng = CounterRng::substream(cfg.seed, CounterRng::Domain::Trait, 0);
    std::vector<double> y(static_cast<std::size_t>(cfg.n_individuals));
    for (auto& v : y) v = rng.next_normal();
    return y;
}

DosageMatrix generate_dosage_matrix(const SimConfig& cfg, int workers) {
    cfg.validate();
    DosageMatrix m;
    m.n_snps = cfg.n_snps;
    m.n_samples = cfg.n_individuals;
    m.cells.resize(static_cast<std::size_t>(cfg.n_snps) * cfg.n_individuals);

    ThreadPool pool(workers);
    pool.parallel_for(0, cfg.n_snps, [&](std::int64_t snp) {
        thread_local std::vector<Dosage> row;
        row.resize(static_cast<std::size_t>(cfg.n_individuals));
        snp_genotypes(cfg, snp, row);
        std::uint8_t* out = m.cells.data() + snp * cfg.n_individuals;
        for (std::int64_t i = 0; i < cfg.n_individuals; ++i) {
            out[i] = static_cast<std::uint8_t>(row[i].value());
        }
    });
    return m;
}

EvalReport evaluate(std::span<const BayesOutcome> bayes, std::span<const FreqOutcome> freq,
                    const TruthTable& truth, std::span<const double> p_thresholds) {
    if (bayes.size() != freq.size() ||
        static_cast<std::int64_t>(bayes.size()) != truth.n_snps) {
        throw AlignmentError("evaluate: record and truth lengths disagree");
    }

    EvalReport report;
    report.n_snps = truth.n_snps;
    report.n_causal = static_cast<int>(truth.causal.size());

    // Null-SNP log BFs, descending: the matched cutoff for k allowed hits is
    // the (k+1)-th largest value, the smallest cutoff admitting <= k.
    std::vector<double> null_bf;
    null_bf.reserve(bayes.size());
    for (std::int64_t i = 0; i < truth.n_snps; ++i) {
        if (!truth.is_causal(i)) null_bf.push_back(bayes[i].log_bf_max);
    }
    std::sort(null_bf.begin(), null_bf.end(), std::greater<>());

    const auto mode_slot = [](GeneticModel m) -> int {
        switch (m) {
        case GeneticModel::Additive: return 0;
        case GeneticModel::Dominant: return 1;
        case GeneticModel::Recessive: return 2;
        default: return -1;
        }
    };

    for (const double threshold : p_thresholds) {
        ThresholdEval row;
        row.p_threshold = threshold;

        std::int64_t fp = 0;
        for (std::int64_t i = 0; i < truth.n_snps; ++i) {
            if (!truth.is_causal(i) && freq[i].min_p < threshold) ++fp;
        }
        row.fp_count = fp;
        row.matched_log_bf = fp < static_cast<std::int64_t>(null_bf.size())
                                 ? null_bf[static_cast<std::size_t>(fp)]
                                 : -std::numeric_limits<double>::infinity();

        for (const CausalSpec& spec : truth.causal) {
            const std::size_t i = static_cast<std::size_t>(spec.snp_index);
            const int slot = mode_slot(spec.mode);
            if (bayes[i].log_bf_max > row.matched_log_bf) {
                ++row.power_any_bayes;
                if (slot >= 0 && bayes[i].best_model == spec.mode) ++row.correct_bayes[slot];
            }
            if (freq[i].min_p < threshold) {
                ++row.power_any_freq;
                if (slot >= 0 && freq[i].best_model && *freq[i].best_model == spec.mode) {
                    ++row.correct_freq[slot];
                }
            }
        }
        report.rows.push_back(row);
    }
    return report;
}

PermutationStudyResult permutation_study(const DosageMatrix& genotypes,
                                         std::span<const double> trait,
                                         const NormalGammaPrior& prior,
                                         const PermutationStudyConfig& cfg) {
    if (static_cast<std::int64_t>(trait.size()) != genotypes.n_samples) {
        throw AlignmentError("permutation_study: trait length != sample count");
    }
    if (cfg.reps < 1) throw std::invalid_argument("permutation_study: reps must be positive");

    std::vector<double> log_bf_cuts;
    for (const double bf : cfg.bf_thresholds) log_bf_cuts.push_back(std::log(bf));

    // counts[rep * n_thresholds + t]
    const std::size_t n_bf = cfg.bf_thresholds.size();
    const std::size_t n_p = cfg.p_thresholds.size();
    std::vector<std::int64_t> bf_counts(cfg.reps * n_bf, 0);
    std::vector<std::int64_t> p_counts(cfg.reps * n_p, 0);

    ThreadPool pool(cfg.workers);
    pool.parallel_for(0, cfg.reps, [&](std::int64_t rep) {
        CounterRng rng = CounterRng::substream(cfg.seed, CounterRng::Domain::Permutation,
                                               static_cast<std::uint64_t>(rep));
        const std::vector<double> y = permute_trait(trait, rng);

        std::int64_t* bf_row = bf_counts.data() + rep * n_bf;
        std::int64_t* p_row = p_counts.data() + rep * n_p;
        for (std::int64_t snp = 0; snp < genotypes.n_snps; ++snp) {
            SnpSuffStats stats;
            const std::uint8_t* cells = genotypes.cells.data() + snp * genotypes.n_samples;
            for (std::int64_t i = 0; i < genotypes.n_samples; ++i) {
                if (cells[i] != DosageMatrix::kMissingCell) {
                    stats.add(Dosage(cells[i]), y[i]);
                }
            }
            if (stats.n() == 0) continue;
            const SnpEvidence ev = evaluate_snp(stats, prior);
            for (std::size_t t = 0; t < n_bf; ++t) {
                if (ev.log_bf_max > log_bf_cuts[t]) ++bf_row[t];
            }
            const FreqScanRecord fr = min_p_from_stats(stats);
            for (std::size_t t = 0; t < n_p; ++t) {
                if (fr.min_p < cfg.p_thresholds[t]) ++p_row[t];
            }
        }
    }, /*grain=*/1);

    PermutationStudyResult result;
    result.reps = cfg.reps;
    result.n_snps = genotypes.n_snps;
    for (std::size_t t = 0; t < n_bf; ++t) {
        std::vector<std::int64_t> per_rep(cfg.reps);
        for (int r = 0; r < cfg.reps; ++r) per_rep[r] = bf_counts[r * n_bf + t];
        const double med = median_of(std::move(per_rep));
        result.bf_rows.push_back(
            {cfg.bf_thresholds[t], med, med / static_cast<double>(genotypes.n_snps)});
    }
    for (std::size_t t = 0; t < n_p; ++t) {
        std::vector<std::int64_t> per_rep(cfg.reps);
        for (int r = 0; r < cfg.reps; ++r) per_rep[r] = p_counts[r * n_p + t];
        const double med = median_of(std::move(per_rep));
        result.p_rows.push_back(
            {cfg.p_thresholds[t], med, med / static_cast<double>(genotypes.n_snps)});
    }
    return result;
}

PowerStudyResult run_power_study(const SimConfig& cfg, std::span<const double> p_thresholds,
                                 const NormalGammaPrior& prior, int workers) {
    PowerStudyResult out;
    out.truth = make_truth_table(cfg);
    const std::vector<double> trait = make_phenotypes(cfg, out.truth);

    std::vector<BayesOutcome> bayes(static_cast<std::size_t>(cfg.n_snps));
    std::vector<FreqOutcome> freq(static_cast<std::size_t>(cfg.n_snps));

    ThreadPool pool(workers);
    pool.parallel_for(0, cfg.n_snps, [&](std::int64_t snp) {
        thread_local std::vector<Dosage> row;
        row.resize(static_cast<std::size_t>(cfg.n_individuals));
        snp_genotypes(cfg, snp, row);
        SnpSuffStats stats;
        for (std::int64_t i = 0; i < cfg.n_individuals; ++i) stats.add(row[i], trait[i]);
        const SnpEvidence ev = evaluate_snp(stats, prior);
        bayes[snp] = {ev.log_bf_max, ev.best_model};
        const FreqScanRecord fr = min_p_from_stats(stats);
        freq[snp] = {fr.min_p, fr.best_model};
    });

    out.report = evaluate(bayes, freq, out.truth, p_thresholds);
    return out;
}

void write_eval_report(const EvalReport& report, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    std::fputs(
        "threshold\tmatched_bf\tfp_count\tpower_any_bayes\tpower_any_freq\t"
        "correct_A_bayes\tcorrect_D_bayes\tcorrect_R_bayes\t"
        "correct_A_freq\tcorrect_D_freq\tcorrect_R_freq\n",
        f);
    for (const ThresholdEval& row : report.rows) {
        const double bf = LogValue::from_log(row.matched_log_bf).linear();
        std::fprintf(f, "%.17g\t%.17g\t%lld\t%lld\t%lld\t%lld\t%lld\t%lld\t%lld\t%lld\t%lld\n",
                     row.p_threshold, bf, static_cast<long long>(row.fp_count),
                     static_cast<long long>(row.power_any_bayes),
                     static_cast<long long>(row.power_any_freq),
                     static_cast<long long>(row.correct_bayes[0]),
                     static_cast<long long>(row.correct_bayes[1]),
                     static_cast<long long>(row.correct_bayes[2]),
                     static_cast<long long>(row.correct_freq[0]),
                     static_cast<long long>(row.correct_freq[1]),
                     static_cast<long long>(row.correct_freq[2]));
    }
    std::fclose(f);
}

void write_permutation_result(const PermutationStudyResult& result, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    std::fputs("kind\tthreshold\tmedian_count\tmedian_rate\n", f);
    for (const auto& row : result.bf_rows) {
        std::fprintf(f, "bf\t%.17g\t%.17g\t%.17g\n", row.threshold, row.median_count,
                     row.median_rate);
    }
    for (const auto& row : result.p_rows) {
        std::fprintf(f, "p\t%.17g\t%.17g\t%.17g\n", row.threshold, row.median_count,
                     row.median_rate);
    }
    std::fclose(f);
}

} // namespace polyscan
