#include "polyscan/scan.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "polyscan/io_detail.hpp"
#include "polyscan/thread_pool.hpp"

namespace polyscan {

namespace {

using io_detail::parse_genotype_header;
using io_detail::parse_genotype_row;
using io_detail::split_tabs;
using io_detail::strip_cr;

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

constexpr std::size_t kChunkRows = 256;
constexpr std::size_t kQueueCapacity = 3;

struct Chunk {
    std::int64_t first_line = 0; // 1-based line number of lines[0]
    std::vector<std::string> lines;
};

// Single-producer single-consumer bounded chunk queue.
class ChunkQueue {
public:
    void push(Chunk&& chunk) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return chunks_.size() < kQueueCapacity; });
        chunks_.push_back(std::move(chunk));
        lock.unlock();
        not_empty_.notify_one();
    }

    bool pop(Chunk& out) {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !chunks_.empty() || closed_; });
        if (chunks_.empty()) return false;
        out = std::move(chunks_.front());
        chunks_.erase(chunks_.begin());
        lock.unlock();
        not_full_.notify_one();
        return true;
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        not_empty_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::vector<Chunk> chunks_;
    bool closed_ = false;
};

std::optional<GeneticModel> parse_optional_model(std::string_view field, std::int64_t line) {
    if (field.empty()) return std::nullopt;
    const auto m = model_from_name(field);
    if (!m) throw ParseError("unknown model '" + std::string(field) + "'", line, 15);
    return m;
}

FlagSet parse_flags(std::string_view field, std::int64_t line) {
    FlagSet flags;
    std::size_t start = 0;
    while (start < field.size()) {
        std::size_t comma = field.find(',', start);
        if (comma == std::string_view::npos) comma = field.size();
        const std::string_view name = field.substr(start, comma - start);
        if (name == "monomorphic") flags.set(SnpFlag::Monomorphic);
        else if (name == "no_het") flags.set(SnpFlag::NoHet);
        else if (name == "no_hom_minor") flags.set(SnpFlag::NoHomMinor);
        else if (name == "perfect_fit") flags.set(SnpFlag::PerfectFit);
        else if (name == "degenerate_freq") flags.set(SnpFlag::DegenerateFreq);
        else throw ParseError("unknown flag '" + std::string(name) + "'", line, 16);
        start = comma + 1;
    }
    return flags;
}

} // namespace

void standardize_trait(std::vector<double>& values, std::span<const char> present) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (present.empty() || present[i]) {
            sum += values[i];
            ++n;
        }
    }
    if (n < 2) throw std::invalid_argument("standardize: need at least two phenotype values");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (present.empty() || present[i]) {
            const double d = values[i] - mean;
            ss += d * d;
        }
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw std::invalid_argument("standardize: trait has zero variance");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (present.empty() || present[i]) values[i] = (values[i] - mean) / sd;
    }
}

ScanRecord scan_snp(std::string snp_id, std::span<const Dosage> dosages,
                    std::span<const double> trait, std::span<const char> present,
                    const ScanOptions& options, ScanInstrumentation* instrumentation) {
    if (dosages.size() != trait.size() || (!present.empty() && present.size() != trait.size())) {
        throw AlignmentError("scan_snp: dosage/trait/mask lengths disagree");
    }
    // The only pass over the dosage vector; everything downstream works from
    // the accumulated moments.
    SnpSuffStats stats;
    if (present.empty()) {
        for (std::size_t i = 0; i < dosages.size(); ++i) stats.add(dosages[i], trait[i]);
    } else {
        for (std::size_t i = 0; i < dosages.size(); ++i) {
            if (present[i]) stats.add(dosages[i], trait[i]);
        }
    }
    if (instrumentation) {
        instrumentation->dosage_cells_read.fetch_add(dosages.size(), std::memory_order_relaxed);
    }

    ScanRecord rec;
    rec.snp_id = std::move(snp_id);
    rec.n_used = stats.n();

    const SnpEvidence ev = evaluate_snp(stats, options.prior);
    rec.logml_null = ev.null_model.log_ml;
    rec.logml_g = ev.alternative(GeneticModel::Genotypic).log_ml;
    rec.logml_a = ev.alternative(GeneticModel::Additive).log_ml;
    rec.logml_d = ev.alternative(GeneticModel::Dominant).log_ml;
    rec.logml_r = ev.alternative(GeneticModel::Recessive).log_ml;
    rec.logml_c = ev.alternative(GeneticModel::Codominant).log_ml;
    rec.log_bf_max = ev.log_bf_max;
    rec.best_model = ev.best_model;
    rec.estimates = ev.alternative(ev.best_model).point_estimates;
    rec.flags = ev.flags;

    if (options.run_freq_baseline) {
        const FreqScanRecord fr = min_p_from_stats(stats, options.genotypic_f_test);
        rec.min_p = fr.min_p;
        rec.freq_best = fr.best_model;
        rec.flags |= fr.flags;
    }
    return rec;
}

std::vector<ScanRecord> scan(const GenotypeMatrix& genotypes, const AlignedPhenotype& phenotype,
                             const ScanOptions& options,
                             ScanInstrumentation* instrumentation) {
    if (phenotype.values.size() != genotypes.sample_ids.size()) {
        throw AlignmentError("scan: phenotype not aligned to genotype samples");
    }
    std::vector<double> trait = phenotype.values;
    if (options.standardize) standardize_trait(trait, phenotype.present);

    std::vector<ScanRecord> records(genotypes.snp_ids.size());
    ThreadPool pool(options.workers);
    pool.parallel_for(0, static_cast<std::int64_t>(genotypes.snp_ids.size()),
                      [&](std::int64_t i) {
                          records[i] = scan_snp(genotypes.snp_ids[i], genotypes.dosages[i], trait,
                                                phenotype.present, options, instrumentation);
                      });
    return records;
}

std::string results_header() {
    return "snp_id\tn\tlogml_null\tlogml_G\tlogml_A\tlogml_D\tlogml_R\tlogml_C\t"
           "log_bf_max\tbest_model\test_0\test_1\test_2\tmin_p\tfreq_best\tflags";
}

std::string format_record(const ScanRecord& r) {
    std::string out;
    out.reserve(280);
    out += r.snp_id;
    out += '\t';
    out += std::to_string(r.n_used);
    for (const double v : {r.logml_null, r.logml_g, r.logml_a, r.logml_d, r.logml_r, r.logml_c,
                           r.log_bf_max}) {
        out += '\t';
        format_double(out, v);
    }
    out += '\t';
    out += model_name(r.best_model);
    const auto est = r.estimates.span();
    for (int i = 0; i < 3; ++i) {
        out += '\t';
        if (i < static_cast<int>(est.size())) format_double(out, est[i]);
    }
    out += '\t';
    if (r.min_p) format_double(out, *r.min_p);
    out += '\t';
    if (r.freq_best) out += model_name(*r.freq_best);
    out += '\t';
    out += r.flags.to_string();
    return out;
}

void write_results(std::span<const ScanRecord> records, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    std::string line = results_header();
    line += '\n';
    std::fwrite(line.data(), 1, line.size(), f);
    for (const ScanRecord& r : records) {
        line = format_record(r);
        line += '\n';
        if (std::fwrite(line.data(), 1, line.size(), f) != line.size()) {
            std::fclose(f);
            throw IoError("write failure on '" + path + "'");
        }
    }
    if (std::fclose(f) != 0) throw IoError("close failure on '" + path + "'");
}

std::vector<ScanRecord> read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open results file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty results file", 1, 1);
    strip_cr(line);
    if (line != results_header()) throw ParseError("unexpected results header", 1, 1);

    std::vector<ScanRecord> records;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty() && in.eof()) break;
        const std::vector<std::string> f = split_tabs(line);
        if (f.size() != 16) {
            throw ParseError("results row has " + std::to_string(f.size()) + " fields, need 16",
                             line_no, 1);
        }
        ScanRecord r;
        r.snp_id = f[0];
        r.n_used = std::strtoll(f[1].c_str(), nullptr, 10);
        const auto num = [&](int idx) {
            return io_detail::parse_double_token(f[idx], line_no, idx + 1);
        };
        r.logml_null = num(2);
        r.logml_g = num(3);
        r.logml_a = num(4);
        r.logml_d = num(5);
        r.logml_r = num(6);
        r.logml_c = num(7);
        r.log_bf_max = num(8);
        const auto best = model_from_name(f[9]);
        if (!best) throw ParseError("unknown model '" + f[9] + "'", line_no, 10);
        r.best_model = *best;
        for (int i = 0; i < 3; ++i) {
            if (!f[10 + i].empty()) {
                r.estimates.values[i] = num(10 + i);
                r.estimates.count = i + 1;
            }
        }
        if (!f[13].empty()) r.min_p = num(13);
        r.freq_best = parse_optional_model(f[14], line_no);
        r.flags = parse_flags(f[15], line_no);
        records.push_back(std::move(r));
    }
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return records;
}

ScanSummary scan_file(const std::string& genotype_path, const std::string& phenotype_path,
                      const std::string& output_path, const ScanOptions& options) {
    std::ifstream in(genotype_path, std::ios::binary);
    if (!in) throw IoError("cannot open genotype file '" + genotype_path + "'");

    std::string header;
    if (!std::getline(in, header)) throw ParseError("empty genotype file", 1, 1);
    strip_cr(header);
    const std::vector<std::string> sample_ids = parse_genotype_header(header);

    const AlignedPhenotype phenotype = load_phenotype(phenotype_path, sample_ids);
    std::vector<double> trait = phenotype.values;
    if (options.standardize) standardize_trait(trait, phenotype.present);

    std::FILE* out = std::fopen(output_path.c_str(), "wb");
    if (!out) throw IoError("cannot open '" + output_path + "' for writing");
    {
        std::string h = results_header();
        h += '\n';
        std::fwrite(h.data(), 1, h.size(), out);
    }

    ScanSummary summary;
    summary.n_samples = static_cast<std::int64_t>(sample_ids.size());
    summary.n_samples_used = phenotype.n_present;
    summary.n_samples_dropped = phenotype.n_missing_phenotype;

    const double log_bf_cut = std::log(options.bf_threshold);

    ChunkQueue queue;
    std::exception_ptr reader_error;
    std::thread reader([&] {
        try {
            Chunk chunk;
            chunk.first_line = 2;
            std::int64_t line_no = 1;
            std::string line;
            while (std::getline(in, line)) {
                ++line_no;
                strip_cr(line);
                if (line.empty() && in.eof()) break;
                if (chunk.lines.empty()) chunk.first_line = line_no;
                chunk.lines.push_back(std::move(line));
                if (chunk.lines.size() == kChunkRows) {
                    queue.push(std::move(chunk));
                    chunk = Chunk{};
                }
            }
            if (in.bad()) throw IoError("read failure on '" + genotype_path + "'");
            if (!chunk.lines.empty()) queue.push(std::move(chunk));
        } catch (...) {
            reader_error = std::current_exception();
        }
        queue.close();
    });

    ThreadPool pool(options.workers);
    std::string output_line;
    try {
        Chunk chunk;
        while (queue.pop(chunk)) {
            const std::size_t n_rows = chunk.lines.size();
            std::vector<std::string> formatted(n_rows);
            std::vector<char> bf_hit(n_rows, 0);
            std::vector<char> p_hit(n_rows, 0);

            pool.parallel_for(0, static_cast<std::int64_t>(n_rows), [&](std::int64_t i) {
                thread_local std::string snp_id;
                thread_local std::vector<Dosage> dosages;
                parse_genotype_row(chunk.lines[i], chunk.first_line + i, sample_ids.size(),
                                   snp_id, dosages);
                ScanRecord rec = scan_snp(snp_id, dosages, trait, phenotype.present, options);
                bf_hit[i] = rec.log_bf_max > log_bf_cut;
                p_hit[i] = rec.min_p && *rec.min_p < options.p_threshold;
                formatted[i] = format_record(rec);
            });

            for (std::size_t i = 0; i < n_rows; ++i) {
                output_line = std::move(formatted[i]);
                output_line += '\n';
                if (std::fwrite(output_line.data(), 1, output_line.size(), out) !=
                    output_line.size()) {
                    throw IoError("write failure on '" + output_path + "'");
                }
                summary.n_bf_hits += bf_hit[i];
                summary.n_p_hits += p_hit[i];
            }
            summary.n_snps += static_cast<std::int64_t>(n_rows);
        }
        reader.join();
        if (reader_error) std::rethrow_exception(reader_error);
    } catch (...) {
        if (reader.joinable()) {
            // Drain so the reader is not blocked on a full queue.
            Chunk scrap;
            while (queue.pop(scrap)) {
            }
            reader.join();
        }
        std::fputs("#ABORTED: scan did not complete; output is partial\n", out);
        std::fclose(out);
        throw;
    }
    if (std::fclose(out) != 0) throw IoError("close failure on '" + output_path + "'");
    return summary;
}

} // namespace polyscan
