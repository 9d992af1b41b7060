#include "polyscan/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "polyscan/errors.hpp"
#include "polyscan/io_detail.hpp"

namespace polyscan {

namespace io_detail {

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            return fields;
        }
        fields.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> parse_genotype_header(const std::string& line) {
    std::vector<std::string> fields = split_tabs(line);
    if (fields.empty() || fields[0] != "snp_id") {
        throw ParseError("genotype header must start with 'snp_id'", 1, 1);
    }
    if (fields.size() < 2) {
        throw ParseError("genotype header names no samples", 1, 1);
    }
    fields.erase(fields.begin());
    return fields;
}

void parse_genotype_row(const std::string& line, std::int64_t line_no, std::size_t n_samples,
                        std::string& snp_id, std::vector<Dosage>& dosages) {
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
        throw ParseError("genotype row has no dosage fields", line_no, 1);
    }
    snp_id.assign(line, 0, tab);
    dosages.resize(n_samples);

    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    std::size_t count = 0;
    while (true) {
        const char* tok = p;
        while (p < end && *p != '\t') ++p;
        const std::size_t len = static_cast<std::size_t>(p - tok);
        const std::int64_t column = static_cast<std::int64_t>(count) + 2;
        if (count >= n_samples) {
            throw ParseError("genotype row has more fields than the header", line_no, column);
        }
        if (len == 1 && (*tok == '0' || *tok == '1' || *tok == '2')) {
            dosages[count] = Dosage(*tok - '0');
        } else if (len == 2 && tok[0] == 'N' && tok[1] == 'A') {
            dosages[count] = Dosage::missing();
        } else {
            throw ParseError("invalid dosage token '" + std::string(tok, len) + "'", line_no,
                             column);
        }
        ++count;
        if (p == end) break;
        ++p;
    }
    if (count != n_samples) {
        throw ParseError("genotype row has " + std::to_string(count) + " dosage fields, header has " +
                             std::to_string(n_samples),
                         line_no, static_cast<std::int64_t>(count) + 2);
    }
}

double parse_double_token(std::string_view token, std::int64_t line, std::int64_t column) {
    if (token.empty()) throw ParseError("empty numeric field", line, column);
    const std::string tmp(token);
    char* end = nullptr;
    const double value = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size()) {
        throw ParseError("invalid numeric value '" + tmp + "'", line, column);
    }
    return value;
}

} // namespace io_detail

using namespace io_detail;

Dosage parse_dosage_token(std::string_view token, std::int64_t line, std::int64_t column) {
    if (token == "0") return Dosage(0);
    if (token == "1") return Dosage(1);
    if (token == "2") return Dosage(2);
    if (token == "NA") return Dosage::missing();
    throw ParseError("invalid dosage token '" + std::string(token) + "'", line, column);
}

GenotypeMatrix load_genotypes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open genotype file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty genotype file", 1, 1);
    strip_cr(line);

    GenotypeMatrix m;
    m.sample_ids = parse_genotype_header(line);

    std::unordered_set<std::string> seen;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty() && in.eof()) break;
        std::string id;
        std::vector<Dosage> row;
        parse_genotype_row(line, line_no, m.sample_ids.size(), id, row);
        if (!seen.insert(id).second) {
            throw ParseError("duplicate snp_id '" + id + "'", line_no, 1);
        }
        m.snp_ids.push_back(std::move(id));
        m.dosages.push_back(std::move(row));
    }
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return m;
}

AlignedPhenotype load_phenotype(const std::string& path,
                                std::span<const std::string> sample_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open phenotype file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty phenotype file", 1, 1);

    std::unordered_map<std::string, double> by_sample;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty() && in.eof()) break;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw ParseError("phenotype row needs two tab-separated fields", line_no, 1);
        }
        std::string id = line.substr(0, tab);
        const double value =
            parse_double_token(std::string_view(line).substr(tab + 1), line_no, 2);
        if (!std::isfinite(value)) {
            throw ParseError("non-finite phenotype for sample '" + id + "'", line_no, 2);
        }
        if (!by_sample.emplace(std::move(id), value).second) {
            throw ParseError("duplicate sample id '" + line.substr(0, tab) + "'", line_no, 1);
        }
    }
    if (in.bad()) throw IoError("read failure on '" + path + "'");

    AlignedPhenotype aligned;
    aligned.values.assign(sample_ids.size(), std::numeric_limits<double>::quiet_NaN());
    aligned.present.assign(sample_ids.size(), 0);
    std::int64_t matched = 0;
    for (std::size_t i = 0; i < sample_ids.size(); ++i) {
        const auto it = by_sample.find(sample_ids[i]);
        if (it == by_sample.end()) {
            ++aligned.n_missing_phenotype;
            continue;
        }
        aligned.values[i] = it->second;
        aligned.present[i] = 1;
        ++matched;
    }
    aligned.n_present = matched;
    aligned.n_unmatched_phenotype = static_cast<std::int64_t>(by_sample.size()) - matched;
    if (matched == 0) {
        throw AlignmentError("no overlap between genotype and phenotype sample ids");
    }
    return aligned;
}

std::string sim_snp_id(std::int64_t snp_index) {
    return "snp_" + std::to_string(snp_index);
}

std::string sim_sample_id(std::int64_t sample_index) {
    return "ind_" + std::to_string(sample_index);
}

void write_genotype_file(const std::string& path, const SimConfig& cfg) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");

    std::string header = "snp_id";
    for (std::int64_t i = 0; i < cfg.n_individuals; ++i) {
        header += '\t';
        header += sim_sample_id(i);
    }
    header += '\n';
    std::fwrite(header.data(), 1, header.size(), f);

    std::vector<Dosage> row(static_cast<std::size_t>(cfg.n_individuals));
    std::string buf;
    for (std::int64_t snp = 0; snp < cfg.n_snps; ++snp) {
        snp_genotypes(cfg, snp, row);
        buf.clear();
        buf += sim_snp_id(snp);
        for (std::int64_t i = 0; i < cfg.n_individuals; ++i) {
            buf += '\t';
            buf += static_cast<char>('0' + row[i].value());
        }
        buf += '\n';
        if (std::fwrite(buf.data(), 1, buf.size(), f) != buf.size()) {
            std::fclose(f);
            throw IoError("write failure on '" + path + "'");
        }
    }
    if (std::fclose(f) != 0) throw IoError("close failure on '" + path + "'");
}

void write_phenotype_file(const std::string& path, std::span<const double> values,
                          std::int64_t n_individuals) {
    if (static_cast<std::int64_t>(values.size()) != n_individuals) {
        throw AlignmentError("phenotype length != individual count");
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    std::fputs("sample_id\tvalue\n", f);
    for (std::int64_t i = 0; i < n_individuals; ++i) {
        std::fprintf(f, "%s\t%.17g\n", sim_sample_id(i).c_str(), values[i]);
    }
    if (std::fclose(f) != 0) throw IoError("close failure on '" + path + "'");
}

void write_truth_file(const std::string& path, const TruthTable& truth) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    std::fputs("snp_id\tmode\tmaf\th2\teffect_a\tdominance_d\n", f);
    for (const CausalSpec& spec : truth.causal) {
        std::fprintf(f, "%s\t%s\t%.17g\t%.17g\t%.17g\t%.17g\n",
                     sim_snp_id(spec.snp_index).c_str(),
                     std::string(model_name(spec.mode)).c_str(), spec.maf, spec.h2,
                     spec.effect_a, spec.dominance_d);
    }
    if (std::fclose(f) != 0) throw IoError("close failure on '" + path + "'");
}

std::vector<NamedCausalSpec> load_truth_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open truth file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty truth file", 1, 1);

    std::vector<NamedCausalSpec> rows;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty() && in.eof()) break;
        const std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 6) {
            throw ParseError("truth row needs 6 fields", line_no, 1);
        }
        NamedCausalSpec spec;
        spec.snp_id = fields[0];
        const auto mode = model_from_name(fields[1]);
        if (!mode) throw ParseError("unknown mode '" + fields[1] + "'", line_no, 2);
        spec.mode = *mode;
        spec.maf = parse_double_token(fields[2], line_no, 3);
        spec.h2 = parse_double_token(fields[3], line_no, 4);
        spec.effect_a = parse_double_token(fields[4], line_no, 5);
        spec.dominance_d = parse_double_token(fields[5], line_no, 6);
        rows.push_back(std::move(spec));
    }
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return rows;
}

} // namespace polyscan
