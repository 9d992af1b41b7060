#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "polyscan/genetics.hpp"

namespace polyscan::io_detail {

// Shared between the whole-file loader and the streaming scan.

std::vector<std::string> split_tabs(std::string_view line);
void strip_cr(std::string& line);

// Validates the `snp_id<TAB>sample...` header and returns the sample ids.
std::vector<std::string> parse_genotype_header(const std::string& line);

// Parses one genotype row into (snp_id, dosages); dosages is resized to
// n_samples. line_no is 1-based for error reporting.
void parse_genotype_row(const std::string& line, std::int64_t line_no, std::size_t n_samples,
                        std::string& snp_id, std::vector<Dosage>& dosages);

double parse_double_token(std::string_view token, std::int64_t line, std::int64_t column);

} // namespace polyscan::io_detail
