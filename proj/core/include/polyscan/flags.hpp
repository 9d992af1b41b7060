#pragma once

#include <cstdint>
#include <string>

namespace polyscan {

// Per-SNP diagnostic flags. Degenerate SNPs are computed, not skipped; these
// tell downstream filters what they are looking at.
enum class SnpFlag : std::uint8_t {
    Monomorphic = 1u << 0,   // at most one genotype class observed
    NoHet = 1u << 1,         // no heterozygotes
    NoHomMinor = 1u << 2,    // no coded-allele homozygotes
    PerfectFit = 1u << 3,    // a frequentist fit had zero residual variance
    DegenerateFreq = 1u << 4 // a frequentist design was rank deficient
};

class FlagSet {
public:
    void set(SnpFlag f) { bits_ |= static_cast<std::uint8_t>(f); }
    bool test(SnpFlag f) const { return bits_ & static_cast<std::uint8_t>(f); }
    bool empty() const { return bits_ == 0; }

    FlagSet& operator|=(FlagSet other) {
        bits_ |= other.bits_;
        return *this;
    }

    friend bool operator==(FlagSet a, FlagSet b) { return a.bits_ == b.bits_; }

    // Comma-joined in a fixed order so output is byte-stable.
    std::string to_string() const {
        std::string out;
        const auto append = [&](SnpFlag f, const char* name) {
            if (!test(f)) return;
            if (!out.empty()) out += ',';
            out += name;
        };
        append(SnpFlag::Monomorphic, "monomorphic");
        append(SnpFlag::NoHet, "no_het");
        append(SnpFlag::NoHomMinor, "no_hom_minor");
        append(SnpFlag::PerfectFit, "perfect_fit");
        append(SnpFlag::DegenerateFreq, "degenerate_freq");
        return out;
    }

private:
    std::uint8_t bits_ = 0;
};

} // namespace polyscan
