#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace polyscan {

// Counter-mode generator built on the splitmix64 finalizer. Substreams are
// keyed by (master seed, stream id, domain), so per-SNP generation is
// deterministic and independent of evaluation order or worker count.
class CounterRng {
public:
    // Domains keep draws for different purposes out of each other's streams.
    enum class Domain : std::uint64_t {
        Maf = 1,
        Genotype = 2,
        Phenotype = 3,
        Permutation = 4,
        Trait = 5,
        Selection = 6,
    };

    explicit CounterRng(std::uint64_t key) : key_(mix(key ^ 0x8e91c9f2d6536c71ull)) {}

    static CounterRng substream(std::uint64_t master_seed, Domain domain,
                                std::uint64_t stream_id) {
        const std::uint64_t k = mix(master_seed + 0x9e3779b97f4a7c15ull) ^
                                mix(static_cast<std::uint64_t>(domain) * 0xbf58476d1ce4e5b9ull +
                                    stream_id * 0x94d049bb133111ebull + 0x2545f4914f6cdd1dull);
        return CounterRng(k);
    }

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ull;
        return mix(key_ ^ counter_);
    }

    // Uniform on the open interval (0, 1).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    // Standard normal via Box-Muller, second draw cached.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.2831853071795864769 * u2;
        cached_ = r * std::sin(angle);
        has_cached_ = true;
        return r * std::cos(angle);
    }

    // Uniform integer in [0, bound), Lemire's unbiased rejection scheme.
    // bound >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        std::uint64_t low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Gamma(shape = k, scale 1) for small integer k, as a sum of exponentials.
    double next_gamma_int(int k) {
        double log_prod = 0.0;
        for (int i = 0; i < k; ++i) log_prod += std::log(next_unit());
        return -log_prod;
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace polyscan
