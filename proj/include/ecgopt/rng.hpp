#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ecgopt {

// Deterministic random source. mt19937_64 output is pinned by the standard;
// the distributions below are hand-rolled so that streams are reproducible
// across compilers and standard libraries, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Multiply-shift bounding; the modulo bias of
    // the naive approach is avoided without a rejection loop.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    // In-place Fisher-Yates shuffle with an explicit draw sequence.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_u64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed for a named stream. Streams derived with distinct tags (and
// indices) are independent of the order in which they are consumed, which is
// what makes interrupted runs resumable.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = mix_u64(master);
    for (char c : tag) h = mix_u64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return mix_u64(h ^ index);
}

} // namespace ecgopt
