#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace condfit {

// Counter-based generator: the k-th output is a fixed bijective mix of
// (key + k * golden). Streams are keyed by hashing a seed together with
// any number of indices (replicate, dataset, chain...), so results do not
// depend on how work is scheduled across threads.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) : CounterRng(seed) {
        for (auto s : stream) {
            key_ = mix(key_ ^ mix(s + 0x3c6ef372fe94f82bULL));
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix(key_ + counter_ * kGolden);
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace condfit
