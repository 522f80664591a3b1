#pragma once

// Portable random streams.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the standard.
// The standard distributions and std::shuffle are implementation-defined, so
// bounded integers and shuffles are computed here instead:
//   - bounded integers use Lemire's multiply-shift with rejection (unbiased);
//   - shuffles are Fisher-Yates from the back.
// Sub-streams are derived from a top-level seed with the SplitMix64 finalizer,
// keyed by a component tag and an index (class, fold, ...).

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace tempora {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a of a component name, used to key derived streams.
constexpr std::uint64_t component_tag(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for the stream of `component`, sub-stream `index`, under `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view component,
                                    std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(seed ^ component_tag(component)) + index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace tempora
