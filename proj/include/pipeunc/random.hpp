#ifndef PIPEUNC_RANDOM_HPP
#define PIPEUNC_RANDOM_HPP

#include <cstdint>
#include <random>

namespace pipeunc
{

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Stable across platforms
// and releases; sub-seeds must never change for a given master seed.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of one unit of work, a function of (master, tag, index) only, so a
// trial's draws do not depend on scheduling or on how many other trials run.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) noexcept
{
    return mix64(mix64(mix64(master) ^ tag) ^ index);
}

// Stream tags passed to derive_seed.
namespace seed_tag
{
inline constexpr std::uint64_t p_values = 0x70;    // uniform p list shared by both inverses
inline constexpr std::uint64_t endpoints = 0x65;   // set-valued p = 0 / p = 1 endpoint draws
inline constexpr std::uint64_t optimistic = 0x6f;  // trials driven by the optimistic stream
inline constexpr std::uint64_t pessimistic = 0x73; // trials driven by the pessimistic stream
inline constexpr std::uint64_t fixed = 0x66;       // trials at a fixed recall
} // namespace seed_tag

// mt19937_64 output is fully specified by the standard; the conversion to
// [0, 1) is done here rather than with std::uniform_real_distribution,
// whose algorithm is implementation-defined.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi); returns lo when lo == hi.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // True with probability p; never for p = 0, always for p = 1.
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace pipeunc

#endif
