#pragma once

#include "rftune/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rftune {

using Rng = std::mt19937_64;

/// Hashes a seed and a list of tags into a well-mixed 64-bit value (splitmix64 chain).
std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Independent generator for the substream addressed by (seed, tags...).
/// The same address always yields the same stream, regardless of call order.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {});

/// Draws a fresh seed from an existing generator, for handing to a child stream.
std::uint64_t draw_seed(Rng& rng);

double standard_normal(Rng& rng);
Vector standard_normal(Rng& rng, Index n);
Matrix standard_normal(Rng& rng, Index rows, Index cols);
double uniform(Rng& rng, double lo, double hi);

/// Stream tags used throughout the library so that substreams never collide.
namespace stream_tag {
inline constexpr std::uint64_t prior = 0x7072696f72ULL;
inline constexpr std::uint64_t forward = 0x666f7277ULL;
inline constexpr std::uint64_t perturb = 0x70657274ULL;
inline constexpr std::uint64_t inflate = 0x696e666cULL;
inline constexpr std::uint64_t resample = 0x72657361ULL;
inline constexpr std::uint64_t gamma = 0x67616d6dULL;
inline constexpr std::uint64_t features = 0x66656174ULL;
inline constexpr std::uint64_t data = 0x64617461ULL;
inline constexpr std::uint64_t partition = 0x70617274ULL;
inline constexpr std::uint64_t mcmc = 0x6d636d63ULL;
}  // namespace stream_tag

}  // namespace rftune
