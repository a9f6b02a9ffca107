#include "rftune/gsa.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rftune {

namespace {

struct DirectionEntry {
    unsigned degree;
    std::uint32_t coefficients;
    std::vector<std::uint32_t> initial;
};

// Joe-Kuo (new-joe-kuo-6.21201) primitive polynomials and initial direction numbers for
// dimensions 2..64; dimension 1 is the van der Corput sequence.
const std::vector<DirectionEntry>& direction_table() {
    static const std::vector<DirectionEntry> table = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
    {7, 50, {1, 3, 1, 3, 5, 53, 69}},
    {7, 55, {1, 1, 5, 5, 23, 33, 13}},
    {7, 56, {1, 1, 7, 7, 1, 61, 123}},
    {7, 59, {1, 1, 7, 9, 13, 61, 49}},
    {7, 62, {1, 3, 3, 5, 3, 55, 33}},
    {8, 14, {1, 3, 1, 15, 31, 13, 49, 245}},
    {8, 21, {1, 3, 5, 15, 31, 59, 63, 97}},
    {8, 22, {1, 3, 1, 11, 11, 11, 77, 249}},
    {8, 38, {1, 3, 1, 11, 27, 43, 71, 9}},
    {8, 47, {1, 1, 7, 15, 21, 11, 81, 45}},
    {8, 49, {1, 3, 7, 3, 25, 31, 65, 79}},
    {8, 50, {1, 3, 1, 1, 19, 11, 3, 205}},
    {8, 52, {1, 1, 5, 9, 19, 21, 29, 157}},
    {8, 56, {1, 3, 7, 11, 1, 33, 89, 185}},
    {8, 67, {1, 3, 3, 3, 15, 9, 79, 71}},
    {8, 70, {1, 3, 7, 11, 15, 39, 119, 27}},
    {8, 84, {1, 1, 3, 1, 11, 31, 97, 225}},
    {8, 97, {1, 1, 1, 3, 23, 43, 57, 177}},
    {8, 103, {1, 3, 7, 7, 17, 17, 37, 71}},
    {8, 115, {1, 3, 1, 5, 27, 63, 123, 213}},
    {8, 122, {1, 1, 3, 5, 11, 43, 53, 133}},
    {9, 8, {1, 3, 5, 5, 29, 17, 47, 173, 479}},
    {9, 13, {1, 3, 3, 11, 3, 1, 109, 9, 69}},
    {9, 16, {1, 1, 1, 5, 17, 39, 23, 5, 343}},
    {9, 22, {1, 3, 1, 5, 25, 15, 31, 103, 499}},
    {9, 25, {1, 1, 1, 11, 11, 17, 63, 105, 183}},
    {9, 44, {1, 1, 5, 11, 9, 29, 97, 231, 363}},
    {9, 47, {1, 1, 5, 15, 19, 45, 41, 7, 383}},
    {9, 52, {1, 3, 7, 7, 31, 19, 83, 137, 221}},
    {9, 55, {1, 1, 1, 3, 23, 15, 111, 223, 83}},
    {9, 59, {1, 1, 5, 13, 31, 15, 55, 25, 161}},
    {9, 62, {1, 1, 3, 13, 25, 47, 39, 87, 257}},    };
    return table;
}

constexpr unsigned kBits = 32;

std::vector<std::array<std::uint32_t, kBits>> direction_numbers(int d) {
    std::vector<std::array<std::uint32_t, kBits>> v(static_cast<std::size_t>(d));
    for (unsigned k = 0; k < kBits; ++k) v[0][k] = std::uint32_t{1} << (kBits - 1 - k);
    const auto& table = direction_table();
    for (int j = 1; j < d; ++j) {
        const auto& e = table[static_cast<std::size_t>(j - 1)];
        auto& vj = v[static_cast<std::size_t>(j)];
        const unsigned s = e.degree;
        for (unsigned k = 0; k < s && k < kBits; ++k) vj[k] = e.initial[k] << (kBits - 1 - k);
        for (unsigned k = s; k < kBits; ++k) {
            std::uint32_t value = vj[k - s] ^ (vj[k - s] >> s);
            for (unsigned l = 1; l < s; ++l)
                if ((e.coefficients >> (s - 1 - l)) & 1U) value ^= vj[k - l];
            vj[k] = value;
        }
    }
    return v;
}

}  // namespace

int sobol_max_dimension() { return static_cast<int>(direction_table().size()) + 1; }

Matrix sobol_sequence(int d, Index n, Index skip) {
    if (d < 1) throw InvalidArgument("sobol_sequence: dimension must be positive");
    if (d > sobol_max_dimension())
        throw DimensionUnsupported("sobol_sequence: at most " + std::to_string(sobol_max_dimension()) +
                                   " dimensions are supported");
    if (n < 0 || skip < 0) throw InvalidArgument("sobol_sequence: counts must be nonnegative");
    const std::uint64_t last = static_cast<std::uint64_t>(skip) + static_cast<std::uint64_t>(n);
    if (last >= (std::uint64_t{1} << kBits)) throw InvalidArgument("sobol_sequence: too many points");
    const auto v = direction_numbers(d);
    Matrix out(n, d);
    constexpr double scale = 1.0 / 4294967296.0;
    // Gray-code order; emitted point k (0-based) is sequence index skip + k + 1.
    std::vector<std::uint32_t> state(static_cast<std::size_t>(d), 0);
    const std::uint64_t first = static_cast<std::uint64_t>(skip) + 1;
    const std::uint64_t gray = first ^ (first >> 1);
    for (unsigned k = 0; k < kBits; ++k)
        if ((gray >> k) & 1U)
            for (int j = 0; j < d; ++j) state[static_cast<std::size_t>(j)] ^= v[static_cast<std::size_t>(j)][k];
    for (Index i = 0; i < n; ++i) {
        if (i > 0) {
            // gray(m) ^ gray(m - 1) has a single bit, the lowest set bit of m.
            const std::uint64_t m = first + static_cast<std::uint64_t>(i);
            const unsigned c = static_cast<unsigned>(__builtin_ctzll(m));
            for (int j = 0; j < d; ++j) state[static_cast<std::size_t>(j)] ^= v[static_cast<std::size_t>(j)][c];
        }
        for (int j = 0; j < d; ++j) out(i, j) = scale * static_cast<double>(state[static_cast<std::size_t>(j)]);
    }
    return out;
}

}  // namespace rftune
