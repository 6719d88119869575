#pragma once

// Reference values computed independently of the library (by hand or from
// published known-answer tables) and frozen here.

#include <array>
#include <cmath>
#include <cstdint>

namespace oracles {

// normalize({1, 2, 1.5}, {1.2, 0.1, -0.9}): weighted mean 0.05 / 4.5.
inline constexpr double kShift = 0.05 / 4.5;
inline constexpr std::array<double, 3> kNormalizedForces{1.2 - kShift, 0.1 - kShift, -0.9 - kShift};

// Unit weights, f = (1, 0, -1), cone "R.L": right groups {1,2},{3}, left
// groups {1},{2,3}.
inline constexpr std::array<double, 3> kRLPlus{0.25, 0.25, -0.5};
inline constexpr std::array<double, 3> kRLMinus{0.5, -0.25, -0.25};
inline constexpr std::array<double, 3> kRLTauPlus{0.5, 0.5, -1.0};
inline constexpr std::array<double, 3> kRLTauMinus{-1.0, 0.5, 0.5};
// (pi/32) * sum w_I f_I^2 = (pi/32) * ((2 * 0.5^2 + 1) + (1 + 2 * 0.5^2)) = 3 pi / 32.
inline const double kRLWeiss = 3.0 * M_PI / 32.0;

// W of the least-energy cone for unit weights and f = (1, -1).
inline const double kP0Weiss = M_PI / 16.0;

// Philox4x32-10 known-answer vectors (Random123 kat_vectors).
struct PhiloxKat {
  std::array<std::uint32_t, 4> ctr;
  std::array<std::uint32_t, 2> key;
  std::array<std::uint32_t, 4> out;
};
inline constexpr std::array<PhiloxKat, 3> kPhilox{{
    {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
    {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
     {0xffffffff, 0xffffffff},
     {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
    {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
     {0xa4093822, 0x299f31d0},
     {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}},
}};

// FNV-1a 64-bit reference hashes.
inline constexpr std::uint64_t kFnvEmpty = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvA = 0xaf63dc4c8601ec8cULL;
inline constexpr std::uint64_t kFnvFoobar = 0x85944171f73967e8ULL;

}  // namespace oracles
