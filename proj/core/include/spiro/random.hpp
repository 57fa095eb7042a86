#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace spiro {

// All randomness in the project flows through this engine. mt19937_64's
// output sequence is fixed by the standard; the helpers below avoid the
// implementation-defined std distributions so results match across
// standard libraries.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). Rejection sampling, unbiased.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

// Uniform double in [lo, hi).
double uniform_real(Rng& rng, double lo, double hi);

// Fisher-Yates shuffle driven by uniform_index.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1),
                   first + static_cast<std::ptrdiff_t>(j));
  }
}

// Textual engine state (the standard's operator<< format) for checkpoints.
std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

}  // namespace spiro
