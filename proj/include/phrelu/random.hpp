#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace phrelu {

/// Engine used for every stream the library derives itself.
using Stream = std::mt19937_64;

/// Fixed tags that keep counter-derived streams for different purposes apart.
namespace stream_tag {
inline constexpr std::uint64_t prior = 1;
inline constexpr std::uint64_t move = 2;
inline constexpr std::uint64_t resample = 3;
inline constexpr std::uint64_t subfit = 4;
inline constexpr std::uint64_t split = 5;
inline constexpr std::uint64_t simulate = 6;
}  // namespace stream_tag

/// Derives an independent stream from a master seed and a tuple of counters,
/// e.g. (tag, iteration, particle). The result depends only on the inputs, so
/// work can be scheduled on any thread without changing the draws.
inline Stream derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * counters.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (auto c : counters) push(c);
  std::seed_seq seq(words.begin(), words.end());
  return Stream(seq);
}

/// Child seed for a nested master (e.g. sub-fit i of a decomposition).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
  auto s = derive_stream(master, counters);
  return s();
}

/// Inverse-gamma draw with shape `a` and scale `b` (density ∝ x^{-a-1} e^{-b/x}),
/// taken as the reciprocal of a Gamma(shape a, rate b) draw.
template <std::uniform_random_bit_generator Rng>
double sample_inverse_gamma(double a, double b, Rng& rng) {
  std::gamma_distribution<double> gamma(a, 1.0 / b);
  return 1.0 / gamma(rng);
}

template <std::uniform_random_bit_generator Rng>
double sample_normal(double mean, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return mean + std::sqrt(variance) * normal(rng);
}

template <std::uniform_random_bit_generator Rng>
double sample_uniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

}  // namespace phrelu
