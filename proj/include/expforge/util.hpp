#pragma once

// Shared plumbing: budget accounting for enumeration-heavy operations,
// overflow-safe integer powers, and deterministic RNG helpers.  Random
// draws go through the helpers below rather than <random> distributions
// so that a given seed produces the same stream on every platform.

#include <cstdint>
#include <cstdlib>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace expforge {

// Thrown when an operation would exceed its enumeration budget.  The
// estimate is in elementary steps; callers can raise the budget via the
// EXPFORGE_BUDGET environment variable or an explicit parameter.
struct budget_error : std::runtime_error {
  std::uint64_t estimate;
  std::uint64_t budget;
  budget_error(std::uint64_t est, std::uint64_t bud)
      : std::runtime_error("enumeration budget exceeded: needs about " +
                           std::to_string(est) + " steps, budget is " +
                           std::to_string(bud) +
                           " (set EXPFORGE_BUDGET to raise)"),
        estimate(est), budget(bud) {}
};

// base^exp without silent wraparound; nullopt means "does not fit in 64 bits".
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base,
                                                unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base) return std::nullopt;
    r *= base;
  }
  return r;
}

// Effective budget: the EXPFORGE_BUDGET environment variable overrides the
// caller's default when set to a positive integer.
inline std::uint64_t effective_budget(std::uint64_t fallback) {
  if (const char* s = std::getenv("EXPFORGE_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && v > 0) return static_cast<std::uint64_t>(v);
  }
  return fallback;
}

// Checks that `estimate` (nullopt = overflowed 64 bits) fits the budget.
inline void require_budget(std::optional<std::uint64_t> estimate,
                           std::uint64_t budget) {
  if (!estimate) throw budget_error(UINT64_MAX, budget);
  if (*estimate > budget) throw budget_error(*estimate, budget);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent engine for trial `index` of a run seeded with `seed`.
// Trials can then be partitioned across threads in any order without
// changing the stream any single trial sees.
inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

// Uniform draw from {0, ..., n-1} by rejection; unbiased and portable.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return r % n;
}

// Uniform double in (0, 1]; never returns 0 so it is safe under log().
inline double uniform_unit(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

// One standard-normal draw via Box-Muller (the sine half is discarded,
// keeping the stream layout simple and deterministic).
inline double standard_normal(std::mt19937_64& eng) {
  const double u1 = uniform_unit(eng);
  const double u2 = uniform_unit(eng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

}  // namespace expforge
