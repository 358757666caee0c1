#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "nirom/box.hpp"

namespace nirom {

/// Per-stage seed derived from the campaign seed and a fixed label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Seeded generator whose uniform draws do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Radical inverse of `index` in base `base`.
double radical_inverse(std::uint64_t index, std::uint64_t base);

/// The first `dim` primes.
std::vector<std::uint64_t> first_primes(std::size_t dim);

/// n Halton points in [0,1)^dim, starting at sequence index `offset` (>= 1).
std::vector<Vector> halton_unit(std::size_t n, Eigen::Index dim, std::uint64_t offset);

/// Sequence offset selected by a seed; never 0, so the origin corner is skipped.
std::uint64_t halton_offset(std::uint64_t seed);

}  // namespace nirom
