#include "nirom/sampling.hpp"

#include "nirom/errors.hpp"

namespace nirom {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ splitmix64(h));
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  double scale = f;
  while (index > 0) {
    result += scale * static_cast<double>(index % base);
    index /= base;
    scale *= f;
  }
  return result;
}

std::vector<std::uint64_t> first_primes(std::size_t dim) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t candidate = 2; primes.size() < dim; ++candidate) {
    bool prime = true;
    for (std::uint64_t p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

std::vector<Vector> halton_unit(std::size_t n, Eigen::Index dim, std::uint64_t offset) {
  if (dim < 1) throw DomainError("halton: dimension must be positive");
  if (offset == 0) throw DomainError("halton: offset must be at least 1");
  const auto primes = first_primes(static_cast<std::size_t>(dim));
  std::vector<Vector> out(n, Vector(dim));
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index d = 0; d < dim; ++d)
      out[i][d] = radical_inverse(offset + i, primes[static_cast<std::size_t>(d)]);
  return out;
}

std::uint64_t halton_offset(std::uint64_t seed) { return 1 + splitmix64(seed) % 4096; }

}  // namespace nirom
