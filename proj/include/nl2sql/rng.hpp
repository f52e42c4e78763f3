#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nl2sql {

// Uniform integer in [0, n) from a mt19937 stream via rejection sampling.
// mt19937's output sequence is pinned by the standard, so results are
// reproducible across platforms (std::uniform_int_distribution is not).
inline std::uint32_t bounded_uint(std::mt19937& rng, std::uint32_t n) {
  if (n <= 1) return 0;
  const std::uint32_t limit = 0xffffffffu - (0xffffffffu % n);
  std::uint32_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

// First k entries of a seeded Fisher-Yates shuffle over [0, n): a uniform
// k-sample without replacement.
inline std::vector<std::size_t> sample_indices(std::mt19937& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + bounded_uint(rng, static_cast<std::uint32_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace nl2sql
