#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mlhy {

struct Composition {
  std::vector<long> counts;  // per-symbol counts, summing to the block length

  long block_length() const {
    long n = 0;
    for (long c : counts) n += c;
    return n;
  }
};

// n-type approximation of pmf minimizing D(type || pmf): floor initialization,
// then greedy assignment of the remaining slots (ties toward the lower index).
Composition quantize_distribution(std::span<const double> pmf, long block_length);

struct CcdmCode {
  Composition composition;
  long k = 0;  // input bits, floor(log2 multinomial(N; counts))
};

CcdmCode make_ccdm_code(const Composition& comp);

// Fixed-to-fixed matcher: exact integer interval subdivision proportional to
// the remaining counts (lexicographic enumerative indexing), so every output
// has exactly the code composition and decode inverts encode.
std::vector<int> ccdm_encode(std::span<const std::uint8_t> bits, const CcdmCode& code);
std::vector<std::uint8_t> ccdm_decode(std::span<const int> symbols, const CcdmCode& code);

// Delta_R = H(type as a pmf) - k/N
double ccdm_rate_loss(std::span<const double> pmf, long block_length);

}  // namespace mlhy
