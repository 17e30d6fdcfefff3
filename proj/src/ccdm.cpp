#include "mlhy/ccdm.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlhy {

namespace {

mpz_class multinomial(long total, std::span<const long> counts) {
  mpz_class num;
  mpz_fac_ui(num.get_mpz_t(), static_cast<unsigned long>(total));
  for (long c : counts) {
    if (c < 0) throw std::invalid_argument("multinomial: negative count");
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(c));
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), f.get_mpz_t());
  }
  return num;
}

double entropy_of_counts(std::span<const long> counts, long total) {
  double h = 0.0;
  for (long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

Composition quantize_distribution(std::span<const double> pmf, long block_length) {
  if (block_length < 1) throw std::invalid_argument("quantize_distribution: block length");
  const std::size_t size = pmf.size();
  Composition comp;
  comp.counts.resize(size);
  long assigned = 0;
  for (std::size_t j = 0; j < size; ++j) {
    comp.counts[j] = static_cast<long>(std::floor(pmf[j] * block_length));
    assigned += comp.counts[j];
  }
  // marginal cost of one more slot at symbol j: (c+1)ln(c+1) - c ln c - ln(N p_j)
  auto marginal = [&](std::size_t j) {
    if (pmf[j] <= 0.0) return std::numeric_limits<double>::infinity();
    const double c = static_cast<double>(comp.counts[j]);
    const double grown = (c + 1.0) * std::log(c + 1.0) - (c > 0.0 ? c * std::log(c) : 0.0);
    return grown - std::log(block_length * pmf[j]);
  };
  for (; assigned < block_length; ++assigned) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < size; ++j) {
      const double cost = marginal(j);
      if (cost < best_cost) {
        best_cost = cost;
        best = j;
      }
    }
    ++comp.counts[best];
  }
  return comp;
}

CcdmCode make_ccdm_code(const Composition& comp) {
  CcdmCode code;
  code.composition = comp;
  const mpz_class total = multinomial(comp.block_length(), comp.counts);
  // sizeinbase(t, 2) is floor(log2 t) + 1 for t > 0
  code.k = total == 1 ? 0 : static_cast<long>(mpz_sizeinbase(total.get_mpz_t(), 2)) - 1;
  return code;
}

std::vector<int> ccdm_encode(std::span<const std::uint8_t> bits, const CcdmCode& code) {
  if (static_cast<long>(bits.size()) != code.k)
    throw std::invalid_argument("ccdm_encode: input must have exactly k bits");
  const long block_length = code.composition.block_length();
  std::vector<long> remaining = code.composition.counts;

  mpz_class v = 0;
  for (std::uint8_t b : bits) {
    v <<= 1;
    if (b) v |= 1;
  }
  mpz_class span = multinomial(block_length, remaining);

  std::vector<int> out(block_length);
  for (long t = 0; t < block_length; ++t) {
    const long n_rem = block_length - t;
    mpz_class base = 0;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      if (remaining[j] == 0) continue;
      mpz_class cnt = span * remaining[j];
      mpz_divexact_ui(cnt.get_mpz_t(), cnt.get_mpz_t(), static_cast<unsigned long>(n_rem));
      if (v < base + cnt) {
        out[t] = static_cast<int>(j);
        v -= base;
        span = cnt;
        --remaining[j];
        break;
      }
      base += cnt;
    }
  }
  return out;
}

std::vector<std::uint8_t> ccdm_decode(std::span<const int> symbols, const CcdmCode& code) {
  const long block_length = code.composition.block_length();
  if (static_cast<long>(symbols.size()) != block_length)
    throw std::invalid_argument("ccdm_decode: length mismatch");
  std::vector<long> remaining = code.composition.counts;
  mpz_class span = multinomial(block_length, remaining);

  mpz_class v = 0;
  for (long t = 0; t < block_length; ++t) {
    const long n_rem = block_length - t;
    const int sym = symbols[t];
    if (sym < 0 || sym >= static_cast<int>(remaining.size()) || remaining[sym] == 0)
      throw std::invalid_argument("ccdm_decode: symbol outside the composition");
    mpz_class base = 0;
    for (int j = 0; j < sym; ++j) {
      if (remaining[j] == 0) continue;
      mpz_class cnt = span * remaining[j];
      mpz_divexact_ui(cnt.get_mpz_t(), cnt.get_mpz_t(), static_cast<unsigned long>(n_rem));
      base += cnt;
    }
    v += base;
    mpz_class cnt = span * remaining[sym];
    mpz_divexact_ui(cnt.get_mpz_t(), cnt.get_mpz_t(), static_cast<unsigned long>(n_rem));
    span = cnt;
    --remaining[sym];
  }

  std::vector<std::uint8_t> bits(code.k);
  for (long i = code.k - 1; i >= 0; --i) {
    bits[i] = static_cast<std::uint8_t>(mpz_tstbit(v.get_mpz_t(), 0));
    v >>= 1;
  }
  return bits;
}

double ccdm_rate_loss(std::span<const double> pmf, long block_length) {
  const Composition comp = quantize_distribution(pmf, block_length);
  const CcdmCode code = make_ccdm_code(comp);
  return entropy_of_counts(comp.counts, block_length) -
         static_cast<double>(code.k) / block_length;
}

}  // namespace mlhy
