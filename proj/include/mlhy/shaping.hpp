#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mlhy/construction.hpp"
#include "mlhy/modem.hpp"
#include "mlhy/polar.hpp"
#include "mlhy/rng.hpp"

namespace mlhy {

enum class DmMode { deterministic, scl, randomized };

struct Codeword {
  std::vector<int> symbols;             // N constellation indices
  std::vector<BitVector> bit_planes;    // [m][N], x^{B,l}
  std::vector<BitVector> u_planes;      // [m][N], u^l = x^{B,l} G_N
  double shaping_log_prob = 0.0;        // sum over DM positions of ln P(u | v)
};

// Joint DM + FEC encoding: levels are processed in order, data positions take
// message bits, frozen positions are zero, DM positions are decided from the
// channel-free shaping posterior (argmax, list search over forks, or sampled).
Codeword mlhy_encode(std::span<const std::uint8_t> payload, const CodeConstruction& cc,
                     const Constellation& c, DmMode mode = DmMode::deterministic, int l_enc = 1,
                     Rng* rng = nullptr);

struct DecodeResult {
  std::vector<std::uint8_t> payload;
  bool crc_pass = false;
  std::vector<BitVector> bit_planes;
  std::vector<BitVector> u_planes;
  double metric = 0.0;
};

// Multistage SCL: one list persists across the bitlevels, each path feeding
// its own hard lower-level decisions forward. Data bits fork, frozen bits are
// zero, DM bits are re-derived per path from the channel-free argmax rule.
// The CRC (when present) selects among the final paths over all data bits.
DecodeResult mlhy_decode(std::span<const double> y, const CodeConstruction& cc,
                         const Constellation& c, double sigma, int l_dec,
                         const std::optional<CrcSpec>& crc);

// Delta_R = H(pooled empirical symbol distribution) - payload_bits / N.
double rate_loss(std::span<const Codeword> codewords, const CodeConstruction& cc);

std::vector<double> empirical_symbol_pmf(std::span<const Codeword> codewords, int alphabet);

}  // namespace mlhy
