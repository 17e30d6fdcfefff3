#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mlhy/rng.hpp"

namespace mlhy {

using BitVector = std::vector<std::uint8_t>;

struct PolarParams {
  int n = 0;              // block length exponent
  int block_length = 1;   // N = 2^n

  PolarParams() = default;
  explicit PolarParams(int n_exp);
};

// 0-based self-inverse permutation: image of i is its n-bit reversal.
std::vector<int> bit_reversal_permutation(int n);

// x = u * G_N over GF(2) with G_N = B_N * F^{(x)n}; an involution.
BitVector polar_transform(const BitVector& u);

struct PosteriorPair {
  double p0 = 0.5;
  double p1 = 0.5;
};

// LLRs are log(p0/p1) in nats throughout.
double llr_from_pair(const PosteriorPair& p);
PosteriorPair pair_from_llr(double llr);

// check-node / variable-node combining, exact log-sum-exp form
double polar_f(double a, double b);
inline double polar_g(double a, double b, int u) { return u ? b - a : b + a; }

// log sigma(s) = -log(1 + e^{-s}), overflow-safe
double log_sigmoid(double s);

// ---------------------------------------------------------------------------
// CRC: plain LFSR division, zero initial state, no reflection, no final xor.

struct CrcSpec {
  int width = 0;
  std::uint64_t poly = 0;  // coefficients below x^width, e.g. x^7+x^3+1 -> width 7, poly 0x09
};

BitVector crc_compute(std::span<const std::uint8_t> data, const CrcSpec& spec);
bool crc_check(std::span<const std::uint8_t> data_with_crc, const CrcSpec& spec);

// ---------------------------------------------------------------------------
// Generic SC / SCL engine.
//
// One pass decides the N bits of a single polar transform in natural order.
// At every bit the engine knows two posteriors for each surviving path: the
// one including the channel observation, P(U_i | u_<i, y), and the
// channel-free shaping prior, P(U_i | u_<i). A per-bit plan says how the bit
// is decided and which posterior (if any) feeds the pruning metric. This one
// engine serves decoding (fork on data), shaping (argmax/sample/fork on DM
// bits) and genie-aided construction (all bits fixed, observer records the
// posteriors).

enum class BitRule : std::uint8_t {
  fork,            // duplicate every path with u=0 / u=1
  fixed,           // take BitPlan::value (frozen bits, message bits, genie bits)
  argmax_channel,  // hard decision on P(U_i | u_<i, y)
  argmax_prior,    // hard decision on P(U_i | u_<i)
  sample_prior,    // draw from P(U_i | u_<i); requires an Rng, single path only
};

enum class MetricSource : std::uint8_t { none, channel, prior };

struct BitPlan {
  BitRule rule = BitRule::fixed;
  std::uint8_t value = 0;
  MetricSource metric = MetricSource::none;
};

// Per-input-path leaf LLRs. `channel` may be empty (encode side: there is no
// observation, only the shaping prior). Metrics carried in so that lists can
// persist across the bitlevels of a multilevel code.
struct LeafLlrs {
  std::vector<double> channel;
  std::vector<double> prior;
  double metric = 0.0;
  double log_prob_channel = 0.0;
  double log_prob_prior = 0.0;
  int protect_level = 1;  // carried across multilevel passes
};

struct SclPath {
  BitVector u;
  BitVector x;                   // re-encoded codeword, x = u * G_N
  double metric = 0.0;
  double log_prob_channel = 0.0; // sum_i log P(u_i | u_<i, y)
  double log_prob_prior = 0.0;   // sum_i log P(u_i | u_<i)
  int parent = 0;                // index into the input list this descended from
  int protect_level = 1;         // smallest list size that keeps this path
};

using BitObserver = std::function<void(int path, int bit, const PosteriorPair& with_channel,
                                       const PosteriorPair& prior_only, int decision)>;

// Core pass. Paths are returned ranked by metric (ties: earlier path first).
std::vector<SclPath> scl_run(const PolarParams& params, std::span<const LeafLlrs> inputs,
                             std::span<const BitPlan> plan, int l_max, Rng* rng = nullptr,
                             const BitObserver* observer = nullptr);

// Single-path SC pass.
SclPath sc_pass(const PolarParams& params, const LeafLlrs& input, std::span<const BitPlan> plan,
                Rng* rng = nullptr, const BitObserver* observer = nullptr);

// Classical single-transform SCL with optional CRC over the forked bits.
// Returns the ranked list plus the index of the answer path (best passing the
// CRC, falling back to the best metric).
struct SclDecision {
  std::vector<SclPath> ranked;
  int chosen = 0;
  bool crc_pass = false;
};
SclDecision scl_pass(const PolarParams& params, const LeafLlrs& input,
                     std::span<const BitPlan> plan, int l_max,
                     const std::optional<CrcSpec>& crc = std::nullopt, Rng* rng = nullptr);

}  // namespace mlhy
