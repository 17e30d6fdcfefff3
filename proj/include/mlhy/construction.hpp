#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlhy/config.hpp"
#include "mlhy/modem.hpp"
#include "mlhy/polar.hpp"

namespace mlhy {

// Monte-Carlo estimates of the per-bitchannel conditional entropies, jointly
// over all bitlevels: h_source ~ H(U^l_i | V^l_i), h_channel ~ H(U^l_i | V^l_i, Y).
struct BitchannelStats {
  int m = 0;
  int block_length = 0;
  long trials = 0;
  bool with_channel = true;
  bool low_trials = false;
  std::vector<double> h_source;   // index (l-1)*N + i
  std::vector<double> h_channel;  // same layout; zeros when !with_channel

  std::size_t index(int level, int i) const {
    return static_cast<std::size_t>(level - 1) * block_length + i;
  }
};

// Genie-aided estimation: every trial draws a fresh symbol word from pmf,
// transmits it, and runs multistage SC with all decisions pinned to the true
// bits; the binary entropy of the per-bit posteriors is averaged.
BitchannelStats estimate_bitchannels(const Constellation& c, const InputDistribution& pmf,
                                     double sigma, int block_length, long trials,
                                     std::uint64_t seed, int workers = 1,
                                     bool with_channel = true);

enum class BitClass : std::uint8_t { data, frozen, dm };

struct CodeConstruction {
  std::string constellation;
  int m = 0;
  int block_length = 0;
  double rate_bpcu = 0.0;
  double dsnr_db = 0.0;
  double kappa_db = 0.0;
  int n_dm = 0;
  std::optional<CrcSpec> crc;
  InputDistribution target;            // shaping target distribution
  std::vector<BitClass> classes;       // (l-1)*N + i over all m*N positions
  std::vector<std::uint32_t> data_order;  // data positions in (l,i) visiting order
  BitchannelStats stats;               // provenance
  std::string config_hash;

  int crc_len() const { return crc ? crc->width : 0; }
  int data_bits() const { return static_cast<int>(data_order.size()); }
  int payload_bits() const { return data_bits() - crc_len(); }
  std::size_t index(int level, int i) const {
    return static_cast<std::size_t>(level - 1) * block_length + i;
  }
};

// Rate-optimal target distribution at dsnr + kappa (both in dB).
InputDistribution design_distribution(const Constellation& c, double dsnr_db, double kappa_db);

// DM positions take the lowest h_source, frozen the highest h_channel among
// the rest, everything else carries data. Ties break toward lower (level, i).
CodeConstruction select_sets(const BitchannelStats& stats, const ExperimentConfig& cfg,
                             const InputDistribution& target);

struct Fractions {
  double low = 0.0;
  double high = 0.0;
  double mid = 0.0;
};
struct PolarizationSummary {
  Fractions source;
  Fractions channel;
  // |{(l,i): h_source > 1-delta and h_channel < delta}| / N, in bits/symbol
  double info_per_symbol = 0.0;
};
PolarizationSummary polarization_fractions(const BitchannelStats& stats, double delta);

nlohmann::json construction_to_json(const CodeConstruction& cc);
CodeConstruction construction_from_json(const nlohmann::json& j);
void save_construction(const CodeConstruction& cc, const std::string& path);
CodeConstruction load_construction(const std::string& path);

}  // namespace mlhy
