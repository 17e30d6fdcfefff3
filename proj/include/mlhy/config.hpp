#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlhy/polar.hpp"

namespace mlhy {

enum class SchemeMode { mlhy, uniform_mlpc, dm_only };

std::string to_string(SchemeMode mode);
SchemeMode scheme_mode_from_string(const std::string& s);

// Full reproducibility record for one experiment.
struct ExperimentConfig {
  SchemeMode mode = SchemeMode::mlhy;
  std::string constellation = "8-ASK";
  int block_length = 64;        // N, symbols per codeword
  double rate_bpcu = 1.75;      // data bits per channel use (CRC included in the budget)
  double dsnr_db = 13.0;        // design SNR for the channel-entropy estimates
  double kappa_db = 0.0;        // dB offset selecting the target distribution
  int n_dm = 0;                 // shaping positions
  int l_enc = 1;
  int l_dec = 32;
  std::optional<CrcSpec> crc;
  // dB values in this config sit on an axis offset from the actual-energy
  // convention 10*log10(E[X^2]/sigma^2); unipolar PAM figures are referenced
  // to the uniform-input energy, i.e. offset 10*log10(E_uniform[X^2]).
  double snr_offset_db = 0.0;
  std::vector<double> snr_sweep_db;
  std::uint64_t seed = 1;
  long min_frames = 1000;
  long min_errors = 100;
  long max_frames = 1000000;
  long construction_trials = 100000;

  // rate-loss sweeps (dm-only mode)
  std::vector<int> rate_loss_block_lengths;
  long rate_loss_frames = 100;

  // RCU bound
  long rcu_trials = 2000;
  double rcu_grid_step = 0.01;
  long rcu_pmf_frames = 200;  // encoder frames used to measure the realized pmf

  // capacity sweeps
  double capacity_target_bpcu = 0.0;  // 0 = skip threshold search
  double capacity_lo_db = 0.0;
  double capacity_hi_db = 25.0;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

// canonical form: compact dump with sorted keys; the hash keys every artifact
std::string canonical_json(const nlohmann::json& j);
std::string content_hash_hex(const std::string& data);
std::string config_hash(const ExperimentConfig& cfg);
// hash over the fields that determine a code construction (mode, alphabet,
// geometry, design knobs, seed, trials); sweep and stopping fields excluded
// so one construction serves many sweeps
std::string construction_config_hash(const ExperimentConfig& cfg);

}  // namespace mlhy
