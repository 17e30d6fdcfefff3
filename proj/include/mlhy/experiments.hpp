#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlhy/config.hpp"
#include "mlhy/construction.hpp"
#include "mlhy/rcu.hpp"
#include "mlhy/shaping.hpp"

namespace mlhy {

// design_distribution + estimate_bitchannels at dSNR + select_sets
CodeConstruction build_construction(const ExperimentConfig& cfg, int workers = 1);

struct FerRecord {
  double snr_db = 0.0;
  long frames = 0;
  long frame_errors = 0;
  long bit_errors = 0;
  double fer = 0.0;
  double ber = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  bool hit_max_frames = false;
  double wall_s = 0.0;
};

// Frame f of sweep point s draws its randomness from stream (seed, s, f), so
// error counts are identical at any worker count.
FerRecord run_fer_point(const ExperimentConfig& cfg, const CodeConstruction& cc, int snr_index,
                        double snr_db, int workers);
std::vector<FerRecord> run_fer_sweep(const ExperimentConfig& cfg, const CodeConstruction& cc,
                                     int workers, std::ostream* progress = nullptr);

struct RateLossRecord {
  int block_length = 0;
  double mlhy_rate_loss = 0.0;
  double ccdm_rate_loss = 0.0;
  double mlhy_rate = 0.0;  // data bits per symbol actually carried
  double ccdm_rate = 0.0;  // k / N
  long frames = 0;
};
std::vector<RateLossRecord> run_rate_loss(const ExperimentConfig& cfg, int workers,
                                          std::ostream* progress = nullptr);

struct CapacityRecord {
  double snr_db = 0.0;
  double mi_uniform = 0.0;
  double mi_shaped = 0.0;
};
struct CapacityReport {
  std::vector<CapacityRecord> sweep;
  double threshold_shaped_db = 0.0;
  double threshold_uniform_db = 0.0;
  double target_bpcu = 0.0;
};
CapacityReport run_capacity(const ExperimentConfig& cfg);

struct RcuRecord {
  double snr_db = 0.0;
  double bound = 0.0;
  double std_err = 0.0;
};
// pmf: the distribution realized by the MLHY encoder when available,
// otherwise the construction target (uniform for uniform-mlpc). `sent_words`
// (encoder outputs) pin the transmit ensemble of the bound; empty falls back
// to i.i.d. transmission. rate_bpcu is the information rate the bound is
// evaluated at; the rcu command uses the payload rate (CRC overhead taken
// out), which is recorded in the CSV metadata.
std::vector<RcuRecord> run_rcu_sweep(const ExperimentConfig& cfg,
                                     const std::vector<double>& pmf, double rate_bpcu,
                                     int workers, std::ostream* progress = nullptr,
                                     std::span<const std::vector<int>> sent_words = {});

// symbol words emitted by the encoder on random payloads
std::vector<std::vector<int>> draw_encoder_words(const ExperimentConfig& cfg,
                                                 const CodeConstruction& cc, long frames);
// measure the encoder-realized symbol distribution at the design point
std::vector<double> measure_realized_pmf(const ExperimentConfig& cfg,
                                         const CodeConstruction& cc, long frames);

// CSV files start with "# key: value" metadata lines
void write_fer_csv(std::ostream& out, const ExperimentConfig& cfg, const CodeConstruction& cc,
                   const std::vector<FerRecord>& records);
void write_rate_loss_csv(std::ostream& out, const ExperimentConfig& cfg,
                         const std::vector<RateLossRecord>& records);
void write_capacity_csv(std::ostream& out, const ExperimentConfig& cfg,
                        const CapacityReport& report);
void write_rcu_csv(std::ostream& out, const ExperimentConfig& cfg,
                   const std::vector<double>& pmf, double rate_bpcu,
                   const std::vector<RcuRecord>& records);

extern const char* kToolVersion;

}  // namespace mlhy
