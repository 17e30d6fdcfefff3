#include "mlhy/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "mlhy/ccdm.hpp"
#include "mlhy/parallel.hpp"

namespace mlhy {

const char* kToolVersion = "mlhy-sim 0.1.0";

namespace {

constexpr std::uint64_t kPayloadSalt = 1;
constexpr std::uint64_t kNoiseSalt = 2;
constexpr std::uint64_t kRealizedPmfSalt = 0x7265616c697a6564ULL;

InputDistribution target_for(const ExperimentConfig& cfg, const Constellation& c) {
  if (cfg.mode == SchemeMode::uniform_mlpc) return maxent_pmf(c, 0.0);
  if (cfg.mode == SchemeMode::dm_only) {
    // maximum entropy distribution matching the data rate
    return optimize_nu_entropy(c, cfg.rate_bpcu);
  }
  return design_distribution(c, cfg.dsnr_db - cfg.snr_offset_db, cfg.kappa_db);
}

}  // namespace

CodeConstruction build_construction(const ExperimentConfig& cfg, int workers) {
  const Constellation c = constellation_from_name(cfg.constellation);
  const InputDistribution target = target_for(cfg, c);
  const bool with_channel = cfg.mode != SchemeMode::dm_only;
  const double sigma =
      with_channel ? sigma_for_snr_db(c, target.pmf, cfg.dsnr_db - cfg.snr_offset_db) : 1.0;

  ExperimentConfig effective = cfg;
  if (cfg.mode == SchemeMode::dm_only) {
    // shaping-only code: no frozen set, everything that is not data is DM
    const long data = std::lround(cfg.rate_bpcu * cfg.block_length);
    effective.n_dm = static_cast<int>(c.m * static_cast<long>(cfg.block_length) - data);
    effective.crc.reset();
  }

  const BitchannelStats stats = estimate_bitchannels(
      c, target, sigma, cfg.block_length, cfg.construction_trials, cfg.seed, workers,
      with_channel);
  CodeConstruction cc = select_sets(stats, effective, target);
  cc.config_hash = construction_config_hash(cfg);  // as given, not the dm-only rewrite
  return cc;
}

FerRecord run_fer_point(const ExperimentConfig& cfg, const CodeConstruction& cc, int snr_index,
                        double snr_db, int workers) {
  const Constellation c = constellation_from_name(cfg.constellation);
  const double sigma = sigma_for_snr_db(c, cc.target.pmf, snr_db - cfg.snr_offset_db);
  const int payload_len = cc.payload_bits();
  const DmMode mode = cfg.l_enc > 1 ? DmMode::scl : DmMode::deterministic;

  const auto t0 = std::chrono::steady_clock::now();
  FerRecord rec;
  rec.snr_db = snr_db;

  const long batch = 4096;
  const long chunk = 128;
  long frames_done = 0;
  while (true) {
    const long todo = std::min(batch, cfg.max_frames - frames_done);
    if (todo <= 0) break;
    const long num_chunks = (todo + chunk - 1) / chunk;
    std::vector<long> fe(num_chunks, 0), be(num_chunks, 0);
    parallel_chunks(todo, chunk, workers, [&](long ci, long begin, long end) {
      long frame_errors = 0, bit_errors = 0;
      std::vector<std::uint8_t> payload(payload_len);
      std::vector<double> x(cc.block_length);
      for (long f = begin; f < end; ++f) {
        const std::uint64_t frame = frames_done + f;
        Rng payload_rng(stream_key(cfg.seed, kPayloadSalt, snr_index, frame));
        Rng noise_rng(stream_key(cfg.seed, kNoiseSalt, snr_index, frame));
        for (auto& b : payload) b = static_cast<std::uint8_t>(payload_rng.bits() & 1);

        const Codeword cw = mlhy_encode(payload, cc, c, mode, cfg.l_enc);
        for (int i = 0; i < cc.block_length; ++i) x[i] = c.points[cw.symbols[i]];
        const std::vector<double> y = awgn_transmit(x, sigma, noise_rng);
        const DecodeResult dec = mlhy_decode(y, cc, c, sigma, cfg.l_dec, cc.crc);

        long diff = 0;
        for (int k = 0; k < payload_len; ++k) diff += dec.payload[k] != payload[k];
        if (diff > 0) ++frame_errors;
        bit_errors += diff;
      }
      fe[ci] = frame_errors;
      be[ci] = bit_errors;
    });
    for (long ci = 0; ci < num_chunks; ++ci) {
      rec.frame_errors += fe[ci];
      rec.bit_errors += be[ci];
    }
    frames_done += todo;
    if (frames_done >= cfg.min_frames && rec.frame_errors >= cfg.min_errors) break;
  }
  rec.frames = frames_done;
  rec.hit_max_frames = frames_done >= cfg.max_frames && rec.frame_errors < cfg.min_errors;
  rec.fer = static_cast<double>(rec.frame_errors) / rec.frames;
  rec.ber = static_cast<double>(rec.bit_errors) / (static_cast<double>(rec.frames) * payload_len);
  const double half = 1.96 * std::sqrt(std::max(0.0, rec.fer * (1.0 - rec.fer) / rec.frames));
  rec.ci95_lo = std::max(0.0, rec.fer - half);
  rec.ci95_hi = std::min(1.0, rec.fer + half);
  rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<FerRecord> run_fer_sweep(const ExperimentConfig& cfg, const CodeConstruction& cc,
                                     int workers, std::ostream* progress) {
  if (construction_config_hash(cfg) != cc.config_hash)
    throw std::invalid_argument("run_fer_sweep: construction does not match the config");
  std::vector<FerRecord> out;
  for (std::size_t s = 0; s < cfg.snr_sweep_db.size(); ++s) {
    out.push_back(run_fer_point(cfg, cc, static_cast<int>(s), cfg.snr_sweep_db[s], workers));
    if (progress) {
      const FerRecord& r = out.back();
      (*progress) << "snr " << r.snr_db << " dB: " << r.frame_errors << "/" << r.frames
                  << " frames, fer " << r.fer << " (" << r.wall_s << " s)\n";
    }
  }
  return out;
}

std::vector<RateLossRecord> run_rate_loss(const ExperimentConfig& cfg, int workers,
                                          std::ostream* progress) {
  if (cfg.mode != SchemeMode::dm_only)
    throw std::invalid_argument("run_rate_loss: requires dm-only mode");
  const Constellation c = constellation_from_name(cfg.constellation);
  const InputDistribution target = optimize_nu_entropy(c, cfg.rate_bpcu);

  std::vector<int> lengths = cfg.rate_loss_block_lengths;
  if (lengths.empty())
    for (int n = 64; n <= 8192; n *= 2) lengths.push_back(n);

  std::vector<RateLossRecord> out;
  for (int block : lengths) {
    ExperimentConfig sub = cfg;
    sub.block_length = block;
    // trials scaled down with N to keep construction time flat
    sub.construction_trials =
        std::max<long>(1000, std::min<long>(cfg.construction_trials, 6400000L / block));
    const CodeConstruction cc = build_construction(sub, workers);

    const long frames = std::max<long>(1, cfg.rate_loss_frames);
    std::vector<Codeword> words(frames);
    const long chunk = std::max<long>(1, frames / (4 * std::max(workers, 1)));
    parallel_chunks(frames, chunk, workers, [&](long, long begin, long end) {
      for (long f = begin; f < end; ++f) {
        Rng rng(stream_key(cfg.seed, kPayloadSalt, 0, static_cast<std::uint64_t>(f)));
        std::vector<std::uint8_t> payload(cc.payload_bits());
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng.bits() & 1);
        words[f] = mlhy_encode(payload, cc, c, cfg.l_enc > 1 ? DmMode::scl : DmMode::deterministic,
                               cfg.l_enc);
      }
    });

    RateLossRecord rec;
    rec.block_length = block;
    rec.frames = frames;
    rec.mlhy_rate = static_cast<double>(cc.payload_bits()) / block;
    rec.mlhy_rate_loss = rate_loss(words, cc);
    const CcdmCode code = make_ccdm_code(quantize_distribution(target.pmf, block));
    rec.ccdm_rate = static_cast<double>(code.k) / block;
    rec.ccdm_rate_loss = ccdm_rate_loss(target.pmf, block);
    out.push_back(rec);
    if (progress)
      (*progress) << "N " << block << ": mlhy dR " << rec.mlhy_rate_loss << ", ccdm dR "
                  << rec.ccdm_rate_loss << "\n";
  }
  return out;
}

CapacityReport run_capacity(const ExperimentConfig& cfg) {
  const Constellation c = constellation_from_name(cfg.constellation);
  CapacityReport rep;
  rep.target_bpcu = cfg.capacity_target_bpcu;
  const std::vector<double> uniform = maxent_pmf(c, 0.0).pmf;
  for (double snr : cfg.snr_sweep_db) {
    CapacityRecord rec;
    rec.snr_db = snr;
    rec.mi_uniform = constellation_capacity(c, uniform, snr);
    rec.mi_shaped = shaped_capacity(c, snr);
    rep.sweep.push_back(rec);
  }
  if (cfg.capacity_target_bpcu > 0.0) {
    rep.threshold_shaped_db = capacity_threshold_db(
        [&](double snr) { return shaped_capacity(c, snr); }, cfg.capacity_target_bpcu,
        cfg.capacity_lo_db, cfg.capacity_hi_db);
    rep.threshold_uniform_db = capacity_threshold_db(
        [&](double snr) { return constellation_capacity(c, uniform, snr); },
        cfg.capacity_target_bpcu, cfg.capacity_lo_db, cfg.capacity_hi_db);
  }
  return rep;
}

std::vector<std::vector<int>> draw_encoder_words(const ExperimentConfig& cfg,
                                                 const CodeConstruction& cc, long frames) {
  const Constellation c = constellation_from_name(cfg.constellation);
  std::vector<std::vector<int>> words(frames);
  for (long f = 0; f < frames; ++f) {
    Rng rng(stream_key(cfg.seed, kRealizedPmfSalt, static_cast<std::uint64_t>(f)));
    std::vector<std::uint8_t> payload(cc.payload_bits());
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng.bits() & 1);
    words[f] = mlhy_encode(payload, cc, c,
                           cfg.l_enc > 1 ? DmMode::scl : DmMode::deterministic, cfg.l_enc)
                   .symbols;
  }
  return words;
}

std::vector<double> measure_realized_pmf(const ExperimentConfig& cfg,
                                         const CodeConstruction& cc, long frames) {
  const Constellation c = constellation_from_name(cfg.constellation);
  const auto words = draw_encoder_words(cfg, cc, frames);
  std::vector<double> pmf(c.size(), 0.0);
  long total = 0;
  for (const auto& w : words)
    for (int s : w) {
      pmf[s] += 1.0;
      ++total;
    }
  for (double& p : pmf) p /= total;
  return pmf;
}

std::vector<RcuRecord> run_rcu_sweep(const ExperimentConfig& cfg, const std::vector<double>& pmf,
                                     double rate_bpcu, int workers, std::ostream* progress,
                                     std::span<const std::vector<int>> sent_words) {
  const Constellation c = constellation_from_name(cfg.constellation);
  std::vector<RcuRecord> out;
  for (double snr : cfg.snr_sweep_db) {
    const double sigma = sigma_for_snr_db(c, pmf, snr - cfg.snr_offset_db);
    const RcuResult r = rcu_bound(c, pmf, sigma, cfg.block_length, rate_bpcu,
                                  cfg.rcu_trials, cfg.rcu_grid_step, cfg.seed, workers,
                                  sent_words);
    out.push_back({snr, r.bound, r.std_err});
    if (progress)
      (*progress) << "snr " << snr << " dB: rcu " << r.bound << " +- " << r.std_err << "\n";
  }
  return out;
}

namespace {

void write_metadata(std::ostream& out, const ExperimentConfig& cfg) {
  out << "# tool: " << kToolVersion << "\n";
  out << "# config: " << canonical_json(config_to_json(cfg)) << "\n";
  out << "# config_hash: " << config_hash(cfg) << "\n";
  out << "# snr_convention: snr_db = 10*log10(E[X^2]/sigma^2) + snr_offset_db, E[X^2] under "
         "the transmitted pmf\n";
  out << "# snr_offset_db: " << cfg.snr_offset_db << "\n";
}

}  // namespace

void write_fer_csv(std::ostream& out, const ExperimentConfig& cfg, const CodeConstruction& cc,
                   const std::vector<FerRecord>& records) {
  write_metadata(out, cfg);
  out << "# construction_hash: "
      << content_hash_hex(canonical_json(construction_to_json(cc))) << "\n";
  out << "# payload_bits: " << cc.payload_bits() << "\n";
  out << "# data_bits_incl_crc: " << cc.data_bits() << "\n";
  out << "snr_db,frames,frame_errors,bit_errors,fer,ber,ci95_lo,ci95_hi,hit_max_frames,wall_s\n";
  for (const FerRecord& r : records) {
    out << r.snr_db << ',' << r.frames << ',' << r.frame_errors << ',' << r.bit_errors << ','
        << r.fer << ',' << r.ber << ',' << r.ci95_lo << ',' << r.ci95_hi << ','
        << (r.hit_max_frames ? 1 : 0) << ',' << r.wall_s << "\n";
  }
}

void write_rate_loss_csv(std::ostream& out, const ExperimentConfig& cfg,
                         const std::vector<RateLossRecord>& records) {
  write_metadata(out, cfg);
  out << "N,mlhy_rate,mlhy_rate_loss,ccdm_rate,ccdm_rate_loss,frames\n";
  for (const RateLossRecord& r : records)
    out << r.block_length << ',' << r.mlhy_rate << ',' << r.mlhy_rate_loss << ',' << r.ccdm_rate
        << ',' << r.ccdm_rate_loss << ',' << r.frames << "\n";
}

void write_capacity_csv(std::ostream& out, const ExperimentConfig& cfg,
                        const CapacityReport& report) {
  write_metadata(out, cfg);
  out << "# quadrature: gauss-hermite, 128 nodes\n";
  if (report.target_bpcu > 0.0) {
    out << "# threshold_shaped_db: " << report.threshold_shaped_db << "\n";
    out << "# threshold_uniform_db: " << report.threshold_uniform_db << "\n";
  }
  out << "snr_db,mi_uniform,mi_shaped\n";
  for (const CapacityRecord& r : report.sweep)
    out << r.snr_db << ',' << r.mi_uniform << ',' << r.mi_shaped << "\n";
}

void write_rcu_csv(std::ostream& out, const ExperimentConfig& cfg,
                   const std::vector<double>& pmf, double rate_bpcu,
                   const std::vector<RcuRecord>& records) {
  write_metadata(out, cfg);
  out << "# rcu_rate_bpcu: " << rate_bpcu << " (payload rate, CRC overhead excluded)\n";
  out << "# pmf:";
  for (double p : pmf) out << ' ' << p;
  out << "\n";
  out << "snr_db,rcu_bound,std_err\n";
  for (const RcuRecord& r : records)
    out << r.snr_db << ',' << r.bound << ',' << r.std_err << "\n";
}

}  // namespace mlhy
