// End-to-end acceptance runner: regenerates the headline numbers and prints
// one PASS/FAIL line per criterion. Slow on purpose; see README.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "mlhy/ccdm.hpp"
#include "mlhy/experiments.hpp"

using namespace mlhy;

namespace {

int g_failures = 0;
int g_index = 0;

void report(bool pass, const std::string& name, const std::string& detail, double seconds) {
  ++g_index;
  std::printf("[%d/8] %s %s: %s (%.0f s)\n", g_index, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(const std::string& name, const Fn& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = fn();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(pass, name, detail,
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// log-linear interpolation of the SNR where the curve hits `level`
double crossing_db(const std::vector<std::pair<double, double>>& pts, double level) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i - 1].second >= level && pts[i].second <= level && pts[i].second > 0.0) {
      const double l0 = std::log10(pts[i - 1].second), l1 = std::log10(pts[i].second);
      return pts[i - 1].first +
             (pts[i].first - pts[i - 1].first) * (std::log10(level) - l0) / (l1 - l0);
    }
  }
  return std::nan("");
}

// sweep from a pinned grid, extending the bracket around FER 1e-2 if needed
std::vector<std::pair<double, double>> fer_curve(const ExperimentConfig& cfg,
                                                 const CodeConstruction& cc,
                                                 std::vector<double> grid, int workers) {
  std::vector<std::pair<double, double>> pts;
  auto run_at = [&](double snr, int index) {
    const FerRecord r = run_fer_point(cfg, cc, index, snr, workers);
    std::printf("    fer %-12s snr %6.2f dB: %.4g (%ld/%ld)\n", cfg.constellation.c_str(), snr,
                r.fer, r.frame_errors, r.frames);
    std::fflush(stdout);
    return r.fer;
  };
  int index = 0;
  for (double snr : grid) pts.push_back({snr, run_at(snr, index++)});
  for (int ext = 0; ext < 3 && pts.back().second > 1e-2; ++ext) {
    const double snr = pts.back().first + 0.4;
    pts.push_back({snr, run_at(snr, index++)});
  }
  for (int ext = 0; ext < 3 && pts.front().second < 1e-2; ++ext) {
    const double snr = pts.front().first - 0.4;
    pts.insert(pts.begin(), {snr, run_at(snr, index++)});
  }
  return pts;
}

std::vector<std::pair<double, double>> rcu_curve(ExperimentConfig cfg,
                                                 const CodeConstruction& cc, double rate,
                                                 std::vector<double> grid, int workers) {
  const auto words = draw_encoder_words(cfg, cc, 300);
  const auto pmf = measure_realized_pmf(cfg, cc, 300);
  cfg.snr_sweep_db = std::move(grid);
  cfg.rcu_trials = 1500;
  std::vector<std::pair<double, double>> pts;
  for (const RcuRecord& r : run_rcu_sweep(cfg, pmf, rate, workers, nullptr, words)) {
    pts.push_back({r.snr_db, r.bound});
    std::printf("    rcu %-12s snr %6.2f dB: %.4g +- %.2g\n", cfg.constellation.c_str(),
                r.snr_db, r.bound, r.std_err);
    std::fflush(stdout);
  }
  return pts;
}

ExperimentConfig fig3_config(bool uniform) {
  ExperimentConfig cfg;
  cfg.mode = uniform ? SchemeMode::uniform_mlpc : SchemeMode::mlhy;
  cfg.constellation = "8-ASK";
  cfg.block_length = 64;
  cfg.rate_bpcu = 1.75;
  cfg.dsnr_db = 13.0;
  cfg.kappa_db = uniform ? 0.0 : -1.0;
  cfg.n_dm = uniform ? 0 : 23;
  cfg.crc = CrcSpec{7, 0x09};
  cfg.l_enc = 1;
  cfg.l_dec = 32;
  cfg.seed = 20260810;
  cfg.min_frames = 2000;
  cfg.min_errors = 100;
  cfg.max_frames = 60000;
  cfg.construction_trials = 100000;
  return cfg;
}

ExperimentConfig fig4_config() {
  ExperimentConfig cfg;
  cfg.mode = SchemeMode::mlhy;
  cfg.constellation = "4-PAM";
  cfg.block_length = 64;
  cfg.rate_bpcu = 1.25;
  cfg.dsnr_db = 18.1;
  cfg.kappa_db = -0.9;
  cfg.snr_offset_db = 6.8;
  cfg.n_dm = 24;
  cfg.crc.reset();
  cfg.l_enc = 1;
  cfg.l_dec = 32;
  cfg.seed = 20260810;
  cfg.min_frames = 2000;
  cfg.min_errors = 100;
  cfg.max_frames = 60000;
  cfg.construction_trials = 100000;
  return cfg;
}

// --- criterion 7 helpers -------------------------------------------------

bool check_involution() {
  Rng rng(7);
  for (int n = 0; n <= 10; ++n) {
    BitVector u(1 << n);
    for (auto& b : u) b = rng.bits() & 1;
    if (polar_transform(polar_transform(u)) != u) return false;
  }
  return true;
}

double max_sc_posterior_error() {
  Rng rng(29);
  const int size = 16;
  const PolarParams params(4);
  std::vector<PosteriorPair> pairs(size);
  LeafLlrs leaf;
  for (int i = 0; i < size; ++i) {
    const double p0 = 0.05 + 0.9 * rng.uniform01();
    pairs[i] = {p0, 1.0 - p0};
    leaf.channel.push_back(std::log(p0) - std::log(1.0 - p0));
    leaf.prior.push_back(0.0);
  }
  std::vector<PosteriorPair> seen(size);
  BitObserver obs = [&](int, int bit, const PosteriorPair& wc, const PosteriorPair&, int) {
    seen[bit] = wc;
  };
  const std::vector<BitPlan> plan(size,
                                  BitPlan{BitRule::argmax_channel, 0, MetricSource::channel});
  const SclPath path = sc_pass(params, leaf, plan, nullptr, &obs);

  double worst = 0.0;
  for (int k = 0; k < size; ++k) {
    double mass[2] = {0.0, 0.0};
    for (long word = 0; word < (1L << size); ++word) {
      BitVector u(size);
      for (int i = 0; i < size; ++i) u[i] = (word >> i) & 1;
      bool match = true;
      for (int i = 0; i < k && match; ++i) match = u[i] == path.u[i];
      if (!match) continue;
      const BitVector x = polar_transform(u);
      double w = 1.0;
      for (int i = 0; i < size; ++i) w *= x[i] ? pairs[i].p1 : pairs[i].p0;
      mass[u[k]] += w;
    }
    worst = std::max(worst, std::fabs(seen[k].p1 - mass[1] / (mass[0] + mass[1])));
  }
  return worst;
}

long roundtrip_failures(const ExperimentConfig& cfg, const CodeConstruction& cc, int count) {
  const Constellation c = constellation_from_name(cfg.constellation);
  long failures = 0;
  Rng rng(4242);
  for (int t = 0; t < count; ++t) {
    std::vector<std::uint8_t> payload(cc.payload_bits());
    for (auto& b : payload) b = rng.bits() & 1;
    const Codeword cw = mlhy_encode(payload, cc, c);
    std::vector<double> y(cc.block_length);
    for (int i = 0; i < cc.block_length; ++i) y[i] = c.points[cw.symbols[i]];
    const DecodeResult dec = mlhy_decode(y, cc, c, 1e-6, cfg.l_dec, cc.crc);
    failures += dec.payload != payload;
  }
  return failures;
}

bool ccdm_exhaustive_ok() {
  for (const std::vector<long>& counts :
       {std::vector<long>{5, 4, 3}, std::vector<long>{8, 3, 1}, std::vector<long>{6, 6}}) {
    const CcdmCode code = make_ccdm_code(Composition{counts});
    for (long v = 0; v < (1L << code.k); ++v) {
      std::vector<std::uint8_t> bits(code.k);
      for (long i = 0; i < code.k; ++i) bits[i] = (v >> (code.k - 1 - i)) & 1;
      const auto word = ccdm_encode(bits, code);
      for (std::size_t j = 0; j < counts.size(); ++j)
        if (std::count(word.begin(), word.end(), static_cast<int>(j)) != counts[j])
          return false;
      if (ccdm_decode(word, code) != bits) return false;
    }
  }
  return true;
}

double max_chain_error() {
  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  const InputDistribution shaped = maxent_pmf(ask8, 0.06);
  const double sigma = 0.9;
  double worst = 0.0;
  for (double y : {-6.3, -0.4, 0.9, 4.2}) {
    std::vector<double> post(8);
    double norm = 0.0;
    for (int i = 0; i < 8; ++i) {
      post[i] = shaped.pmf[i] *
                std::exp(-(y - ask8.points[i]) * (y - ask8.points[i]) / (2 * sigma * sigma));
      norm += post[i];
    }
    for (int i = 0; i < 8; ++i) {
      double chain = 1.0;
      for (int l = 1; l <= 3; ++l) {
        const BitlevelPosterior p =
            bitlevel_posteriors(y, ask8, shaped.pmf, i & ((1u << (l - 1)) - 1), l, sigma);
        chain *= ask8.label_bit(i, l) ? p.with_channel.p1 : p.with_channel.p0;
      }
      worst = std::max(worst, std::fabs(chain - post[i] / norm));
    }
  }
  return worst;
}

}  // namespace

int main() {
  const int workers = 4;
  std::printf("acceptance: multilevel shaped polar coding over AWGN\n");

  double th_shaped = 0.0, th_uniform = 0.0;

  criterion("capacity anchors", [&] {
    const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
    const std::vector<double> uniform = maxent_pmf(ask8, 0.0).pmf;
    th_shaped = capacity_threshold_db([&](double s) { return shaped_capacity(ask8, s); }, 1.75,
                                      5.0, 18.0);
    th_uniform = capacity_threshold_db(
        [&](double s) { return constellation_capacity(ask8, uniform, s); }, 1.75, 5.0, 18.0);
    const bool pass =
        std::fabs(th_shaped - 10.16) <= 0.05 && std::fabs(th_uniform - 10.84) <= 0.05;
    return std::make_pair(pass, fmt("shaped %.4f dB (want 10.16+-0.05), uniform %.4f dB "
                                    "(want 10.84+-0.05)",
                                    th_shaped, th_uniform));
  });

  criterion("theoretical shaping gain", [&] {
    const double gain = th_uniform - th_shaped;
    return std::make_pair(std::fabs(gain - 0.68) <= 0.05,
                          fmt("%.4f dB (want 0.68+-0.05)", gain));
  });

  criterion("pam asymmetry gain", [&] {
    const Constellation pam4 = make_constellation(ConstellationKind::pam, 2);
    const double th_asym = capacity_threshold_db(
        [&](double s) { return shaped_capacity(pam4, s); }, 1.25, 3.0, 20.0);
    const double th_pair = capacity_threshold_db(
        [&](double s) { return pair_symmetric_capacity(pam4, s); }, 1.25, 3.0, 20.0);
    const double gap = th_pair - th_asym;
    return std::make_pair(std::fabs(gap - 0.34) <= 0.10,
                          fmt("asym %.3f dB, pair-symmetric %.3f dB, gap %.3f dB "
                              "(want 0.34+-0.10)",
                              th_asym, th_pair, gap));
  });

  criterion("rate-loss orderings", [&] {
    ExperimentConfig cfg;
    cfg.mode = SchemeMode::dm_only;
    cfg.constellation = "8-ASK";
    cfg.rate_bpcu = 2.375;
    cfg.l_enc = 32;
    cfg.seed = 20260810;
    cfg.construction_trials = 100000;
    cfg.rate_loss_block_lengths = {64, 128, 256, 512, 1024};
    cfg.rate_loss_frames = 100;
    auto records = run_rate_loss(cfg, workers);
    cfg.rate_loss_block_lengths = {8192};
    cfg.rate_loss_frames = 40;
    const auto big = run_rate_loss(cfg, workers);
    records.insert(records.end(), big.begin(), big.end());

    bool short_ok = true;
    std::string detail;
    for (const auto& r : records) {
      detail += fmt("N=%d %.4f/%.4f; ", r.block_length, r.mlhy_rate_loss, r.ccdm_rate_loss);
      if (r.block_length <= 1024) short_ok = short_ok && r.mlhy_rate_loss < r.ccdm_rate_loss;
    }
    const bool reversed = records.back().ccdm_rate_loss < records.back().mlhy_rate_loss;

    const Constellation ask4 = make_constellation(ConstellationKind::ask, 2);
    const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
    const Constellation ask16 = make_constellation(ConstellationKind::ask, 4);
    const double c4 = ccdm_rate_loss(optimize_nu_entropy(ask4, 1.625).pmf, 64);
    const double c8 = ccdm_rate_loss(optimize_nu_entropy(ask8, 2.375).pmf, 64);
    const double c16 = ccdm_rate_loss(optimize_nu_entropy(ask16, 3.25).pmf, 64);
    const bool m_ordered = c4 < c8 && c8 < c16;
    detail += fmt("ccdm@64 by M: %.4f/%.4f/%.4f", c4, c8, c16);
    return std::make_pair(short_ok && reversed && m_ordered, detail);
  });

  CodeConstruction cc3, cc4;

  criterion("fig. 3 frame error rates", [&] {
    const ExperimentConfig shaped_cfg = fig3_config(false);
    const ExperimentConfig uniform_cfg = fig3_config(true);
    cc3 = build_construction(shaped_cfg, workers);
    const CodeConstruction cc3u = build_construction(uniform_cfg, workers);

    const auto shaped = fer_curve(shaped_cfg, cc3, {10.9, 11.3, 11.7}, workers);
    const auto uniform = fer_curve(uniform_cfg, cc3u, {11.7, 12.1, 12.5}, workers);
    const double cross_s = crossing_db(shaped, 1e-2);
    const double cross_u = crossing_db(uniform, 1e-2);
    const double gain = cross_u - cross_s;

    const double rate = static_cast<double>(cc3.payload_bits()) / cc3.block_length;
    const auto rcu = rcu_curve(shaped_cfg, cc3, rate, {11.0, 11.4, 11.8, 12.2}, workers);
    const double cross_r = crossing_db(rcu, 1e-2);
    const double rcu_gap = cross_s - cross_r;

    const bool pass = gain >= 0.45 && gain <= 0.85 && std::fabs(rcu_gap) <= 0.5;
    return std::make_pair(pass, fmt("mlhy@1e-2 %.3f dB, uniform %.3f dB, gain %.3f "
                                    "(want 0.45..0.85); rcu@1e-2 %.3f dB, gap %.3f "
                                    "(want |gap|<=0.5)",
                                    cross_s, cross_u, gain, cross_r, rcu_gap));
  });

  criterion("fig. 4 frame error rates", [&] {
    const ExperimentConfig cfg = fig4_config();
    cc4 = build_construction(cfg, workers);
    const auto fer = fer_curve(cfg, cc4, {18.8, 19.2, 19.6}, workers);
    const double cross_f = crossing_db(fer, 1e-2);
    const auto rcu = rcu_curve(cfg, cc4, cfg.rate_bpcu, {18.5, 18.9, 19.3, 19.7}, workers);
    const double cross_r = crossing_db(rcu, 1e-2);
    const double gap = cross_f - cross_r;
    return std::make_pair(std::fabs(gap) <= 0.3,
                          fmt("mlhy@1e-2 %.3f dB, rcu@1e-2 %.3f dB, gap %.3f (want |gap|<=0.3)",
                              cross_f, cross_r, gap));
  });

  criterion("property suites", [&] {
    std::string detail;
    bool pass = true;

    const bool inv = check_involution();
    pass = pass && inv;
    detail += fmt("involution<=1024 %s; ", inv ? "ok" : "BAD");

    const double sc_err = max_sc_posterior_error();
    pass = pass && sc_err < 1e-9;
    detail += fmt("sc-vs-brute N=16 err %.1e; ", sc_err);

    const long rt3 = roundtrip_failures(fig3_config(false), cc3, 1000);
    const long rt4 = roundtrip_failures(fig4_config(), cc4, 1000);
    pass = pass && rt3 == 0 && rt4 == 0;
    detail += fmt("noiseless roundtrip failures %ld+%ld/1000; ", rt3, rt4);

    const bool ccdm_ok = ccdm_exhaustive_ok();
    pass = pass && ccdm_ok;
    detail += fmt("ccdm exhaustive %s; ", ccdm_ok ? "ok" : "BAD");

    const double chain = max_chain_error();
    pass = pass && chain < 1e-9;
    detail += fmt("posterior chain err %.1e; ", chain);

    // polarization trend (information-set fraction grows toward I(X;Y))
    const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
    const InputDistribution target = design_distribution(ask8, 13.0, -1.0);
    const double sigma = sigma_for_snr_db(ask8, target.pmf, 13.0);
    const double mi = constellation_capacity(ask8, target.pmf, 13.0);
    std::vector<double> fractions;
    for (int n : {64, 256, 1024}) {
      const BitchannelStats st =
          estimate_bitchannels(ask8, target, sigma, n, n >= 1024 ? 2000 : 6000, 7, workers);
      fractions.push_back(polarization_fractions(st, 0.3).info_per_symbol);
    }
    const bool trend = fractions[0] < fractions[1] && fractions[1] < fractions[2] &&
                       fractions[2] < mi + 0.05 && mi - fractions[2] <= 0.1;
    pass = pass && trend;
    detail += fmt("|I|/N trend %.3f -> %.3f -> %.3f toward I=%.3f", fractions[0], fractions[1],
                  fractions[2], mi);
    return std::make_pair(pass, detail);
  });

  criterion("worker-count determinism", [&] {
    ExperimentConfig cfg;
    cfg.mode = SchemeMode::uniform_mlpc;
    cfg.constellation = "2-ASK";
    cfg.block_length = 32;
    cfg.rate_bpcu = 0.5;
    cfg.dsnr_db = 3.0;
    cfg.n_dm = 0;
    cfg.l_dec = 8;
    cfg.crc = CrcSpec{7, 0x09};
    cfg.snr_sweep_db = {0.5, 1.5};
    cfg.seed = 99;
    cfg.min_frames = 500;
    cfg.min_errors = 40;
    cfg.max_frames = 5000;
    cfg.construction_trials = 5000;
    const CodeConstruction cc = build_construction(cfg, workers);
    const auto one = run_fer_sweep(cfg, cc, 1);
    const auto eight = run_fer_sweep(cfg, cc, 8);
    bool same = one.size() == eight.size();
    for (std::size_t i = 0; same && i < one.size(); ++i)
      same = one[i].frames == eight[i].frames &&
             one[i].frame_errors == eight[i].frame_errors &&
             one[i].bit_errors == eight[i].bit_errors;
    return std::make_pair(same, same ? fmt("error counts identical over %zu points at 1 and "
                                           "8 workers",
                                           one.size())
                                     : std::string("counts diverged"));
  });

  std::printf("%s: %d/8 criteria passed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
