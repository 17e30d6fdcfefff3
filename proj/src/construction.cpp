#include "mlhy/construction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "mlhy/parallel.hpp"

namespace mlhy {

namespace {

double binary_entropy(double p1) {
  if (p1 <= 0.0 || p1 >= 1.0) return 0.0;
  return -p1 * std::log2(p1) - (1.0 - p1) * std::log2(1.0 - p1);
}

constexpr std::uint64_t kConstructionSalt = 0x636f6e7374727563ULL;

}  // namespace

BitchannelStats estimate_bitchannels(const Constellation& c, const InputDistribution& pmf,
                                     double sigma, int block_length, long trials,
                                     std::uint64_t seed, int workers, bool with_channel) {
  if (block_length < 1 || (block_length & (block_length - 1)) != 0)
    throw std::invalid_argument("estimate_bitchannels: N must be a power of two");
  if (trials < 1) throw std::invalid_argument("estimate_bitchannels: trials");

  const int m = c.m;
  const int size = block_length;
  int n = 0;
  while ((1 << n) < size) ++n;
  const PolarParams params(n);
  const std::size_t total = static_cast<std::size_t>(m) * size;

  // cumulative pmf for inverse-CDF symbol draws
  std::vector<double> cdf(c.size());
  std::partial_sum(pmf.pmf.begin(), pmf.pmf.end(), cdf.begin());

  const long chunk = 1024;
  const long num_chunks = (trials + chunk - 1) / chunk;
  std::vector<std::vector<double>> partial_src(num_chunks), partial_ch(num_chunks);

  parallel_chunks(trials, chunk, workers, [&](long ci, long begin, long end) {
    std::vector<double> acc_src(total, 0.0), acc_ch(total, 0.0);
    std::vector<int> symbols(size);
    std::vector<double> y(size);
    std::vector<BitVector> planes(m, BitVector(size));
    std::vector<BitVector> uplanes(m);
    LeafLlrs leaf;
    leaf.prior.resize(size);
    if (with_channel) leaf.channel.resize(size);
    std::vector<BitPlan> plan(size);

    for (long t = begin; t < end; ++t) {
      Rng rng(stream_key(seed, kConstructionSalt, static_cast<std::uint64_t>(t)));
      for (int i = 0; i < size; ++i) {
        const double r = rng.uniform01();
        symbols[i] =
            static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
        if (symbols[i] >= c.size()) symbols[i] = c.size() - 1;
      }
      for (int l = 1; l <= m; ++l)
        for (int i = 0; i < size; ++i)
          planes[l - 1][i] = static_cast<std::uint8_t>(c.label_bit(symbols[i], l));
      for (int l = 0; l < m; ++l) uplanes[l] = polar_transform(planes[l]);
      if (with_channel)
        for (int i = 0; i < size; ++i) y[i] = c.points[symbols[i]] + sigma * rng.gaussian();

      for (int l = 1; l <= m; ++l) {
        const std::uint32_t mask = (1u << (l - 1)) - 1;
        for (int i = 0; i < size; ++i) {
          const std::uint32_t lower = static_cast<std::uint32_t>(symbols[i]) & mask;
          const LevelLlrs ll = bitlevel_llrs(y[i], c, pmf.pmf, lower, l, sigma, with_channel);
          leaf.prior[i] = ll.prior;
          if (with_channel) leaf.channel[i] = ll.channel;
        }
        for (int i = 0; i < size; ++i)
          plan[i] = BitPlan{BitRule::fixed, uplanes[l - 1][i], MetricSource::none};

        double* src_row = acc_src.data() + static_cast<std::size_t>(l - 1) * size;
        double* ch_row = acc_ch.data() + static_cast<std::size_t>(l - 1) * size;
        BitObserver obs = [&](int, int bit, const PosteriorPair& wc, const PosteriorPair& po,
                              int) {
          src_row[bit] += binary_entropy(po.p1);
          if (with_channel) ch_row[bit] += binary_entropy(wc.p1);
        };
        sc_pass(params, leaf, plan, nullptr, &obs);
      }
    }
    partial_src[ci] = std::move(acc_src);
    partial_ch[ci] = std::move(acc_ch);
  });

  BitchannelStats stats;
  stats.m = m;
  stats.block_length = size;
  stats.trials = trials;
  stats.with_channel = with_channel;
  stats.low_trials = trials < 1000;
  stats.h_source.assign(total, 0.0);
  stats.h_channel.assign(total, 0.0);
  for (long ci = 0; ci < num_chunks; ++ci) {
    for (std::size_t k = 0; k < total; ++k) {
      stats.h_source[k] += partial_src[ci][k];
      stats.h_channel[k] += partial_ch[ci][k];
    }
  }
  for (std::size_t k = 0; k < total; ++k) {
    stats.h_source[k] /= trials;
    stats.h_channel[k] /= trials;
  }
  return stats;
}

InputDistribution design_distribution(const Constellation& c, double dsnr_db, double kappa_db) {
  return optimize_nu_rate(c, dsnr_db + kappa_db);
}

CodeConstruction select_sets(const BitchannelStats& stats, const ExperimentConfig& cfg,
                             const InputDistribution& target) {
  const int m = stats.m;
  const int size = stats.block_length;
  const std::size_t total = static_cast<std::size_t>(m) * size;

  const long data_count = std::lround(cfg.rate_bpcu * size);
  const long dm_count = cfg.n_dm;
  const long frozen_count = static_cast<long>(total) - data_count - dm_count;
  if (data_count < 0 || frozen_count < 0 || dm_count > static_cast<long>(total))
    throw std::invalid_argument("select_sets: infeasible rate / DM split");
  const int crc_len = cfg.crc ? cfg.crc->width : 0;
  if (crc_len > data_count) throw std::invalid_argument("select_sets: CRC exceeds data budget");

  std::vector<std::uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0u);

  CodeConstruction cc;
  cc.classes.assign(total, BitClass::data);

  // DM: lowest source entropy first, ties toward lower (level, i)
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return stats.h_source[a] < stats.h_source[b];
  });
  for (long k = 0; k < dm_count; ++k) cc.classes[order[k]] = BitClass::dm;

  // frozen: highest channel entropy among the remaining positions
  std::vector<std::uint32_t> rest(order.begin() + dm_count, order.end());
  std::sort(rest.begin(), rest.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (stats.h_channel[a] != stats.h_channel[b])
      return stats.h_channel[a] > stats.h_channel[b];
    return a < b;
  });
  for (long k = 0; k < frozen_count; ++k) cc.classes[rest[k]] = BitClass::frozen;

  cc.constellation = cfg.constellation;
  cc.m = m;
  cc.block_length = size;
  cc.rate_bpcu = cfg.rate_bpcu;
  cc.dsnr_db = cfg.dsnr_db;
  cc.kappa_db = cfg.kappa_db;
  cc.n_dm = cfg.n_dm;
  cc.crc = cfg.crc;
  cc.target = target;
  cc.stats = stats;
  cc.config_hash = construction_config_hash(cfg);
  for (std::size_t k = 0; k < total; ++k)
    if (cc.classes[k] == BitClass::data) cc.data_order.push_back(static_cast<std::uint32_t>(k));
  return cc;
}

PolarizationSummary polarization_fractions(const BitchannelStats& stats, double delta) {
  if (delta <= 0.0 || delta >= 0.5)
    throw std::invalid_argument("polarization_fractions: delta must be in (0, 1/2)");
  PolarizationSummary out;
  const std::size_t total = stats.h_source.size();
  long info = 0;
  for (std::size_t k = 0; k < total; ++k) {
    const double hs = stats.h_source[k];
    const double hc = stats.h_channel[k];
    if (hs < delta)
      out.source.low += 1.0;
    else if (hs > 1.0 - delta)
      out.source.high += 1.0;
    else
      out.source.mid += 1.0;
    if (hc < delta)
      out.channel.low += 1.0;
    else if (hc > 1.0 - delta)
      out.channel.high += 1.0;
    else
      out.channel.mid += 1.0;
    if (hs > 1.0 - delta && hc < delta) ++info;
  }
  out.source.low /= total;
  out.source.high /= total;
  out.source.mid /= total;
  out.channel.low /= total;
  out.channel.high /= total;
  out.channel.mid /= total;
  out.info_per_symbol = static_cast<double>(info) / stats.block_length;
  return out;
}

nlohmann::json construction_to_json(const CodeConstruction& cc) {
  nlohmann::json j;
  j["constellation"] = cc.constellation;
  j["m"] = cc.m;
  j["N"] = cc.block_length;
  j["rate_bpcu"] = cc.rate_bpcu;
  j["dsnr_db"] = cc.dsnr_db;
  j["kappa_db"] = cc.kappa_db;
  j["n_dm"] = cc.n_dm;
  if (cc.crc) {
    j["crc"] = {{"width", cc.crc->width}, {"poly", cc.crc->poly}};
  } else {
    j["crc"] = nullptr;
  }
  j["target_pmf"] = cc.target.pmf;
  j["target_nu"] = cc.target.nu;
  std::string cls(cc.classes.size(), 'D');
  for (std::size_t k = 0; k < cc.classes.size(); ++k)
    cls[k] = cc.classes[k] == BitClass::data ? 'D' : (cc.classes[k] == BitClass::frozen ? 'F' : 'M');
  j["classes"] = cls;
  j["estimator"] = {{"trials", cc.stats.trials},
                    {"with_channel", cc.stats.with_channel},
                    {"low_trials", cc.stats.low_trials},
                    {"kind", "monte-carlo genie-aided, h_b(posterior) averaging"}};
  j["h_source"] = cc.stats.h_source;
  j["h_channel"] = cc.stats.h_channel;
  j["config_hash"] = cc.config_hash;
  return j;
}

CodeConstruction construction_from_json(const nlohmann::json& j) {
  CodeConstruction cc;
  cc.constellation = j.at("constellation").get<std::string>();
  cc.m = j.at("m").get<int>();
  cc.block_length = j.at("N").get<int>();
  cc.rate_bpcu = j.at("rate_bpcu").get<double>();
  cc.dsnr_db = j.at("dsnr_db").get<double>();
  cc.kappa_db = j.at("kappa_db").get<double>();
  cc.n_dm = j.at("n_dm").get<int>();
  if (!j.at("crc").is_null()) {
    CrcSpec crc;
    crc.width = j["crc"].at("width").get<int>();
    crc.poly = j["crc"].at("poly").get<std::uint64_t>();
    cc.crc = crc;
  }
  cc.target.pmf = j.at("target_pmf").get<std::vector<double>>();
  cc.target.nu = j.at("target_nu").get<double>();
  const std::string cls = j.at("classes").get<std::string>();
  cc.classes.resize(cls.size());
  for (std::size_t k = 0; k < cls.size(); ++k)
    cc.classes[k] = cls[k] == 'D' ? BitClass::data : (cls[k] == 'F' ? BitClass::frozen : BitClass::dm);
  cc.stats.m = cc.m;
  cc.stats.block_length = cc.block_length;
  cc.stats.trials = j.at("estimator").at("trials").get<long>();
  cc.stats.with_channel = j.at("estimator").at("with_channel").get<bool>();
  cc.stats.low_trials = j.at("estimator").at("low_trials").get<bool>();
  cc.stats.h_source = j.at("h_source").get<std::vector<double>>();
  cc.stats.h_channel = j.at("h_channel").get<std::vector<double>>();
  cc.config_hash = j.at("config_hash").get<std::string>();
  for (std::size_t k = 0; k < cc.classes.size(); ++k)
    if (cc.classes[k] == BitClass::data) cc.data_order.push_back(static_cast<std::uint32_t>(k));
  return cc;
}

void save_construction(const CodeConstruction& cc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write construction: " + path);
  out << construction_to_json(cc).dump(2) << '\n';
}

CodeConstruction load_construction(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open construction: " + path);
  nlohmann::json j;
  in >> j;
  return construction_from_json(j);
}

}  // namespace mlhy
