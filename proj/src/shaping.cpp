#include "mlhy/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlhy {

namespace {

int exponent_of(int block_length) {
  int n = 0;
  while ((1 << n) < block_length) ++n;
  return n;
}

struct MsPath {
  std::vector<BitVector> bit_planes;
  std::vector<BitVector> u_planes;
  BitVector data_bits;  // u values at data positions in (l,i) order
};

// carries the per-path symbol history across levels while the polar engine
// carries the metrics
template <typename LeafFn, typename PlanFn>
std::pair<std::vector<MsPath>, std::vector<SclPath>> run_multistage(const CodeConstruction& cc,
                                                                    const LeafFn& make_leaf,
                                                                    const PlanFn& plan_at,
                                                                    int l_max, Rng* rng) {
  const int size = cc.block_length;
  const PolarParams params(exponent_of(size));

  std::vector<MsPath> paths(1);
  std::vector<SclPath> engine_state(1);  // metric carriers; u/x unused at level 0
  std::vector<BitPlan> plan(size);

  for (int level = 1; level <= cc.m; ++level) {
    for (int i = 0; i < size; ++i) plan[i] = plan_at(level, i);

    std::vector<LeafLlrs> leaves(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) {
      leaves[p] = make_leaf(paths[p], level);
      leaves[p].metric = engine_state[p].metric;
      leaves[p].log_prob_channel = engine_state[p].log_prob_channel;
      leaves[p].log_prob_prior = engine_state[p].log_prob_prior;
      leaves[p].protect_level = engine_state[p].protect_level;
    }

    std::vector<SclPath> out = scl_run(params, leaves, plan, l_max, rng);

    std::vector<MsPath> next;
    next.reserve(out.size());
    for (const SclPath& sp : out) {
      MsPath np = paths[sp.parent];
      np.u_planes.push_back(sp.u);
      np.bit_planes.push_back(sp.x);
      for (int i = 0; i < size; ++i)
        if (cc.classes[cc.index(level, i)] == BitClass::data) np.data_bits.push_back(sp.u[i]);
      next.push_back(std::move(np));
    }
    paths = std::move(next);
    engine_state = std::move(out);
  }
  return {std::move(paths), std::move(engine_state)};
}

Codeword codeword_from_path(const MsPath& path, const CodeConstruction& cc,
                            double shaping_lp) {
  Codeword cw;
  cw.bit_planes = path.bit_planes;
  cw.u_planes = path.u_planes;
  cw.symbols.resize(cc.block_length);
  for (int i = 0; i < cc.block_length; ++i) {
    int idx = 0;
    for (int l = 1; l <= cc.m; ++l) idx |= path.bit_planes[l - 1][i] << (l - 1);
    cw.symbols[i] = idx;
  }
  cw.shaping_log_prob = shaping_lp;
  return cw;
}

Codeword encode_with_mode(std::span<const std::uint8_t> serial_bits, const CodeConstruction& cc,
                          const Constellation& c, DmMode mode, int l_max, Rng* rng) {
  const int size = cc.block_length;

  // serial data bit lookup: flat position -> bit
  std::vector<std::uint8_t> bit_at(static_cast<std::size_t>(cc.m) * size, 0);
  for (std::size_t k = 0; k < cc.data_order.size(); ++k)
    bit_at[cc.data_order[k]] = serial_bits[k];

  auto plan_at = [&](int level, int i) -> BitPlan {
    const std::size_t flat = cc.index(level, i);
    switch (cc.classes[flat]) {
      case BitClass::data: return {BitRule::fixed, bit_at[flat], MetricSource::none};
      case BitClass::frozen: return {BitRule::fixed, 0, MetricSource::none};
      case BitClass::dm:
        switch (mode) {
          case DmMode::deterministic:
            return {BitRule::argmax_prior, 0, MetricSource::prior};
          case DmMode::scl: return {BitRule::fork, 0, MetricSource::prior};
          case DmMode::randomized:
            return {BitRule::sample_prior, 0, MetricSource::prior};
        }
    }
    return {};
  };

  auto make_leaf = [&](const MsPath& path, int level) {
    LeafLlrs leaf;
    leaf.prior.resize(size);
    for (int i = 0; i < size; ++i) {
      std::uint32_t lower = 0;
      for (int l = 1; l < level; ++l) lower |= path.bit_planes[l - 1][i] << (l - 1);
      leaf.prior[i] = bitlevel_llrs(0.0, c, cc.target.pmf, lower, level, 1.0, false).prior;
    }
    return leaf;
  };

  auto [paths, state] = run_multistage(cc, make_leaf, plan_at, l_max, rng);
  // ranked by metric already; ties keep the earlier path
  return codeword_from_path(paths.front(), cc, state.front().metric);
}

}  // namespace

Codeword mlhy_encode(std::span<const std::uint8_t> payload, const CodeConstruction& cc,
                     const Constellation& c, DmMode mode, int l_enc, Rng* rng) {
  if (static_cast<int>(payload.size()) != cc.payload_bits())
    throw std::invalid_argument("mlhy_encode: payload length mismatch");
  if (l_enc < 1) throw std::invalid_argument("mlhy_encode: list size");
  if (mode == DmMode::randomized && !rng)
    throw std::invalid_argument("mlhy_encode: randomized mode needs an rng");

  BitVector serial(payload.begin(), payload.end());
  if (cc.crc) {
    const BitVector crc = crc_compute(payload, *cc.crc);
    serial.insert(serial.end(), crc.begin(), crc.end());
  }

  // the nested list pruning keeps the greedy trajectory alive, so list
  // shaping never emits a word below the deterministic one
  return encode_with_mode(serial, cc, c, mode, mode == DmMode::scl ? l_enc : 1, rng);
}

DecodeResult mlhy_decode(std::span<const double> y, const CodeConstruction& cc,
                         const Constellation& c, double sigma, int l_dec,
                         const std::optional<CrcSpec>& crc) {
  const int size = cc.block_length;
  if (static_cast<int>(y.size()) != size)
    throw std::invalid_argument("mlhy_decode: received length mismatch");
  if (l_dec < 1) throw std::invalid_argument("mlhy_decode: list size");

  auto plan_at = [&](int level, int i) -> BitPlan {
    switch (cc.classes[cc.index(level, i)]) {
      case BitClass::data: return {BitRule::fork, 0, MetricSource::channel};
      case BitClass::frozen: return {BitRule::fixed, 0, MetricSource::channel};
      case BitClass::dm: return {BitRule::argmax_prior, 0, MetricSource::channel};
    }
    return {};
  };

  auto make_leaf = [&](const MsPath& path, int level) {
    LeafLlrs leaf;
    leaf.prior.resize(size);
    leaf.channel.resize(size);
    for (int i = 0; i < size; ++i) {
      std::uint32_t lower = 0;
      for (int l = 1; l < level; ++l) lower |= path.bit_planes[l - 1][i] << (l - 1);
      const LevelLlrs ll = bitlevel_llrs(y[i], c, cc.target.pmf, lower, level, sigma, true);
      leaf.prior[i] = ll.prior;
      leaf.channel[i] = ll.channel;
    }
    return leaf;
  };

  auto [paths, state] = run_multistage(cc, make_leaf, plan_at, l_dec, nullptr);

  int chosen = 0;
  bool crc_pass = false;
  if (crc) {
    for (std::size_t p = 0; p < paths.size(); ++p) {
      if (crc_check(paths[p].data_bits, *crc)) {
        chosen = static_cast<int>(p);
        crc_pass = true;
        break;
      }
    }
  }

  DecodeResult res;
  res.crc_pass = crc_pass;
  res.metric = state[chosen].metric;
  res.bit_planes = paths[chosen].bit_planes;
  res.u_planes = paths[chosen].u_planes;
  const int payload_len = cc.payload_bits();
  res.payload.assign(paths[chosen].data_bits.begin(),
                     paths[chosen].data_bits.begin() + payload_len);
  return res;
}

std::vector<double> empirical_symbol_pmf(std::span<const Codeword> codewords, int alphabet) {
  std::vector<double> pmf(alphabet, 0.0);
  long total = 0;
  for (const Codeword& cw : codewords) {
    for (int s : cw.symbols) {
      pmf[s] += 1.0;
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("empirical_symbol_pmf: no codewords");
  for (double& p : pmf) p /= total;
  return pmf;
}

double rate_loss(std::span<const Codeword> codewords, const CodeConstruction& cc) {
  if (codewords.empty()) throw std::invalid_argument("rate_loss: no codewords");
  const int alphabet = 1 << cc.m;
  const std::vector<double> pmf = empirical_symbol_pmf(codewords, alphabet);
  const double rate = static_cast<double>(cc.payload_bits()) / cc.block_length;
  return entropy_bits(pmf) - rate;
}

}  // namespace mlhy
