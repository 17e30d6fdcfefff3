#include "mlhy/polar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlhy {

PolarParams::PolarParams(int n_exp) : n(n_exp), block_length(1 << n_exp) {
  if (n_exp < 0 || n_exp > 30) throw std::invalid_argument("polar: bad block exponent");
}

std::vector<int> bit_reversal_permutation(int n) {
  const int size = 1 << n;
  std::vector<int> perm(size);
  for (int i = 0; i < size; ++i) {
    int r = 0;
    for (int b = 0; b < n; ++b) r |= ((i >> b) & 1) << (n - 1 - b);
    perm[i] = r;
  }
  return perm;
}

BitVector polar_transform(const BitVector& u) {
  const std::size_t size = u.size();
  if (size == 0 || (size & (size - 1)) != 0)
    throw std::invalid_argument("polar_transform: length must be a power of two");
  int n = 0;
  while ((std::size_t{1} << n) < size) ++n;

  const auto perm = bit_reversal_permutation(n);
  BitVector x(size);
  for (std::size_t i = 0; i < size; ++i) x[i] = u[perm[i]];
  // butterfly network for F^{(x)n}
  for (std::size_t h = 1; h < size; h <<= 1)
    for (std::size_t i = 0; i < size; i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) x[j] ^= x[j + h];
  return x;
}

double llr_from_pair(const PosteriorPair& p) {
  if (p.p1 <= 0.0) return p.p0 <= 0.0 ? 0.0 : 1e300;
  if (p.p0 <= 0.0) return -1e300;
  return std::log(p.p0) - std::log(p.p1);
}

PosteriorPair pair_from_llr(double llr) {
  PosteriorPair out;
  if (llr >= 0.0) {
    const double e = std::exp(-llr);
    out.p0 = 1.0 / (1.0 + e);
    out.p1 = e / (1.0 + e);
  } else {
    const double e = std::exp(llr);
    out.p0 = e / (1.0 + e);
    out.p1 = 1.0 / (1.0 + e);
  }
  return out;
}

namespace {

// log(1 + e^{-x}) for x >= 0; the tail is below double resolution of the
// surrounding terms beyond ~37.
inline double softplus_neg(double x) { return x > 37.0 ? 0.0 : std::log1p(std::exp(-x)); }

}  // namespace

double polar_f(double a, double b) {
  // log((1 + e^{a+b}) / (e^a + e^b)), exact and stable
  const double mag = std::min(std::fabs(a), std::fabs(b));
  const double sgn = ((a < 0.0) != (b < 0.0)) ? -1.0 : 1.0;
  return sgn * mag + softplus_neg(std::fabs(a + b)) - softplus_neg(std::fabs(a - b));
}

double log_sigmoid(double s) {
  if (s >= 0.0) return -softplus_neg(s);
  return s - softplus_neg(-s);
}

// ---------------------------------------------------------------------------
// CRC

BitVector crc_compute(std::span<const std::uint8_t> data, const CrcSpec& spec) {
  if (spec.width <= 0 || spec.width > 63) throw std::invalid_argument("crc: bad width");
  std::uint64_t reg = 0;
  const std::uint64_t mask = (std::uint64_t{1} << spec.width) - 1;
  for (std::uint8_t d : data) {
    const std::uint64_t fb = ((reg >> (spec.width - 1)) ^ (d & 1)) & 1;
    reg = ((reg << 1) & mask) ^ (fb ? spec.poly : 0);
  }
  BitVector out(spec.width);
  for (int i = 0; i < spec.width; ++i)
    out[i] = static_cast<std::uint8_t>((reg >> (spec.width - 1 - i)) & 1);
  return out;
}

bool crc_check(std::span<const std::uint8_t> data_with_crc, const CrcSpec& spec) {
  if (static_cast<int>(data_with_crc.size()) < spec.width) return false;
  const std::size_t payload = data_with_crc.size() - spec.width;
  const BitVector crc = crc_compute(data_with_crc.first(payload), spec);
  for (int i = 0; i < spec.width; ++i)
    if (crc[i] != data_with_crc[payload + i]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// SC / SCL engine (Tal-Vardy recursion with copy-on-write level arrays)

namespace {

template <typename T>
class CowVec {
 public:
  void init(std::size_t size, T fill) { data_ = std::make_shared<std::vector<T>>(size, fill); }
  void adopt(std::vector<T> v) { data_ = std::make_shared<std::vector<T>>(std::move(v)); }
  const std::vector<T>& read() const { return *data_; }
  std::vector<T>& write() {
    if (data_.use_count() > 1) data_ = std::make_shared<std::vector<T>>(*data_);
    return *data_;
  }

 private:
  std::shared_ptr<std::vector<T>> data_;
};

struct UNode {
  std::shared_ptr<UNode> prev;
  std::uint8_t bit;
};

struct Path {
  std::vector<CowVec<double>> lch, lpr;      // [lambda], level lambda holds 2^{n-lambda} values
  std::vector<CowVec<std::uint8_t>> csums;   // [lambda], 2 columns per branch: index 2*beta+col
  std::shared_ptr<UNode> tail;
  double metric = 0.0;
  double lp_ch = 0.0;
  double lp_pr = 0.0;
  int parent = 0;
  int protect = 1;  // smallest list size that keeps this path (see fork pruning)
};

class Engine {
 public:
  Engine(const PolarParams& params, bool has_channel)
      : n_(params.n), size_(params.block_length), has_channel_(has_channel) {}

  void calc_llr(Path& p, int lambda, int phi) {
    if (lambda == 0) return;
    const int psi = phi >> 1;
    if ((phi & 1) == 0) calc_llr(p, lambda - 1, psi);
    const int count = 1 << (n_ - lambda);
    const auto& prev_pr = p.lpr[lambda - 1].read();
    auto& cur_pr = p.lpr[lambda].write();
    if ((phi & 1) == 0) {
      for (int beta = 0; beta < count; ++beta)
        cur_pr[beta] = polar_f(prev_pr[2 * beta], prev_pr[2 * beta + 1]);
      if (has_channel_) {
        const auto& prev_ch = p.lch[lambda - 1].read();
        auto& cur_ch = p.lch[lambda].write();
        for (int beta = 0; beta < count; ++beta)
          cur_ch[beta] = polar_f(prev_ch[2 * beta], prev_ch[2 * beta + 1]);
      }
    } else {
      const auto& c = p.csums[lambda].read();
      for (int beta = 0; beta < count; ++beta)
        cur_pr[beta] = polar_g(prev_pr[2 * beta], prev_pr[2 * beta + 1], c[2 * beta]);
      if (has_channel_) {
        const auto& prev_ch = p.lch[lambda - 1].read();
        auto& cur_ch = p.lch[lambda].write();
        for (int beta = 0; beta < count; ++beta)
          cur_ch[beta] = polar_g(prev_ch[2 * beta], prev_ch[2 * beta + 1], c[2 * beta]);
      }
    }
  }

  void push_bit(Path& p, int phi, int u) {
    auto& c = p.csums[n_].write();
    c[phi & 1] = static_cast<std::uint8_t>(u);
    auto node = std::make_shared<UNode>();
    node->prev = p.tail;
    node->bit = static_cast<std::uint8_t>(u);
    p.tail = std::move(node);
    if (phi & 1) propagate(p, n_, phi);
  }

  void propagate(Path& p, int lambda, int phi) {
    const int psi = phi >> 1;
    const int count = 1 << (n_ - lambda);
    const auto& cur = p.csums[lambda].read();
    auto& prev = p.csums[lambda - 1].write();
    const int col = psi & 1;
    for (int beta = 0; beta < count; ++beta) {
      prev[4 * beta + col] = cur[2 * beta] ^ cur[2 * beta + 1];
      prev[4 * beta + 2 + col] = cur[2 * beta + 1];
    }
    if ((psi & 1) && lambda > 1) propagate(p, lambda - 1, psi);
  }

  double bit_llr_prior(const Path& p) const { return p.lpr[n_].read()[0]; }
  double bit_llr_channel(const Path& p) const { return p.lch[n_].read()[0]; }

  int n_;
  int size_;
  bool has_channel_;
};

Path make_path(const PolarParams& params, const LeafLlrs& in, int parent, bool has_channel) {
  Path p;
  const int n = params.n;
  p.lpr.resize(n + 1);
  p.csums.resize(n + 1);
  if (has_channel) p.lch.resize(n + 1);
  for (int lambda = 0; lambda <= n; ++lambda) {
    const std::size_t count = std::size_t{1} << (n - lambda);
    if (lambda == 0) {
      p.lpr[0].adopt(in.prior);
      if (has_channel) p.lch[0].adopt(in.channel);
    } else {
      p.lpr[lambda].init(count, 0.0);
      if (has_channel) p.lch[lambda].init(count, 0.0);
    }
    p.csums[lambda].init(2 * count, 0);
  }
  p.metric = in.metric;
  p.lp_ch = in.log_prob_channel;
  p.lp_pr = in.log_prob_prior;
  p.parent = parent;
  p.protect = in.protect_level;
  return p;
}

struct Candidate {
  int path;
  std::uint8_t bit;
  double metric;
};

}  // namespace

std::vector<SclPath> scl_run(const PolarParams& params, std::span<const LeafLlrs> inputs,
                             std::span<const BitPlan> plan, int l_max, Rng* rng,
                             const BitObserver* observer) {
  const int size = params.block_length;
  if (inputs.empty()) throw std::invalid_argument("scl_run: no input paths");
  if (static_cast<int>(plan.size()) != size) throw std::invalid_argument("scl_run: plan size");
  if (l_max < 1) throw std::invalid_argument("scl_run: list size");
  const bool has_channel = !inputs[0].channel.empty();
  for (const auto& in : inputs) {
    if (static_cast<int>(in.prior.size()) != size ||
        (has_channel ? static_cast<int>(in.channel.size()) != size : !in.channel.empty()))
      throw std::invalid_argument("scl_run: leaf llr size");
  }

  Engine eng(params, has_channel);
  std::vector<Path> paths;
  paths.reserve(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k)
    paths.push_back(make_path(params, inputs[k], static_cast<int>(k), has_channel));

  std::vector<Candidate> cands;
  for (int phi = 0; phi < size; ++phi) {
    for (auto& p : paths) eng.calc_llr(p, params.n, phi);
    const BitPlan& bp = plan[phi];

    auto metric_llr = [&](const Path& p) -> double {
      switch (bp.metric) {
        case MetricSource::channel: return eng.bit_llr_channel(p);
        case MetricSource::prior: return eng.bit_llr_prior(p);
        default: return 0.0;
      }
    };

    if (bp.rule == BitRule::fork) {
      cands.clear();
      for (std::size_t k = 0; k < paths.size(); ++k) {
        const double lm = metric_llr(paths[k]);
        cands.push_back({static_cast<int>(k), 0,
                         paths[k].metric + (bp.metric == MetricSource::none ? 0.0 : log_sigmoid(lm))});
        cands.push_back({static_cast<int>(k), 1,
                         paths[k].metric + (bp.metric == MetricSource::none ? 0.0 : log_sigmoid(-lm))});
      }
      // Nested protective pruning: fill the survivor set in doubling rounds,
      // round K only drawing on children of paths a size-K list would hold.
      // A run with list L then explores exactly the size-L slice of any run
      // with a larger list, which makes the best final metric monotone in L
      // and makes list shaping never fall below the greedy encoder.
      std::vector<int> order(cands.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return cands[a].metric > cands[b].metric;
      });
      const int keep = std::min<int>(l_max, static_cast<int>(cands.size()));
      std::vector<int> chosen;  // candidate indices in selection order
      std::vector<int> level_of(cands.size(), 0);
      std::vector<char> taken(cands.size(), 0);
      for (int round = 1; static_cast<int>(chosen.size()) < keep; round *= 2) {
        const int target = std::min(keep, round);
        for (int oi = 0; static_cast<int>(chosen.size()) < target &&
                         oi < static_cast<int>(order.size());
             ++oi) {
          const int ci = order[oi];
          if (taken[ci] || paths[cands[ci].path].protect > round) continue;
          taken[ci] = 1;
          level_of[ci] = round;
          chosen.push_back(ci);
        }
      }
      std::vector<int> uses(paths.size(), 0);
      for (int ci : chosen) ++uses[cands[ci].path];
      std::vector<Path> next;
      next.reserve(keep);
      for (int ci : chosen) {
        const Candidate& c = cands[ci];
        Path& src = paths[c.path];
        if (uses[c.path] > 1) {
          next.push_back(src);  // copy: COW keeps this cheap
          --uses[c.path];
        } else {
          next.push_back(std::move(src));
          uses[c.path] = 0;
        }
        Path& dst = next.back();
        dst.metric = c.metric;
        dst.protect = level_of[ci];
        const double lch = has_channel ? eng.bit_llr_channel(dst) : 0.0;
        const double lpr = eng.bit_llr_prior(dst);
        const double s = c.bit ? -1.0 : 1.0;
        if (has_channel) dst.lp_ch += log_sigmoid(s * lch);
        dst.lp_pr += log_sigmoid(s * lpr);
        if (observer)
          (*observer)(static_cast<int>(next.size()) - 1, phi, pair_from_llr(lch),
                      pair_from_llr(lpr), c.bit);
        eng.push_bit(dst, phi, c.bit);
      }
      paths = std::move(next);
    } else {
      for (std::size_t k = 0; k < paths.size(); ++k) {
        Path& p = paths[k];
        const double lch = has_channel ? eng.bit_llr_channel(p) : 0.0;
        const double lpr = eng.bit_llr_prior(p);
        int u = 0;
        switch (bp.rule) {
          case BitRule::fixed: u = bp.value; break;
          case BitRule::argmax_channel: u = lch < 0.0 ? 1 : 0; break;
          case BitRule::argmax_prior: u = lpr < 0.0 ? 1 : 0; break;
          case BitRule::sample_prior: {
            if (!rng) throw std::invalid_argument("scl_run: sample_prior needs an rng");
            u = rng->bit(pair_from_llr(lpr).p1);
            break;
          }
          default: break;
        }
        const double s = u ? -1.0 : 1.0;
        if (has_channel) p.lp_ch += log_sigmoid(s * lch);
        p.lp_pr += log_sigmoid(s * lpr);
        switch (bp.metric) {
          case MetricSource::channel: p.metric += log_sigmoid(s * lch); break;
          case MetricSource::prior: p.metric += log_sigmoid(s * lpr); break;
          default: break;
        }
        if (observer)
          (*observer)(static_cast<int>(k), phi, pair_from_llr(lch), pair_from_llr(lpr), u);
        eng.push_bit(p, phi, u);
      }
    }
  }

  std::vector<SclPath> out(paths.size());
  for (std::size_t k = 0; k < paths.size(); ++k) {
    Path& p = paths[k];
    SclPath& o = out[k];
    o.metric = p.metric;
    o.log_prob_channel = p.lp_ch;
    o.log_prob_prior = p.lp_pr;
    o.parent = p.parent;
    o.protect_level = p.protect;
    o.u.resize(size);
    const UNode* node = p.tail.get();
    for (int i = size - 1; i >= 0; --i) {
      o.u[i] = node->bit;
      node = node->prev.get();
    }
    o.x.resize(size);
    const auto& c0 = p.csums[0].read();
    for (int beta = 0; beta < size; ++beta) o.x[beta] = c0[2 * beta];
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SclPath& a, const SclPath& b) { return a.metric > b.metric; });
  return out;
}

SclPath sc_pass(const PolarParams& params, const LeafLlrs& input, std::span<const BitPlan> plan,
                Rng* rng, const BitObserver* observer) {
  auto out = scl_run(params, std::span<const LeafLlrs>(&input, 1), plan, 1, rng, observer);
  return std::move(out.front());
}

SclDecision scl_pass(const PolarParams& params, const LeafLlrs& input,
                     std::span<const BitPlan> plan, int l_max,
                     const std::optional<CrcSpec>& crc, Rng* rng) {
  SclDecision dec;
  dec.ranked = scl_run(params, std::span<const LeafLlrs>(&input, 1), plan, l_max, rng);
  dec.chosen = 0;
  dec.crc_pass = false;
  if (crc) {
    for (std::size_t k = 0; k < dec.ranked.size(); ++k) {
      BitVector info;
      for (int i = 0; i < params.block_length; ++i)
        if (plan[i].rule == BitRule::fork) info.push_back(dec.ranked[k].u[i]);
      if (crc_check(info, *crc)) {
        dec.chosen = static_cast<int>(k);
        dec.crc_pass = true;
        break;
      }
    }
  }
  return dec;
}

}  // namespace mlhy
