#include "mlhy/rcu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mlhy/parallel.hpp"

namespace mlhy {

namespace {

constexpr std::uint64_t kRcuSalt = 0x726375626f756e64ULL;
constexpr long kMaxGridBins = 1L << 21;

// one outer Monte-Carlo sample of min(1, (M-1) Pr(sum_k i(Xbar_k; y_k) >= t))
double rcu_trial(const Constellation& c, std::span<const double> pmf,
                 std::span<const double> cdf, double sigma, int n, double log2_messages,
                 double step, std::span<const std::vector<int>> sent_words, Rng& rng) {
  const int alphabet = c.size();
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double log2e = 1.0 / std::log(2.0);

  const std::vector<int>* word = nullptr;
  if (!sent_words.empty()) word = &sent_words[rng.bits() % sent_words.size()];

  // info-density atoms per received sample, quantized conservatively upward
  std::vector<std::vector<long>> atoms(n, std::vector<long>(alphabet));
  std::vector<long> atom_max(n);
  double threshold = 0.0;
  for (int k = 0; k < n; ++k) {
    int sym;
    if (word) {
      sym = (*word)[k];
    } else {
      const double r = rng.uniform01();
      sym = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
      if (sym >= alphabet) sym = alphabet - 1;
    }
    const double y = c.points[sym] + sigma * rng.gaussian();

    double maxll = -std::numeric_limits<double>::infinity();
    std::vector<double> ll(alphabet);
    for (int a = 0; a < alphabet; ++a) {
      const double d = y - c.points[a];
      ll[a] = -d * d * inv2s2;
      maxll = std::max(maxll, ll[a]);
    }
    double lse = 0.0;
    for (int a = 0; a < alphabet; ++a) lse += pmf[a] * std::exp(ll[a] - maxll);
    const double log_py = maxll + std::log(lse);  // up to the common normal factor

    long amax = std::numeric_limits<long>::min();
    for (int a = 0; a < alphabet; ++a) {
      const double dens = (ll[a] - log_py) * log2e;  // i(a; y) in bits
      atoms[k][a] = static_cast<long>(std::ceil(dens / step));
      amax = std::max(amax, atoms[k][a]);
      if (a == sym) threshold += dens;
    }
    atom_max[k] = amax;
  }
  const long t_q = static_cast<long>(std::floor(threshold / step));

  // suffix maxima: mass that can provably not reach t_q anymore is dropped
  std::vector<long> suffix_max(n + 1, 0);
  for (int k = n - 1; k >= 0; --k) suffix_max[k] = suffix_max[k + 1] + atom_max[k];
  if (suffix_max[0] < t_q) return 0.0;  // even the best candidate word falls short

  long lo = 0, hi = 0;
  std::vector<double> prob(1, 1.0);

  std::vector<double> next;
  for (int k = 0; k < n; ++k) {
    const long next_hi = hi + atom_max[k];
    const long next_lo = std::max(lo + *std::min_element(atoms[k].begin(), atoms[k].end()),
                                  t_q - suffix_max[k + 1]);
    if (next_hi - next_lo + 1 > kMaxGridBins)
      throw std::runtime_error("rcu_bound: info-density grid overflow; increase grid_step");
    next.assign(next_hi - next_lo + 1, 0.0);
    for (long b = lo; b <= hi; ++b) {
      const double p = prob[b - lo];
      if (p == 0.0) continue;
      for (int a = 0; a < alphabet; ++a) {
        const long b2 = b + atoms[k][a];
        if (b2 < next_lo) continue;  // provably below the threshold forever
        next[b2 - next_lo] += p * pmf[a];
      }
    }
    prob.swap(next);
    lo = next_lo;
    hi = next_hi;
  }

  double tail = 0.0;
  for (long b = std::max(lo, t_q); b <= hi; ++b) tail += prob[b - lo];
  if (tail <= 0.0) return 0.0;
  // compare in the log domain so huge message counts cannot overflow
  if (log2_messages + std::log2(tail) >= 0.0) return 1.0;
  return std::exp2(log2_messages + std::log2(tail));
}

}  // namespace

RcuResult rcu_bound(const Constellation& c, std::span<const double> pmf, double sigma, int n,
                    double rate_bpcu, long outer_trials, double grid_step, std::uint64_t seed,
                    int workers, std::span<const std::vector<int>> sent_words) {
  if (outer_trials < 1) throw std::invalid_argument("rcu_bound: trials");
  if (grid_step <= 0.0) throw std::invalid_argument("rcu_bound: grid step");
  for (const auto& w : sent_words)
    if (static_cast<int>(w.size()) != n)
      throw std::invalid_argument("rcu_bound: sent word length mismatch");

  std::vector<double> cdf(c.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  // log2(2^{NR} - 1), with the -1 kept exactly while it is representable
  const double nr = n * rate_bpcu;
  const double log2_messages = nr < 50.0 ? std::log2(std::exp2(nr) - 1.0) : nr;

  const long chunk = 64;
  const long num_chunks = (outer_trials + chunk - 1) / chunk;
  std::vector<double> sums(num_chunks, 0.0), sq_sums(num_chunks, 0.0);
  parallel_chunks(outer_trials, chunk, workers, [&](long ci, long begin, long end) {
    double s = 0.0, s2 = 0.0;
    for (long t = begin; t < end; ++t) {
      Rng rng(stream_key(seed, kRcuSalt, static_cast<std::uint64_t>(t)));
      const double v = rcu_trial(c, pmf, cdf, sigma, n, log2_messages, grid_step,
                                  sent_words, rng);
      s += v;
      s2 += v * v;
    }
    sums[ci] = s;
    sq_sums[ci] = s2;
  });

  double mean = 0.0, sq = 0.0;
  for (long ci = 0; ci < num_chunks; ++ci) {
    mean += sums[ci];
    sq += sq_sums[ci];
  }
  mean /= outer_trials;
  sq /= outer_trials;

  RcuResult res;
  res.bound = mean;
  res.std_err = outer_trials > 1 ? std::sqrt(std::max(0.0, sq - mean * mean) /
                                             static_cast<double>(outer_trials - 1))
                                 : 0.0;
  res.trials = outer_trials;
  res.grid_step = grid_step;
  return res;
}

}  // namespace mlhy
