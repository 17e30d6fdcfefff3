#pragma once

#include <cstdint>
#include <span>

#include "mlhy/modem.hpp"

namespace mlhy {

struct RcuResult {
  double bound = 1.0;
  double std_err = 0.0;
  long trials = 0;
  double grid_step = 0.0;
};

// Random-coding union bound E[min(1, (2^{NR}-1) Pr(i(Xbar;Y) >= i(X;Y) | X,Y))]
// over the AWGN channel. The outer expectation is Monte-Carlo; the inner
// probability is computed exactly given y by convolving the N per-sample
// info-density atom distributions (candidate symbols i.i.d. from pmf) on a
// quantized grid. The quantization is conservative (atoms rounded up,
// threshold rounded down), so the tail -- and with it the reported bound --
// is never underestimated.
//
// `sent_words`, when nonempty, supplies the transmit ensemble (e.g. words
// emitted by the shaping encoder); outer trials then draw uniformly from it
// instead of sampling symbols i.i.d., which removes the composition
// fluctuations an actual shaped transmitter never produces.
RcuResult rcu_bound(const Constellation& c, std::span<const double> pmf, double sigma, int n,
                    double rate_bpcu, long outer_trials, double grid_step, std::uint64_t seed,
                    int workers = 1,
                    std::span<const std::vector<int>> sent_words = {});

}  // namespace mlhy
