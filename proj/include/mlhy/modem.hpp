#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlhy/polar.hpp"
#include "mlhy/rng.hpp"

namespace mlhy {

enum class ConstellationKind { ask, pam };

// Real constellation with set-partitioning labelling: points sorted
// ascending, label of a point equals its index, bitlevel 1 is the least
// significant index bit. Fixing levels 1..l selects every 2^l-th point, so
// the intra-subset minimum distance doubles at each level.
struct Constellation {
  ConstellationKind kind = ConstellationKind::ask;
  int m = 1;
  std::vector<double> points;

  int size() const { return static_cast<int>(points.size()); }
  int label_bit(int index, int level) const { return (index >> (level - 1)) & 1; }
  std::string name() const;
};

Constellation make_constellation(ConstellationKind kind, int m);
Constellation constellation_from_name(const std::string& name);

struct InputDistribution {
  std::vector<double> pmf;
  double nu = 0.0;
};

// Maxwell-Boltzmann family, pmf(x) proportional to exp(-nu x^2)
InputDistribution maxent_pmf(const Constellation& c, double nu);

double entropy_bits(std::span<const double> pmf);
double mean_energy(const Constellation& c, std::span<const double> pmf);
// SNR in dB is 10 log10(E[X^2] / sigma^2) with the expectation under `pmf`.
double sigma_for_snr_db(const Constellation& c, std::span<const double> pmf, double snr_db);

// bisection on nu until H(P_X) matches target_bits within 1e-6 bits
InputDistribution optimize_nu_entropy(const Constellation& c, double target_bits);
// grid search plus golden-section refinement maximizing I(X;Y) at snr_db
InputDistribution optimize_nu_rate(const Constellation& c, double snr_db);

std::vector<double> awgn_transmit(std::span<const double> x, double sigma, Rng& rng);

// Bitlevel posteriors for multistage decoding. `lower_bits` packs the decided
// levels 1..level-1 with level 1 in the least significant position. LLRs are
// log(P(bit=0)/P(bit=1)).
struct LevelLlrs {
  double channel = 0.0;
  double prior = 0.0;
};
LevelLlrs bitlevel_llrs(double y, const Constellation& c, std::span<const double> pmf,
                        std::uint32_t lower_bits, int level, double sigma, bool with_channel);

struct BitlevelPosterior {
  PosteriorPair with_channel;
  PosteriorPair prior_only;
};
BitlevelPosterior bitlevel_posteriors(double y, const Constellation& c,
                                      std::span<const double> pmf, std::uint32_t lower_bits,
                                      int level, double sigma);

// I(X;Y) in bits per channel use over the AWGN channel, Gauss-Hermite
// quadrature with 128 nodes.
double constellation_capacity(const Constellation& c, std::span<const double> pmf, double snr_db);

// max_nu I(X;Y) at the given SNR
double shaped_capacity(const Constellation& c, double snr_db);
// best I(X;Y) subject to P(2i) = P(2i+1) (pair-symmetrized unipolar input)
double pair_symmetric_capacity(const Constellation& c, double snr_db);

// smallest SNR with capacity(snr) >= target_bits, bisection to 1e-4 dB
double capacity_threshold_db(const std::function<double(double)>& capacity_fn, double target_bits,
                             double lo_db, double hi_db);

}  // namespace mlhy
