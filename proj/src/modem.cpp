#include "mlhy/modem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace mlhy {

namespace {

constexpr double kLlrClamp = 1e6;  // "certain" decisions stay finite through the metrics

double clamp_llr(double v) { return std::clamp(v, -kLlrClamp, kLlrClamp); }

// physicists' Gauss-Hermite rule via the Golub-Welsch eigenproblem
struct HermiteRule {
  std::vector<double> nodes, weights;
};

const HermiteRule& gauss_hermite_128() {
  static const HermiteRule rule = [] {
    const int n = 128;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double off = std::sqrt(k / 2.0);
      jacobi(k, k - 1) = off;
      jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    HermiteRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double total = std::sqrt(M_PI);
    for (int k = 0; k < n; ++k) {
      r.nodes[k] = es.eigenvalues()(k);
      const double v0 = es.eigenvectors()(0, k);
      r.weights[k] = total * v0 * v0;
    }
    return r;
  }();
  return rule;
}

}  // namespace

std::string Constellation::name() const {
  return std::to_string(size()) + (kind == ConstellationKind::ask ? "-ASK" : "-PAM");
}

Constellation make_constellation(ConstellationKind kind, int m) {
  if (m < 1 || m > 8) throw std::invalid_argument("make_constellation: bad bit count");
  Constellation c;
  c.kind = kind;
  c.m = m;
  const int size = 1 << m;
  c.points.resize(size);
  for (int i = 0; i < size; ++i) {
    if (kind == ConstellationKind::ask)
      c.points[i] = 2.0 * i - (size - 1);  // odd grid: -(M-1), ..., -1, 1, ..., M-1
    else
      c.points[i] = static_cast<double>(i);  // unipolar grid: 0, 1, ..., M-1
  }
  return c;
}

Constellation constellation_from_name(const std::string& name) {
  const auto dash = name.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("bad constellation name");
  const int size = std::stoi(name.substr(0, dash));
  const std::string kind = name.substr(dash + 1);
  int m = 0;
  while ((1 << m) < size) ++m;
  if ((1 << m) != size) throw std::invalid_argument("constellation size must be a power of two");
  if (kind == "ASK") return make_constellation(ConstellationKind::ask, m);
  if (kind == "PAM") return make_constellation(ConstellationKind::pam, m);
  throw std::invalid_argument("bad constellation kind: " + kind);
}

InputDistribution maxent_pmf(const Constellation& c, double nu) {
  if (nu < 0.0) throw std::invalid_argument("maxent_pmf: nu must be nonnegative");
  InputDistribution d;
  d.nu = nu;
  d.pmf.resize(c.size());
  double norm = 0.0;
  double emin = std::numeric_limits<double>::infinity();
  for (double x : c.points) emin = std::min(emin, nu * x * x);
  for (int i = 0; i < c.size(); ++i) {
    d.pmf[i] = std::exp(-(nu * c.points[i] * c.points[i] - emin));
    norm += d.pmf[i];
  }
  for (double& p : d.pmf) p /= norm;
  return d;
}

double entropy_bits(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double mean_energy(const Constellation& c, std::span<const double> pmf) {
  double e = 0.0;
  for (int i = 0; i < c.size(); ++i) e += pmf[i] * c.points[i] * c.points[i];
  return e;
}

double sigma_for_snr_db(const Constellation& c, std::span<const double> pmf, double snr_db) {
  const double es = mean_energy(c, pmf);
  return std::sqrt(es / std::pow(10.0, snr_db / 10.0));
}

InputDistribution optimize_nu_entropy(const Constellation& c, double target_bits) {
  if (target_bits <= 0.0 || target_bits > c.m + 1e-12)
    throw std::invalid_argument("optimize_nu_entropy: target out of range");
  if (std::fabs(target_bits - c.m) < 1e-12) return maxent_pmf(c, 0.0);

  double lo = 0.0, hi = 1.0;
  while (entropy_bits(maxent_pmf(c, hi).pmf) > target_bits) {
    hi *= 2.0;
    if (hi > 1e9) throw std::invalid_argument("optimize_nu_entropy: target unreachable");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h = entropy_bits(maxent_pmf(c, mid).pmf);
    if (h > target_bits)
      lo = mid;
    else
      hi = mid;
    if (std::fabs(h - target_bits) < 1e-9) break;
  }
  double nu = 0.5 * (lo + hi);
  // polish the bracket until the entropy matches to 1e-6 bits
  while (std::fabs(entropy_bits(maxent_pmf(c, nu).pmf) - target_bits) > 1e-6 && hi - lo > 1e-18) {
    if (entropy_bits(maxent_pmf(c, nu).pmf) > target_bits)
      lo = nu;
    else
      hi = nu;
    nu = 0.5 * (lo + hi);
  }
  return maxent_pmf(c, nu);
}

InputDistribution optimize_nu_rate(const Constellation& c, double snr_db) {
  auto mi_of = [&](double nu) {
    const InputDistribution d = maxent_pmf(c, nu);
    return constellation_capacity(c, d.pmf, snr_db);
  };

  // coarse scan: nu = 0 plus 200 log-spaced values
  const int grid = 200;
  const double nu_lo = 1e-4, nu_hi = 4.0;
  double best_nu = 0.0, best_mi = mi_of(0.0);
  std::vector<double> nus(grid);
  for (int k = 0; k < grid; ++k) {
    nus[k] = nu_lo * std::pow(nu_hi / nu_lo, static_cast<double>(k) / (grid - 1));
    const double mi = mi_of(nus[k]);
    if (mi > best_mi) {
      best_mi = mi;
      best_nu = nus[k];
    }
  }
  // golden-section refinement around the winner
  double a = best_nu > 0.0 ? best_nu / 1.1 : 0.0;
  double b = best_nu > 0.0 ? best_nu * 1.1 : nu_lo;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = mi_of(x1), f2 = mi_of(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = mi_of(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = mi_of(x1);
    }
  }
  const double nu = 0.5 * (a + b);
  return mi_of(nu) > best_mi ? maxent_pmf(c, nu) : maxent_pmf(c, best_nu);
}

std::vector<double> awgn_transmit(std::span<const double> x, double sigma, Rng& rng) {
  if (sigma <= 0.0) throw std::invalid_argument("awgn_transmit: sigma must be positive");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + sigma * rng.gaussian();
  return y;
}

LevelLlrs bitlevel_llrs(double y, const Constellation& c, std::span<const double> pmf,
                        std::uint32_t lower_bits, int level, double sigma, bool with_channel) {
  const std::uint32_t mask = (1u << (level - 1)) - 1;
  double prior[2] = {0.0, 0.0};
  double lse[2];
  double maxll[2] = {-std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
  const double inv2s2 = with_channel ? 1.0 / (2.0 * sigma * sigma) : 0.0;

  // first pass: prior masses and the max log-likelihood per hypothesis
  const int size = c.size();
  for (int i = static_cast<int>(lower_bits & mask); i < size; i += 1 << (level - 1)) {
    const int b = (i >> (level - 1)) & 1;
    prior[b] += pmf[i];
    if (with_channel) {
      const double d = y - c.points[i];
      const double ll = -d * d * inv2s2;
      if (ll > maxll[b]) maxll[b] = ll;
    }
  }
  if (prior[0] + prior[1] <= 0.0)
    throw std::domain_error("bitlevel_llrs: conditioning pattern has zero probability");

  LevelLlrs out;
  out.prior = clamp_llr(std::log(prior[0]) - std::log(prior[1]));
  if (!with_channel) return out;

  const double maxboth = std::max(maxll[0], maxll[1]);
  lse[0] = lse[1] = 0.0;
  for (int i = static_cast<int>(lower_bits & mask); i < size; i += 1 << (level - 1)) {
    if (pmf[i] <= 0.0) continue;
    const int b = (i >> (level - 1)) & 1;
    const double d = y - c.points[i];
    lse[b] += pmf[i] * std::exp(-d * d * inv2s2 - maxboth);
  }
  out.channel = clamp_llr(std::log(lse[0]) - std::log(lse[1]));
  return out;
}

BitlevelPosterior bitlevel_posteriors(double y, const Constellation& c,
                                      std::span<const double> pmf, std::uint32_t lower_bits,
                                      int level, double sigma) {
  const LevelLlrs llr = bitlevel_llrs(y, c, pmf, lower_bits, level, sigma, true);
  BitlevelPosterior out;
  out.with_channel = pair_from_llr(llr.channel);
  out.prior_only = pair_from_llr(llr.prior);
  return out;
}

double constellation_capacity(const Constellation& c, std::span<const double> pmf,
                              double snr_db) {
  const double sigma = sigma_for_snr_db(c, pmf, snr_db);
  const auto& rule = gauss_hermite_128();
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double log2e = 1.0 / std::log(2.0);
  const double sqrt2s = std::sqrt(2.0) * sigma;

  double mi = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    if (pmf[i] <= 0.0) continue;
    double inner = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double t = rule.nodes[k];
      const double y = c.points[i] + sqrt2s * t;
      // log P(y)/normals, stabilized against the transmitted point
      double lse = 0.0;
      for (int j = 0; j < c.size(); ++j) {
        if (pmf[j] <= 0.0) continue;
        const double d = y - c.points[j];
        lse += pmf[j] * std::exp(-d * d * inv2s2 + t * t);
      }
      inner += rule.weights[k] * (-std::log(lse));
    }
    mi += pmf[i] * inner;
  }
  return mi / std::sqrt(M_PI) * log2e;
}

double shaped_capacity(const Constellation& c, double snr_db) {
  const InputDistribution d = optimize_nu_rate(c, snr_db);
  return constellation_capacity(c, d.pmf, snr_db);
}

double pair_symmetric_capacity(const Constellation& c, double snr_db) {
  if (c.size() % 2 != 0) throw std::invalid_argument("pair_symmetric_capacity: odd size");
  const int pairs = c.size() / 2;
  auto mi_of = [&](double nu) {
    // equal mass inside each pair, Maxwell-Boltzmann across pairs keyed by
    // the pair's mean energy
    std::vector<double> pmf(c.size());
    double norm = 0.0;
    for (int p = 0; p < pairs; ++p) {
      const double e = 0.5 * (c.points[2 * p] * c.points[2 * p] +
                              c.points[2 * p + 1] * c.points[2 * p + 1]);
      const double w = std::exp(-nu * e);
      pmf[2 * p] = pmf[2 * p + 1] = 0.5 * w;
      norm += w;
    }
    for (double& v : pmf) v /= norm;
    return constellation_capacity(c, pmf, snr_db);
  };
  double best = mi_of(0.0);
  double best_nu = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double nu = 1e-4 * std::pow(4.0 / 1e-4, static_cast<double>(k) / 199.0);
    const double mi = mi_of(nu);
    if (mi > best) {
      best = mi;
      best_nu = nu;
    }
  }
  double a = best_nu > 0.0 ? best_nu / 1.1 : 0.0;
  double b = best_nu > 0.0 ? best_nu * 1.1 : 1e-4;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 50; ++it) {
    const double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    if (mi_of(x1) < mi_of(x2))
      a = x1;
    else
      b = x2;
  }
  return std::max(best, mi_of(0.5 * (a + b)));
}

double capacity_threshold_db(const std::function<double(double)>& capacity_fn, double target_bits,
                             double lo_db, double hi_db) {
  double lo = lo_db, hi = hi_db;
  if (capacity_fn(lo) >= target_bits || capacity_fn(hi) < target_bits)
    throw std::invalid_argument("capacity_threshold_db: target not bracketed");
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (capacity_fn(mid) >= target_bits)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace mlhy
