#include <doctest.h>

#include <cmath>
#include <vector>

#include "mlhy/modem.hpp"

using namespace mlhy;

TEST_CASE("constellation points and labelling") {
  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  CHECK(ask8.points == std::vector<double>{-7, -5, -3, -1, 1, 3, 5, 7});
  const Constellation pam4 = make_constellation(ConstellationKind::pam, 2);
  CHECK(pam4.points == std::vector<double>{0, 1, 2, 3});
  const Constellation bpsk = make_constellation(ConstellationKind::ask, 1);
  CHECK(bpsk.points == std::vector<double>{-1, 1});
  CHECK(bpsk.label_bit(0, 1) == 0);
  CHECK(bpsk.label_bit(1, 1) == 1);

  // labelling is index composition: bijective by construction, check roundtrip
  for (int idx = 0; idx < ask8.size(); ++idx) {
    int rebuilt = 0;
    for (int l = 1; l <= ask8.m; ++l) rebuilt |= ask8.label_bit(idx, l) << (l - 1);
    CHECK(rebuilt == idx);
  }
}

TEST_CASE("set-partitioning labelling doubles subset distances") {
  for (auto kind : {ConstellationKind::ask, ConstellationKind::pam}) {
    const Constellation c = make_constellation(kind, 3);
    const double d0 = c.points[1] - c.points[0];
    for (int fixed_levels = 0; fixed_levels < 3; ++fixed_levels) {
      const int stride = 1 << fixed_levels;
      for (int pattern = 0; pattern < stride; ++pattern) {
        double dmin = 1e30;
        for (int a = pattern; a < c.size(); a += stride)
          for (int b = a + stride; b < c.size(); b += stride)
            dmin = std::min(dmin, std::fabs(c.points[b] - c.points[a]));
        if (stride < c.size()) CHECK(dmin == doctest::Approx(d0 * stride));
      }
    }
  }
}

TEST_CASE("maxwell-boltzmann pmf") {
  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  const InputDistribution uniform = maxent_pmf(ask8, 0.0);
  for (double p : uniform.pmf) CHECK(p == doctest::Approx(1.0 / 8));

  const InputDistribution peaked = maxent_pmf(ask8, 50.0);
  CHECK(peaked.pmf[3] == doctest::Approx(0.5).epsilon(1e-6));  // -1
  CHECK(peaked.pmf[4] == doctest::Approx(0.5).epsilon(1e-6));  // +1

  // direct normalization oracle at nu = 0.05
  const InputDistribution d = maxent_pmf(ask8, 0.05);
  double norm = 0.0;
  for (double x : ask8.points) norm += std::exp(-0.05 * x * x);
  for (int i = 0; i < 8; ++i)
    CHECK(d.pmf[i] == doctest::Approx(std::exp(-0.05 * ask8.points[i] * ask8.points[i]) / norm)
                          .epsilon(1e-12));
  double sum = 0.0;
  for (double p : d.pmf) sum += p;
  CHECK(std::fabs(sum - 1.0) < 1e-12);
}

TEST_CASE("entropy-matched nu") {
  const Constellation ask4 = make_constellation(ConstellationKind::ask, 2);
  CHECK(optimize_nu_entropy(ask4, 2.0).nu == doctest::Approx(0.0));

  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  const InputDistribution d8 = optimize_nu_entropy(ask8, 2.375);
  CHECK(std::fabs(entropy_bits(d8.pmf) - 2.375) < 1e-6);
  CHECK(d8.nu > 0.0);

  const Constellation ask16 = make_constellation(ConstellationKind::ask, 4);
  const InputDistribution d16 = optimize_nu_entropy(ask16, 3.25);
  CHECK(std::fabs(entropy_bits(d16.pmf) - 3.25) < 1e-6);

  CHECK_THROWS_AS(optimize_nu_entropy(ask8, 3.5), std::invalid_argument);
}

TEST_CASE("awgn determinism and statistics") {
  std::vector<double> x(1000, 1.5);
  Rng a(99), b(99);
  const auto y1 = awgn_transmit(x, 0.7, a);
  const auto y2 = awgn_transmit(x, 0.7, b);
  CHECK(y1 == y2);  // bit-identical under the same seed

  Rng tiny(1);
  const auto y3 = awgn_transmit(x, 1e-12, tiny);
  for (int i = 0; i < 1000; ++i) CHECK(y3[i] == doctest::Approx(1.5).epsilon(1e-9));

  std::vector<double> zeros(1000000, 0.0);
  Rng c(7);
  const auto noise = awgn_transmit(zeros, 0.8, c);
  double var = 0.0;
  for (double v : noise) var += v * v;
  var /= noise.size();
  CHECK(var == doctest::Approx(0.64).epsilon(0.01));
}

TEST_CASE("bitlevel posteriors") {
  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  const InputDistribution uniform = maxent_pmf(ask8, 0.0);

  // huge observation pins the top point
  const Constellation bpsk = make_constellation(ConstellationKind::ask, 1);
  const InputDistribution ubpsk = maxent_pmf(bpsk, 0.0);
  const BitlevelPosterior far = bitlevel_posteriors(50.0, bpsk, ubpsk.pmf, 0, 1, 1.0);
  CHECK(far.with_channel.p1 > 0.999999);

  // symmetric constellation, y = 0: the first-level bit is unbiased, and so
  // is the sign bit once the lower levels are marginalized out
  const BitlevelPosterior lvl1 = bitlevel_posteriors(0.0, ask8, uniform.pmf, 0, 1, 1.0);
  CHECK(lvl1.with_channel.p0 == doctest::Approx(0.5).epsilon(1e-12));
  double sign_p1 = 0.0;
  for (int pattern = 0; pattern < 4; ++pattern) {
    double weight = 0.0, norm = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double lik = std::exp(-ask8.points[i] * ask8.points[i] / 2.0) * uniform.pmf[i];
      norm += lik;
      if ((i & 3) == pattern) weight += lik;
    }
    const BitlevelPosterior sign = bitlevel_posteriors(0.0, ask8, uniform.pmf, pattern, 3, 1.0);
    sign_p1 += weight / norm * sign.with_channel.p1;
  }
  CHECK(sign_p1 == doctest::Approx(0.5).epsilon(1e-9));

  // direct-sum oracle on 4-PAM with a shaped pmf
  const Constellation pam4 = make_constellation(ConstellationKind::pam, 2);
  const InputDistribution shaped = maxent_pmf(pam4, 0.21);
  const double y = 1.3, sigma = 0.6;
  const int lower = 1;  // level-1 bit = 1 -> points 1 and 3
  auto lik = [&](double x) { return std::exp(-(y - x) * (y - x) / (2 * sigma * sigma)); };
  const double w1 = shaped.pmf[1] * lik(1.0);  // level-2 bit 0
  const double w3 = shaped.pmf[3] * lik(3.0);  // level-2 bit 1
  const BitlevelPosterior post = bitlevel_posteriors(y, pam4, shaped.pmf, lower, 2, sigma);
  CHECK(post.with_channel.p0 == doctest::Approx(w1 / (w1 + w3)).epsilon(1e-12));
  CHECK(post.prior_only.p0 ==
        doctest::Approx(shaped.pmf[1] / (shaped.pmf[1] + shaped.pmf[3])).epsilon(1e-12));

  // impossible conditioning pattern
  std::vector<double> degenerate = {0.5, 0.0, 0.5, 0.0};
  CHECK_THROWS_AS(bitlevel_posteriors(0.0, pam4, degenerate, 1, 2, 1.0), std::domain_error);
}

TEST_CASE("posterior chain product equals the symbol posterior") {
  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  const InputDistribution shaped = maxent_pmf(ask8, 0.06);
  const double sigma = 0.9;
  for (double y : {-6.3, -0.4, 0.9, 4.2}) {
    std::vector<double> post(8);
    double norm = 0.0;
    for (int i = 0; i < 8; ++i) {
      post[i] = shaped.pmf[i] * std::exp(-(y - ask8.points[i]) * (y - ask8.points[i]) /
                                         (2 * sigma * sigma));
      norm += post[i];
    }
    for (int i = 0; i < 8; ++i) {
      double chain = 1.0;
      for (int l = 1; l <= 3; ++l) {
        const std::uint32_t lower = i & ((1u << (l - 1)) - 1);
        const BitlevelPosterior p = bitlevel_posteriors(y, ask8, shaped.pmf, lower, l, sigma);
        chain *= ask8.label_bit(i, l) ? p.with_channel.p1 : p.with_channel.p0;
      }
      CHECK(std::fabs(chain - post[i] / norm) < 1e-9);
    }
  }
}

TEST_CASE("capacity sanity") {
  const Constellation ask8 = make_constellation(ConstellationKind::ask, 3);
  const InputDistribution uniform = maxent_pmf(ask8, 0.0);
  CHECK(constellation_capacity(ask8, uniform.pmf, -30.0) < 1e-2);

  double prev = 0.0;
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
    const double mi = constellation_capacity(ask8, uniform.pmf, snr);
    CHECK(mi >= prev);
    prev = mi;
  }
  CHECK(prev > 2.9);  // saturates toward 3 bits

  // rate-optimal shaped input can only improve on uniform
  for (double snr : {6.0, 10.0, 14.0}) {
    CHECK(shaped_capacity(ask8, snr) >=
          constellation_capacity(ask8, uniform.pmf, snr) - 1e-9);
  }

  // anchor spot check: uniform 8-ASK carries 1.75 bpcu near 10.84 dB
  const double mi_anchor = constellation_capacity(ask8, uniform.pmf, 10.84);
  CHECK(mi_anchor == doctest::Approx(1.75).epsilon(0.01));
}
