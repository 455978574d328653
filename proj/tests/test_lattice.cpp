#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "expforge/lattice.hpp"

using namespace expforge;
using namespace expforge::lattice;
using Catch::Approx;

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == Approx(2.0));
  CHECK(unit_ball_volume(2) == Approx(kPi));
  CHECK(unit_ball_volume(3) == Approx(4.0 * kPi / 3.0));
  CHECK(unit_ball_volume(4) == Approx(kPi * kPi / 2.0));
  CHECK_THROWS(unit_ball_volume(0));
}

TEST_CASE("effective radius r*") {
  CHECK(r_star(1, 0.0) == Approx(0.5));
  CHECK(r_star(2, 0.0) == Approx(1.0 / std::sqrt(kPi)));
  // Density scaling: r* shrinks by e^{-delta}.
  CHECK(r_star(3, 1.0) == Approx(r_star(3, 0.0) / std::exp(1.0)));
}

TEST_CASE("beta realizes the target density") {
  for (int q : {3, 5, 11}) {
    for (int N : {2, 4}) {
      for (int K = 1; K <= N; ++K) {
        const ensemble::CodeEnsembleSpec spec(q, N, K);
        for (double gamma : {0.01, 1.0, 7.5}) {
          const double beta = derive_beta(spec, gamma);
          const double cell = std::pow(beta * q, N);
          const double density = std::pow(q, K) / cell;
          CHECK(density == Approx(gamma).epsilon(1e-12));
        }
      }
    }
  }
  CHECK_THROWS(derive_beta(ensemble::CodeEnsembleSpec(3, 2, 1), 0.0));
}

TEST_CASE("config construction ties delta and gamma together") {
  const LatticeConfig cfg = make_config(5, 4, 2, -0.3, 0.1);
  CHECK(cfg.gamma == Approx(std::exp(4 * -0.3)));
  CHECK(cfg.beta == Approx(derive_beta(cfg.spec, cfg.gamma)));
  const LatticeConfig via_gamma =
      make_config_from_gamma(5, 4, 2, cfg.gamma, 0.1);
  CHECK(via_gamma.delta == Approx(cfg.delta));
  CHECK(via_gamma.beta == Approx(cfg.beta));
  CHECK_THROWS(make_config(5, 4, 2, -0.3, 0.0));
}

TEST_CASE("centered remap and its inverse") {
  CHECK(remap_centered({0, 1, 2, 3, 4}, 5) == std::vector<int>{0, 1, 2, -2, -1});
  // Even q is not a valid modulus here but the boundary rule is exercised
  // at odd q: (q-1)/2 stays positive, (q+1)/2 wraps negative.
  CHECK(remap_centered({3}, 7) == std::vector<int>{3});
  CHECK(remap_centered({4}, 7) == std::vector<int>{-3});
  CHECK(remap_centered({0, 1}, 2) == std::vector<int>{0, 1});  // 1 <= q/2
  CHECK_THROWS(remap_centered({5}, 5));
  CHECK_THROWS(remap_centered({-1}, 5));
  for (int q : {2, 3, 5, 7, 11}) {
    std::set<int> image;
    for (int c = 0; c < q; ++c) {
      const int w = remap_centered({c}, q)[0];
      CHECK(2 * w <= q);
      CHECK(2 * w > -q);
      image.insert(w);
      CHECK(remap_uncentered({w}, q)[0] == c);  // round trip
    }
    CHECK(image.size() == static_cast<std::size_t>(q));  // bijection
  }
  CHECK_THROWS(remap_uncentered({-3}, 5));
}

TEST_CASE("admissible modulus is the smallest prime above the ball bound") {
  // N = K = 1 reduces the bound to 4 r* gamma.
  CHECK(min_admissible_q(1.525, 1, 1, 1.0) == 7);     // bound 6.1
  CHECK(min_admissible_q(1.75, 1, 1, 1.0) == 11);     // bound 7 -> next is 8..11
  CHECK(min_admissible_q(0.3, 1, 1, 1.0) == 2);       // tiny bound floors at 2
  // The bound is independent of delta once r* and gamma come from the same
  // delta: (4 r*)^{N/K} gamma^{1/K} = 4^{N/K} V_N^{-1/K}.
  for (int N : {2, 4, 6, 8}) {
    const int K = N / 2;
    const double expect = std::pow(4.0, static_cast<double>(N) / K) *
                          std::pow(unit_ball_volume(N), -1.0 / K);
    for (double delta : {-1.0, -0.3466, 0.2}) {
      const double rs = r_star(N, delta);
      const double gamma = std::exp(N * delta);
      const double bound = std::pow(4.0 * rs, static_cast<double>(N) / K) *
                           std::pow(gamma, 1.0 / K);
      CHECK(bound == Approx(expect).epsilon(1e-10));
      CHECK(min_admissible_q(rs, N, K, gamma) ==
            min_admissible_q(r_star(N, -1.0), N, K, std::exp(-N)));
    }
  }
  CHECK_THROWS(min_admissible_q(0.0, 2, 1, 1.0));
  CHECK_THROWS(min_admissible_q(1e9, 2, 1, 1.0));
}

TEST_CASE("rate dimension rounds up with an epsilon guard") {
  CHECK(rate_dimension(10, 0.1) == 1);    // exactly integral product
  CHECK(rate_dimension(10, 0.15) == 2);
  CHECK(rate_dimension(4, 0.5) == 2);
  CHECK(rate_dimension(3, 1.0 / 3.0) == 1);
  CHECK(rate_dimension(5, 1.0) == 5);
  CHECK_THROWS(rate_dimension(5, 0.0));
  CHECK_THROWS(rate_dimension(5, 1.5));
}

TEST_CASE("modulus schedule window") {
  // N = 16, R = 1/2: lower edge ln q >= ln 16, so the first prime is 17;
  // the default cap N/ln N = 5.77 nats is far away.
  CHECK(q_schedule(16, 0.5) == 17);
  // Slack shifts the lower edge: +0.7 nats pushes past 32.
  CHECK(q_schedule(16, 0.5, 0.7) == 37);
  // A tight explicit cap empties the window.
  CHECK_THROWS_AS(q_schedule(16, 0.5, 0.0, 2.0), window_empty_error);
  CHECK_THROWS(q_schedule(1, 0.5));
  CHECK_THROWS(q_schedule(16, 0.0));
}

TEST_CASE("choose_q takes the larger of schedule and admissibility") {
  // sigma2 = 1/(2 pi e) puts delta* at 0; experiments run below
  // delta_crit = -ln(2)/2.  At R = 1/2 the schedule needs q >= N while
  // admissibility needs q > 4^2 V_N^{-2/N-ish}; admissibility wins here.
  const double dc = exponents::delta_crit(1.0 / (2 * kPi * std::exp(1.0)));
  const double delta = dc - 0.7;
  CHECK(choose_q(2, 0.5, delta) == 7);
  CHECK(choose_q(4, 0.5, delta) == 11);
  CHECK(choose_q(6, 0.5, delta) == 11);
  CHECK(choose_q(8, 0.5, delta) == 13);
  // The same primes at a different depth below delta_crit (delta-free).
  CHECK(choose_q(4, 0.5, dc - 0.5) == 11);
  // Composition: the result is exactly max(schedule, admissibility).
  const int sched = q_schedule(4, 0.5);
  const int adm = min_admissible_q(r_star(4, delta), 4, rate_dimension(4, 0.5),
                                   std::exp(4 * delta));
  CHECK(choose_q(4, 0.5, delta) == std::max(sched, adm));
  // Low rate at this N empties the schedule window: the lower edge
  // ln(N)/(2R) already exceeds the default cap N/ln(N).
  CHECK_THROWS_AS(choose_q(9, 0.25, delta), window_empty_error);
  // An explicit tight cap does the same.
  CHECK_THROWS_AS(choose_q(4, 0.5, delta, 0.0, 1.0), window_empty_error);
}

TEST_CASE("squared-norm histogram of the centered cube") {
  const auto h1 = centered_norm_histogram(3, 1);
  CHECK(h1.at(0) == 1.0);
  CHECK(h1.at(1) == 2.0);
  CHECK(h1.size() == 2);
  const auto h2 = centered_norm_histogram(5, 2);
  CHECK(h2.at(0) == 1.0);
  CHECK(h2.at(1) == 4.0);
  CHECK(h2.at(2) == 4.0);
  CHECK(h2.at(4) == 4.0);
  CHECK(h2.at(5) == 8.0);
  CHECK(h2.at(8) == 4.0);
  double total = 0;
  for (const auto& [s, c] : h2) total += c;
  CHECK(total == 25.0);
  // Mass check at a size where hand counting stops being fun.
  double total3 = 0;
  for (const auto& [s, c] : centered_norm_histogram(7, 3)) total3 += c;
  CHECK(total3 == 343.0);
}

TEST_CASE("lattice alpha: exact counts in self-radius balls") {
  // The ball around z with radius ||z|| always contains the origin.
  const auto at_zero = lattice_alpha({0.0, 0.0}, 1.0, 5);
  CHECK(at_zero.count == 1);
  CHECK(at_zero.value == Approx(1.0 / 25.0));
  // 1-D: ball [0, 2r] against the centered grid {0, +-1, +-2}.
  CHECK(lattice_alpha({1.0}, 1.0, 5).count == 3);
  CHECK(lattice_alpha({1.0}, 1.0, 5).value == Approx(3.0 / 5.0));
  CHECK(lattice_alpha({0.4}, 1.0, 5).count == 1);
  CHECK(lattice_alpha({1.0}, 0.5, 5).count == 3);  // grid {0,.5,1} in [0,2]
  // 2-D hand count: z = (1, 0), ball of radius 1 around it: grid points
  // (0,0), (1,0), (1,1)? distance((1,1),(1,0)) = 1 <= 1 yes; (1,-1) too;
  // (2,0) is at distance 1 as well.
  const auto two_d = lattice_alpha({1.0, 0.0}, 1.0, 5);
  CHECK(two_d.count == 5);
  CHECK_THROWS_AS(lattice_alpha({1.0, 1.0, 1.0}, 1.0, 7, 5), budget_error);
  CHECK_THROWS(lattice_alpha(std::vector<double>(13, 0.0), 1.0, 3));
}

TEST_CASE("lattice alpha grows along a ray") {
  double prev = -1;
  for (int i = 1; i <= 24; ++i) {
    const double r = 0.1 * i;
    const auto a = lattice_alpha({r, 0.0}, 1.0, 5);
    CHECK(a.value >= prev);
    prev = a.value;
  }
}

TEST_CASE("points_in_ball matches direct enumeration") {
  const ensemble::CodeEnsembleSpec spec(5, 2, 1);
  const ensemble::Codebook book(spec, fq::FqMat(5, 1, 2, {1, 2}),
                                fq::FqVec(5, {0, 0}));
  const double beta = 0.9;
  const std::vector<double> center{0.4, -0.2};
  const double radius = 1.1;
  const auto pts = points_in_ball(book, beta, center, radius);
  // Independent check: walk all messages, remap, measure.
  std::set<std::uint64_t> expect;
  for (std::uint64_t m = 0; m < 5; ++m) {
    const fq::FqVec cw = ensemble::encode(book, m);
    double d2 = 0;
    for (int j = 0; j < 2; ++j) {
      const int w = 2 * cw.e[j] > 5 ? cw.e[j] - 5 : cw.e[j];
      const double d = beta * w - center[j];
      d2 += d * d;
    }
    if (d2 <= radius * radius) expect.insert(m);
  }
  std::set<std::uint64_t> got;
  for (const auto& p : pts) got.insert(p.message);
  CHECK(got == expect);
  CHECK_FALSE(got.empty());  // message 0 sits at the origin, distance 0.45
  // Radius zero at an exact lattice point returns it.
  const auto single = points_in_ball(book, beta, {0.0, 0.0}, 0.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].message == 0);
  // Wraparound guard: ball reaching the cube boundary is rejected.
  CHECK_THROWS(points_in_ball(book, beta, {0.0, 0.0}, 0.9 * 5.0 / 2.0));
  // v != 0 is not a lattice.
  const ensemble::Codebook off(spec, fq::FqMat(5, 1, 2, {1, 2}),
                               fq::FqVec(5, {1, 0}));
  CHECK_THROWS(points_in_ball(off, beta, {0.0, 0.0}, 0.1));
}

TEST_CASE("mean alpha on a sphere: sub-activation radius sees only the origin") {
  const LatticeConfig cfg = make_config(5, 2, 1, 0.0, 0.05);
  const auto hist = centered_norm_histogram(5, 2);
  // Smallest nonzero shell is at L = beta; rho < beta/2 activates nothing.
  const double rho = 0.4 * cfg.beta;
  CHECK(mean_alpha_on_sphere(cfg, rho, hist) == Approx(1.0 / 25.0));
  // 1-D closed form: each active shell contributes half its count.
  // K = N forces beta = gamma^{-1/N}; delta = 0 gives beta = 1 and
  // activation radii at 1/2 and 1.
  const LatticeConfig one_d = make_config(5, 1, 1, 0.0, 0.04);
  const auto h1 = centered_norm_histogram(5, 1);
  CHECK(one_d.beta == Approx(1.0).epsilon(1e-12));
  CHECK(mean_alpha_on_sphere(one_d, 0.4, h1) == Approx(1.0 / 5.0));
  CHECK(mean_alpha_on_sphere(one_d, 0.7, h1) == Approx((1 + 2 * 0.5) / 5.0));
  CHECK(mean_alpha_on_sphere(one_d, 1.2, h1) == Approx((1 + 4 * 0.5) / 5.0));
}

TEST_CASE("P1/P2: 1-D closed forms") {
  // q = 5, K = N = 1, delta = 0: beta = 1, r* = 1/2.  Below the first
  // activation radius E[alpha | rho] = 1/5, so
  //   P1 = (M-1)/5 * Pr(|z| <= r*) = 0.8 * erf(r*/(sigma sqrt(2)))
  //   P2 = Pr(|z| > r*) = erfc(r*/(sigma sqrt(2))).
  const double sigma = 0.2;
  const LatticeConfig cfg = make_config(5, 1, 1, 0.0, sigma * sigma);
  const auto r = p1_p2(cfg);
  CHECK(r.r_star == Approx(0.5));
  const double arg = 0.5 / (sigma * std::sqrt(2.0));
  CHECK(r.p1 == Approx(0.8 * std::erf(arg)).epsilon(1e-9));
  CHECK(r.p2 == Approx(std::erfc(arg)).epsilon(1e-9));

  // With K = N the effective radius always equals the first activation
  // radius (r*/beta = V_N^{-1/N} = 1/2 at N = 1), so deeper 1-D configs
  // still see only the origin term below r*.
  const LatticeConfig deep = make_config(5, 1, 1, -std::log(2.0), sigma * sigma);
  const auto rd = p1_p2(deep);
  CHECK(rd.r_star == Approx(1.0));
  const double b = 1.0 / (sigma * std::sqrt(2.0));
  CHECK(rd.p1 == Approx(0.8 * std::erf(b)).epsilon(1e-9));
  CHECK(rd.p2 == Approx(std::erfc(b)).epsilon(1e-9));
}

TEST_CASE("P1: 2-D quadrature vs independent Simpson with planar caps") {
  // q = 3, K = N = 2, delta = 0: beta = 1, r* = pi^{-1/2} = 0.564; only the
  // L = 1 shell (count 4) activates below r*.  The planar cap fraction has
  // the closed form arccos(L / (2 rho)) / pi, so an elementary Simpson rule
  // over the Rayleigh radius density reproduces P1 independently.
  const double s2 = 0.05;
  const LatticeConfig planar = make_config(3, 2, 2, 0.0, s2);
  const auto rp = p1_p2(planar);
  const double rs = 1.0 / std::sqrt(kPi);
  CHECK(rp.r_star == Approx(rs).epsilon(1e-12));
  const double base = (8.0 / 9.0) * (1.0 - std::exp(-rs * rs / (2 * s2)));
  double shell = 0.0;
  const int n = 20000;
  const double lo = 0.5;
  const double h = (rs - lo) / n;
  for (int i = 0; i <= n; ++i) {
    const double rho = lo + h * i;
    const double cap = std::acos(std::min(1.0, 1.0 / (2 * rho))) / kPi;
    const double chi = rho / s2 * std::exp(-rho * rho / (2 * s2));
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    shell += w * cap * chi;
  }
  shell *= h / 3.0;
  CHECK(rp.p1 == Approx(base + (32.0 / 9.0) * shell).epsilon(1e-6));
  CHECK(rp.p2 == Approx(std::exp(-rs * rs / (2 * s2))).epsilon(1e-10));
}

TEST_CASE("P1/P2: 2-D tail is the Rayleigh closed form") {
  const LatticeConfig cfg = make_config(7, 2, 1, -0.8, 0.06);
  const auto r = p1_p2(cfg);
  CHECK(r.p2 == Approx(std::exp(-r.r_star * r.r_star / (2 * 0.06))).epsilon(1e-10));
  CHECK(r.p1 > 0);
}

TEST_CASE("exact finite-q r* by bisection") {
  // q = 5, K = N = 1, beta = 1: (M-1) alpha(r) crosses 1 where the grid
  // count in [0, 2r] jumps from 1 to 2, i.e. at r = 1/2.
  const LatticeConfig cfg = make_config(5, 1, 1, 0.0, 0.04);
  CHECK(exact_r_star(cfg) == Approx(0.5).margin(1e-9));
  // Denser code (K = N = 2): crossing happens at the first shell too.
  const LatticeConfig c2 = make_config(3, 2, 2, 0.0, 0.04);
  const double rs = exact_r_star(c2);
  const std::vector<double> below{0.999 * rs, 0.0};
  const std::vector<double> above{1.001 * rs, 0.0};
  const double m1 = std::pow(3, 2) - 1.0;
  CHECK(m1 * lattice_alpha(below, c2.beta, 3).value < 1.0);
  CHECK(m1 * lattice_alpha(above, c2.beta, 3).value >= 1.0);
}

TEST_CASE("Wilson interval properties and a tabulated value") {
  const auto w = wilson_estimate(5, 100, 9);
  CHECK(w.p_hat == Approx(0.05));
  CHECK(w.ci_low == Approx(0.0215).margin(2e-3));
  CHECK(w.ci_high == Approx(0.1117).margin(2e-3));
  CHECK(w.seed == 9);
  const auto zero = wilson_estimate(0, 50, 1);
  CHECK(zero.p_hat == 0.0);
  CHECK(zero.ci_low == Approx(0.0).margin(1e-12));
  CHECK(zero.ci_high > 0.0);
  const auto all = wilson_estimate(50, 50, 1);
  CHECK(all.ci_high == 1.0);
  CHECK(all.ci_low < 1.0);
  CHECK_THROWS(wilson_estimate(1, 0, 1));
}

TEST_CASE("Monte Carlo error estimate is deterministic and partition-free") {
  const double s2 = 1.0 / (2 * kPi * std::exp(1.0));
  const double delta = exponents::delta_crit(s2) - 0.7;
  const LatticeConfig cfg = make_config(7, 2, 1, delta, s2);
  const auto a = mc_error_probability(cfg, 3000, 77, 1);
  const auto b = mc_error_probability(cfg, 3000, 77, 2);
  const auto c = mc_error_probability(cfg, 3000, 77, 3);
  CHECK(a.upper.errors == b.upper.errors);
  CHECK(b.upper.errors == c.upper.errors);
  CHECK(a.lower.errors == b.lower.errors);
  CHECK(a.out_of_ball == b.out_of_ball);
  // Upper counts out-of-ball trials as errors; lower drops them.
  CHECK(a.upper.errors == a.lower.errors + a.out_of_ball);
  CHECK(a.upper.p_hat >= a.lower.p_hat);
  // A different seed almost surely moves the count.
  const auto d = mc_error_probability(cfg, 3000, 78, 1);
  CHECK(d.upper.errors != a.upper.errors);
  // The estimate lands inside the semi-analytic sandwich band.
  const auto band = p1_p2(cfg);
  CHECK(a.upper.ci_high >= band.p1 / 7 * 0.5);
  CHECK(a.lower.ci_low <= (band.p1 + band.p2) * 2);
}

TEST_CASE("Monte Carlo: vanishing noise leaves only degenerate-book ties") {
  // At sigma^2 -> 0 every competitor at a distinct lattice point scores
  // strictly positive, so the only errors are books whose generator
  // collapses codewords onto the transmitted point (ties count as errors).
  // With q = 7, K = 1 that happens iff G = 0, probability 1/49.
  const LatticeConfig cfg = make_config(7, 2, 1, -1.0, 1e-8);
  const auto r = mc_error_probability(cfg, 500, 3, 1);
  CHECK(r.out_of_ball == 0);
  CHECK(r.upper.errors == r.lower.errors);
  CHECK(r.upper.p_hat == Approx(1.0 / 49.0).margin(0.026));  // 4 binomial sd
}

TEST_CASE("Monte Carlo rejects inadmissible moduli") {
  // q = 3 at this depth violates 2 r* < beta q / 2.
  const double s2 = 1.0 / (2 * kPi * std::exp(1.0));
  const double delta = exponents::delta_crit(s2) - 0.7;
  const LatticeConfig cfg = make_config(3, 2, 1, delta, s2);
  CHECK_THROWS(mc_error_probability(cfg, 100, 1, 1));
}
