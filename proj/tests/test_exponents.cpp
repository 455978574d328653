#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "expforge/exponents.hpp"

using namespace expforge;
using namespace expforge::exponents;
using Catch::Approx;

TEST_CASE("E_0 at rho = 0 is exactly zero") {
  CHECK(gallager_e0(channel::make_bsc(0.1), 0.0) == 0.0);
  CHECK(gallager_e0(channel::make_qsc(5, 0.3), 0.0) == 0.0);
  CHECK_THROWS(gallager_e0(channel::make_bsc(0.1), -0.1));
}

TEST_CASE("E_0 closed forms on the BSC") {
  // Noiseless: E_0(rho) = rho ln 2.
  const channel::Dmc clean = channel::make_bsc(0.0);
  CHECK(gallager_e0(clean, 1.0) == Approx(std::log(2.0)));
  CHECK(gallager_e0(clean, 2.5) == Approx(2.5 * std::log(2.0)));
  // Cutoff rate: E_0(1) = ln 2 - ln(1 + 2 sqrt(p(1-p))).
  for (double p : {0.05, 0.1, 0.2}) {
    const double expect =
        std::log(2.0) - std::log(1.0 + 2.0 * std::sqrt(p * (1 - p)));
    CHECK(gallager_e0(channel::make_bsc(p), 1.0) == Approx(expect));
  }
  // Useless channel: E_0 identically zero.
  CHECK(gallager_e0(channel::make_bsc(0.5), 1.0) == Approx(0.0).margin(1e-15));
  // qsc cutoff: E_0(1) = ln q - 2 ln( sqrt(1-eps) + sqrt(eps (q-1)) ).
  const double eps = 0.2;
  const int q = 5;
  const double root = std::sqrt(1 - eps) + std::sqrt(eps * (q - 1));
  CHECK(gallager_e0(channel::make_qsc(q, eps), 1.0) ==
        Approx(std::log(double(q)) - 2 * std::log(root)));
}

TEST_CASE("E_0 is concave and increasing in rho") {
  const channel::Dmc ch = channel::make_qsc(3, 0.12);
  double prev = gallager_e0(ch, 0.0);
  double prev_inc = 1e9;
  for (int i = 1; i <= 40; ++i) {
    const double rho = i * 0.1;
    const double v = gallager_e0(ch, rho);
    CHECK(v >= prev - 1e-12);              // nondecreasing
    CHECK(v - prev <= prev_inc + 1e-12);   // concave: increments shrink
    prev_inc = v - prev;
    prev = v;
  }
}

TEST_CASE("random-coding exponent has slope -1 below the critical rate") {
  const channel::Dmc ch = channel::make_bsc(0.1);
  const auto at_zero = random_coding_exponent(ch, 0.0);
  const double e01 = gallager_e0(ch, 1.0);
  CHECK(at_zero.exponent == Approx(e01).epsilon(1e-9));
  CHECK(at_zero.rho_star == 1.0);
  const double r_cr = at_zero.r_crit;
  CHECK(r_cr > 0);
  CHECK(r_cr < channel::capacity_uniform(ch));
  for (double R : {0.2 * r_cr, 0.5 * r_cr, 0.9 * r_cr}) {
    const auto res = random_coding_exponent(ch, R);
    CHECK(res.rho_star == 1.0);
    CHECK(res.exponent == Approx(e01 - R).epsilon(1e-8));
  }
}

TEST_CASE("random-coding exponent vanishes at and above capacity") {
  const channel::Dmc ch = channel::make_bsc(0.1);
  const double cap = channel::capacity_uniform(ch);
  CHECK(random_coding_exponent(ch, cap).exponent <= 1e-9);
  CHECK(random_coding_exponent(ch, cap * 1.2).exponent == 0.0);
  // Strictly positive below capacity.
  CHECK(random_coding_exponent(ch, 0.9 * cap).exponent > 0);
}

TEST_CASE("sphere packing meets random coding above the critical rate") {
  const channel::Dmc ch = channel::make_bsc(0.1);
  const double cap = channel::capacity_uniform(ch);
  const double r_cr = random_coding_exponent(ch, cap / 2).r_crit;
  for (int i = 0; i <= 10; ++i) {
    const double R = r_cr + (cap * 0.98 - r_cr) * i / 10.0;
    const auto er = random_coding_exponent(ch, R);
    const auto esp = sphere_packing_exponent(ch, R);
    CHECK_FALSE(esp.unbounded);
    CHECK(esp.exponent == Approx(er.exponent).margin(1e-8));
    CHECK(esp.rho_star <= 1.0 + 1e-5);
  }
  // Below the critical rate the sphere-packing bound is strictly larger.
  const double low = r_cr / 2;
  CHECK(sphere_packing_exponent(ch, low).exponent >
        random_coding_exponent(ch, low).exponent + 1e-6);
  // At very low rates on the BSC the optimizer runs away: E_sp is +inf in
  // the limit, reported via the unbounded flag at the rho cap.
  const auto tiny = sphere_packing_exponent(ch, 1e-6);
  CHECK(tiny.unbounded);
  CHECK_THROWS(sphere_packing_exponent(ch, 0.0));
}

TEST_CASE("Poltyrev landmark densities") {
  constexpr double kTwoPiE = 2 * 3.141592653589793238462643383279502884 *
                             2.718281828459045235360287471352662498;
  const double s2 = 1.0 / kTwoPiE;
  CHECK(delta_star(s2) == Approx(0.0).margin(1e-15));
  CHECK(delta_star(s2 / std::exp(2.0)) == Approx(1.0).epsilon(1e-12));
  // The identity delta_crit = delta_star - ln(2)/2 holds bitwise.
  for (double sigma2 : {s2, 0.5, 1.0, 2.0, 1e-3}) {
    CHECK(delta_crit(sigma2) == delta_star(sigma2) - 0.5 * std::log(2.0));
  }
  CHECK_THROWS(delta_star(0.0));
  CHECK_THROWS(delta_star(-1.0));
}

TEST_CASE("Poltyrev exponent branch values") {
  const double s2 = 0.07;
  const double ds = delta_star(s2);
  const double dc = delta_crit(s2);
  // Zero at and above delta_star.
  CHECK(poltyrev_exponent(ds, s2) == 0.0);
  CHECK(poltyrev_exponent(ds + 0.4, s2) == 0.0);
  // Middle branch: (e^{2u} - 2u - 1)/2 with u = delta_star - delta.
  const double u = 0.2;
  CHECK(poltyrev_exponent(ds - u, s2) ==
        Approx((std::exp(2 * u) - 2 * u - 1) / 2).epsilon(1e-12));
  // Value at the critical density from the middle branch: (1 - ln 2)/2.
  CHECK(poltyrev_exponent(dc, s2) ==
        Approx((1.0 - std::log(2.0)) / 2).epsilon(1e-12));
  // Low branch, continuity-matched: u + ln(e/4)/2; continuous at dc.
  const double step = 1e-9;
  const double above = poltyrev_exponent(dc + step, s2);
  const double below = poltyrev_exponent(dc - step, s2);
  CHECK(below - above == Approx(0.0).margin(1e-6));
  const double u_low = ds - (dc - 0.5);
  CHECK(poltyrev_exponent(dc - 0.5, s2) ==
        Approx(u_low + 0.5 * std::log(std::exp(1.0) / 4)).epsilon(1e-12));
  // The full-constant variant keeps the literal ln(e/4) constant and is
  // therefore discontinuous at dc, jumping down by ln(e/4)/2.
  const double u_step = ds - (dc - step);
  const double full = poltyrev_exponent(dc - step, s2,
                                        PoltyrevVariant::FullConstant);
  CHECK(full == Approx(u_step + std::log(std::exp(1.0) / 4)).epsilon(1e-9));
  CHECK(full < above);  // visibly drops below the middle branch
}

TEST_CASE("slope fit recovers exact exponential decay") {
  std::vector<std::pair<double, double>> pts;
  for (int N = 8; N <= 40; N += 8)
    pts.emplace_back(N, std::exp(-0.37 * N));
  const auto fit = slope_fit(pts);
  CHECK(fit.estimate == Approx(0.37).epsilon(1e-12));
  CHECK(fit.std_error == Approx(0.0).margin(1e-10));
  CHECK(fit.n_range.size() == 5);
  // A constant prefactor only shifts the intercept.
  std::vector<std::pair<double, double>> scaled;
  for (int N = 8; N <= 40; N += 8)
    scaled.emplace_back(N, 0.02 * std::exp(-0.37 * N));
  CHECK(slope_fit(scaled).estimate == Approx(0.37).epsilon(1e-12));
}

TEST_CASE("slope fit on noisy synthetic data stays near truth") {
  // Deterministic "noise" from a fixed engine; the fitted slope must land
  // within a few standard errors of the generating exponent.
  std::mt19937_64 eng(2026);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::pair<double, double>> pts;
  for (int N = 10; N <= 80; N += 10)
    pts.emplace_back(N, std::exp(-0.25 * N + noise(eng)));
  const auto fit = slope_fit(pts);
  CHECK(fit.std_error > 0);
  CHECK(std::abs(fit.estimate - 0.25) < 4 * fit.std_error + 1e-3);
}

TEST_CASE("slope fit input validation") {
  std::vector<std::pair<double, double>> two{{8, 0.1}, {16, 0.01}};
  CHECK_THROWS(slope_fit(two));
  std::vector<std::pair<double, double>> bad{{8, 0.1}, {16, 0.0}, {24, 0.01}};
  CHECK_THROWS(slope_fit(bad));
  std::vector<std::pair<double, double>> one_p{{8, 0.1}, {16, 1.0}, {24, 0.01}};
  CHECK_THROWS(slope_fit(one_p));
  std::vector<std::pair<double, double>> same_n{{8, 0.1}, {8, 0.2}, {8, 0.3}};
  CHECK_THROWS(slope_fit(same_n));
}

TEST_CASE("curve tabulation mirrors pointwise evaluation") {
  const channel::Dmc ch = channel::make_bsc(0.08);
  const std::vector<double> rates{0.05, 0.15, 0.25};
  const auto rc = tabulate_random_coding(ch, rates);
  const auto sp = tabulate_sphere_packing(ch, rates);
  REQUIRE(rc.x.size() == 3);
  REQUIRE(sp.x.size() == 3);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    CHECK(rc.exponent[i] ==
          Approx(random_coding_exponent(ch, rates[i]).exponent));
    CHECK(sp.exponent[i] ==
          Approx(sphere_packing_exponent(ch, rates[i]).exponent));
    CHECK(sp.exponent[i] >= rc.exponent[i] - 1e-10);
  }
}
