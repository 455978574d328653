#pragma once

// Error exponents with the uniform input distribution: Gallager's E_0,
// the random-coding and sphere-packing exponents with their optimizing
// rho, the critical rate, the Poltyrev exponent for unbounded lattices,
// and least-squares slope estimation from finite-N probability data.
// Everything internal is in nats.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "expforge/channel.hpp"

namespace expforge::exponents {

// E_0(rho) = -ln sum_y ( sum_x q^-1 P(y|x)^(1/(1+rho)) )^(1+rho).
// rho = 0 collapses to -ln(1) and is returned as exact zero.
inline double gallager_e0(const channel::Dmc& ch, double rho) {
  if (rho < 0) throw std::invalid_argument("gallager_e0: rho must be >= 0");
  if (rho == 0) return 0.0;
  const double s = 1.0 / (1.0 + rho);
  double sum = 0;
  for (int y = 0; y < ch.y_size; ++y) {
    double inner = 0;
    for (int x = 0; x < ch.q; ++x) inner += std::pow(ch.at(x, y), s) / ch.q;
    sum += std::pow(inner, 1.0 + rho);
  }
  return -std::log(sum);
}

namespace detail {
// Maximize a concave function on [lo, hi]: coarse grid scan to bracket,
// golden-section refinement, then snap to an endpoint when the endpoint
// value is at least as good (so monotone maximands report exact boundary
// optimizers).
template <class F>
inline std::pair<double, double> concave_max(F&& f, double lo, double hi,
                                             double tol = 1e-10) {
  constexpr int kGrid = 33;
  double best_x = lo, best_v = f(lo);
  int best_i = 0;
  for (int i = 1; i < kGrid; ++i) {
    const double x = lo + (hi - lo) * i / (kGrid - 1);
    const double v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
      best_i = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_i - 1) / (kGrid - 1);
  double b = lo + (hi - lo) * std::min(kGrid - 1, best_i + 1) / (kGrid - 1);

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double x_star = (a + b) / 2, v_star = f(x_star);
  if (best_v > v_star) {
    x_star = best_x;
    v_star = best_v;
  }
  const double v_hi = f(hi), v_lo = f(lo);
  if (v_hi >= v_star) return {hi, v_hi};
  if (v_lo >= v_star) return {lo, v_lo};
  return {x_star, v_star};
}
}  // namespace detail

struct RandomCodingResult {
  double exponent;  // E_r(R), nats
  double rho_star;  // optimizer in [0, 1]; exactly 1 below the critical rate
  double r_crit;    // R_cr = dE_0/drho at rho = 1
};

// E_r(R) = max_{0 <= rho <= 1} E_0(rho) - rho R.
inline RandomCodingResult random_coding_exponent(const channel::Dmc& ch,
                                                 double R) {
  if (R < 0) throw std::invalid_argument("rate must be >= 0");
  auto maximand = [&](double rho) { return gallager_e0(ch, rho) - rho * R; };
  auto [rho_star, val] = detail::concave_max(maximand, 0.0, 1.0);
  const double h = 1e-6;
  const double r_crit =
      (gallager_e0(ch, 1.0 + h) - gallager_e0(ch, 1.0 - h)) / (2 * h);
  return {std::max(0.0, val), rho_star, r_crit};
}

struct SpherePackingResult {
  double exponent;  // E_sp(R) evaluated at the capped optimizer
  double rho_star;
  bool unbounded;  // maximand still increasing at the rho cap
};

// E_sp(R) = sup_{rho >= 0} E_0(rho) - rho R, searched on [0, rho_cap].
inline SpherePackingResult sphere_packing_exponent(const channel::Dmc& ch,
                                                   double R,
                                                   double rho_cap = 64.0) {
  if (R <= 0) throw std::invalid_argument("rate must be > 0");
  auto maximand = [&](double rho) { return gallager_e0(ch, rho) - rho * R; };
  auto [rho_star, val] = detail::concave_max(maximand, 0.0, rho_cap);
  return {std::max(0.0, val), rho_star, rho_star >= rho_cap};
}

// Normalized log density landmarks of the AWGN Poltyrev setting.
// delta_crit is defined as delta_star - ln(2)/2, so the identity
// delta_crit == delta_star - 0.5*ln 2 holds bitwise for every sigma2.
inline double delta_star(double sigma2) {
  if (sigma2 <= 0) throw std::invalid_argument("sigma2 must be > 0");
  constexpr double two_pi_e = 2 * 3.141592653589793238462643383279502884 *
                              2.718281828459045235360287471352662498;
  return 0.5 * std::log(1.0 / (two_pi_e * sigma2));
}

inline double delta_crit(double sigma2) {
  return delta_star(sigma2) - 0.5 * std::log(2.0);
}

// The full low-density branch constant ln(e/4) is discontinuous at
// delta_crit; matching the straight-line branch to the curved branch at
// delta_crit instead requires the constant (1 - 2 ln 2)/2 = ln(e/4)/2.
// Both are kept selectable; the continuity-matched form is the default.
enum class PoltyrevVariant { ContinuityMatched, FullConstant };

inline double poltyrev_exponent(
    double delta, double sigma2,
    PoltyrevVariant variant = PoltyrevVariant::ContinuityMatched) {
  const double ds = delta_star(sigma2);
  const double dc = delta_crit(sigma2);
  if (delta >= ds) return 0.0;
  const double u = ds - delta;
  if (delta >= dc) return (std::exp(2 * u) - 2 * u - 1) / 2;
  const double e_over_4 = std::exp(1.0) / 4.0;
  if (variant == PoltyrevVariant::FullConstant) return u + std::log(e_over_4);
  return u + 0.5 * std::log(e_over_4);
}

struct SlopeFit {
  double estimate;   // nats per unit N
  double std_error;  // standard error of the slope from residuals
  std::vector<double> n_range;
};

// Least-squares slope of -ln p against N.  The intercept absorbs any
// constant prefactor, so p(N) = A e^{-cN} recovers c for any A.
inline SlopeFit slope_fit(const std::vector<std::pair<double, double>>& data) {
  if (data.size() < 3)
    throw std::invalid_argument("slope_fit: need at least 3 points");
  SlopeFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(data.size());
  for (const auto& [N, p] : data) {
    if (!(p > 0) || !(p < 1))
      throw std::invalid_argument("slope_fit: probabilities must be in (0, 1)");
    const double y = -std::log(p);
    sx += N;
    sy += y;
    sxx += N * N;
    sxy += N * y;
    fit.n_range.push_back(N);
  }
  const double sxx_c = sxx - sx * sx / n;
  if (sxx_c <= 0) throw std::invalid_argument("slope_fit: N values coincide");
  const double slope = (sxy - sx * sy / n) / sxx_c;
  const double intercept = (sy - slope * sx) / n;
  double ssr = 0;
  for (const auto& [N, p] : data) {
    const double r = -std::log(p) - (intercept + slope * N);
    ssr += r * r;
  }
  fit.estimate = slope;
  fit.std_error =
      data.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx_c) : 0.0;
  return fit;
}

// Tabulated curve for CSV export: x is rate (or NLD), one exponent value
// and the optimizing rho per point.
struct ExponentCurve {
  std::vector<double> x;
  std::vector<double> exponent;
  std::vector<double> rho;
};

inline ExponentCurve tabulate_random_coding(const channel::Dmc& ch,
                                            const std::vector<double>& rates) {
  ExponentCurve c;
  for (double R : rates) {
    const auto r = random_coding_exponent(ch, R);
    c.x.push_back(R);
    c.exponent.push_back(r.exponent);
    c.rho.push_back(r.rho_star);
  }
  return c;
}

inline ExponentCurve tabulate_sphere_packing(const channel::Dmc& ch,
                                             const std::vector<double>& rates) {
  ExponentCurve c;
  for (double R : rates) {
    const auto r = sphere_packing_exponent(ch, R);
    c.x.push_back(R);
    c.exponent.push_back(r.exponent);
    c.rho.push_back(r.rho_star);
  }
  return c;
}

}  // namespace expforge::exponents
