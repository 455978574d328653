#pragma once

// Construction-A lattice ensemble over AWGN: scaling and density
// bookkeeping, centered-cube remapping, admissibility of the modulus,
// point enumeration in balls, the alpha / P1 / P2 quantities via radial
// quadrature, and a seeded Monte Carlo estimator for the average error
// probability of the zero'th lattice point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "expforge/ensemble.hpp"
#include "expforge/exponents.hpp"
#include "expforge/fq.hpp"
#include "expforge/util.hpp"

namespace expforge::lattice {

constexpr double kPi = 3.141592653589793238462643383279502884;

// V_N = pi^(N/2) / Gamma(N/2 + 1).
inline double unit_ball_volume(int N) {
  if (N < 1) throw std::invalid_argument("dimension must be >= 1");
  return std::exp(0.5 * N * std::log(kPi) - std::lgamma(0.5 * N + 1.0));
}

// Effective-sphere radius at density e^{N delta} (asymptotic-in-q form):
// r* = e^{-delta} V_N^{-1/N}.
inline double r_star(int N, double delta) {
  return std::exp(-delta) * std::pow(unit_ball_volume(N), -1.0 / N);
}

// beta = q^{(K-N)/N} gamma^{-1/N}, the grid scale that realizes density
// gamma with q^K codewords tiled modulo (beta q)^N.
inline double derive_beta(const ensemble::CodeEnsembleSpec& spec,
                          double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
  return std::pow(static_cast<double>(spec.q),
                  static_cast<double>(spec.K - spec.N) / spec.N) *
         std::pow(gamma, -1.0 / spec.N);
}

// Lattice experiment configuration; the underlying code ensemble always
// has v = 0 (the offset would only translate the lattice).
struct LatticeConfig {
  ensemble::CodeEnsembleSpec spec;
  double delta;   // normalized log density, nats per dimension
  double gamma;   // density, points per unit volume: gamma = e^{N delta}
  double sigma2;  // AWGN variance per dimension
  double beta;    // derived scale
};

inline LatticeConfig make_config(int q, int N, int K, double delta,
                                 double sigma2) {
  if (!(sigma2 > 0)) throw std::invalid_argument("sigma2 must be > 0");
  LatticeConfig cfg{ensemble::CodeEnsembleSpec(q, N, K), delta,
                    std::exp(N * delta), sigma2, 0.0};
  cfg.beta = derive_beta(cfg.spec, cfg.gamma);
  return cfg;
}

inline LatticeConfig make_config_from_gamma(int q, int N, int K, double gamma,
                                            double sigma2) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
  return make_config(q, N, K, std::log(gamma) / N, sigma2);
}

// Map [0, q) onto the centered cube (-q/2, q/2]: subtract q from every
// coordinate strictly exceeding q/2 (so q/2 itself stays put for even q).
inline std::vector<int> remap_centered(std::vector<int> coords, int q) {
  fq::check_modulus(q);
  for (int& c : coords) {
    if (c < 0 || c >= q)
      throw std::invalid_argument("remap: coordinate out of [0, q)");
    if (2 * c > q) c -= q;
  }
  return coords;
}

inline std::vector<int> remap_uncentered(std::vector<int> coords, int q) {
  fq::check_modulus(q);
  for (int& c : coords) {
    if (2 * c <= -q || 2 * c > q)
      throw std::invalid_argument("remap: coordinate out of (-q/2, q/2]");
    if (c < 0) c += q;
  }
  return coords;
}

// Smallest prime q strictly exceeding (4 r*)^{N/K} gamma^{1/K}; such a q
// guarantees every lattice point of norm <= 2 r* is a centered-cube
// codeword (no wraparound inside the decoding ball).
inline int min_admissible_q(double r_star_val, int N, int K, double gamma) {
  if (!(r_star_val > 0)) throw std::invalid_argument("r* must be > 0");
  if (N < 1 || K < 1 || K > N) throw std::invalid_argument("need 1 <= K <= N");
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
  const double bound = std::pow(4.0 * r_star_val,
                                static_cast<double>(N) / K) *
                       std::pow(gamma, 1.0 / K);
  if (!(bound < 1e9))
    throw std::invalid_argument("admissible q does not fit in int");
  int q = std::max(2, static_cast<int>(std::floor(bound)) + 1);
  while (!fq::is_prime(q)) ++q;
  return q;
}

struct window_empty_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// K = ceil(R N); the small negative nudge keeps R*N values that are
// mathematically integral (e.g. R = 1/10, N = 10) from rounding up.
inline int rate_dimension(int N, double R) {
  if (!(R > 0) || R > 1) throw std::invalid_argument("rate must be in (0, 1]");
  return static_cast<int>(std::ceil(R * N - 1e-9));
}

// A prime q with 0.5 R^-1 ln N + slack <= ln q <= ln_cap (default sub-
// linear cap N / ln N).  Throws window_empty_error when no prime fits,
// signalling the caller to raise N.
inline int q_schedule(int N, double R, double slack = 0.0,
                      std::optional<double> ln_cap = std::nullopt) {
  if (N < 2) throw std::invalid_argument("q_schedule: need N >= 2");
  if (!(R > 0) || R > 1) throw std::invalid_argument("rate must be in (0, 1]");
  const double lo = 0.5 / R * std::log(static_cast<double>(N)) + slack;
  const double cap = ln_cap ? *ln_cap : N / std::log(static_cast<double>(N));
  if (!(std::exp(lo) < 1e9))
    throw std::invalid_argument("q_schedule: window lower edge overflows int");
  int q = std::max(2, static_cast<int>(std::ceil(std::exp(lo))));
  while (std::log(static_cast<double>(q)) < lo) ++q;
  while (!fq::is_prime(q)) ++q;
  if (std::log(static_cast<double>(q)) > cap)
    throw window_empty_error(
        "q_schedule: no prime in the window at N = " + std::to_string(N) +
        " (raise N or the cap)");
  return q;
}

// Smallest prime satisfying both the schedule's lower edge and the
// decoding-ball admissibility at NLD delta; still subject to the cap.
inline int choose_q(int N, double R, double delta, double slack = 0.0,
                    std::optional<double> ln_cap = std::nullopt) {
  const int K = rate_dimension(N, R);
  const int qs = q_schedule(N, R, slack, ln_cap);
  const int qa =
      min_admissible_q(r_star(N, delta), N, K, std::exp(N * delta));
  const int q = std::max(qs, qa);
  const double cap = ln_cap ? *ln_cap : N / std::log(static_cast<double>(N));
  if (std::log(static_cast<double>(q)) > cap)
    throw window_empty_error(
        "choose_q: admissible prime exceeds the schedule cap at N = " +
        std::to_string(N));
  return q;
}

// Squared-norm histogram (integer units) of the centered coordinate grid
// {remap of [0,q)}^N, built by N-fold convolution of the per-coordinate
// square counts.  Counts fit a double exactly for every feasible (q, N).
inline std::map<std::int64_t, double> centered_norm_histogram(int q, int N) {
  fq::check_modulus(q);
  if (N < 1) throw std::invalid_argument("dimension must be >= 1");
  std::map<std::int64_t, double> coord;
  for (int c = 0; c < q; ++c) {
    const std::int64_t w = 2 * c > q ? c - q : c;
    coord[w * w] += 1.0;
  }
  std::map<std::int64_t, double> hist{{0, 1.0}};
  for (int j = 0; j < N; ++j) {
    std::map<std::int64_t, double> next;
    for (const auto& [s, cnt] : hist)
      for (const auto& [c2, ccnt] : coord) next[s + c2] += cnt * ccnt;
    hist = std::move(next);
  }
  return hist;
}

struct LatticeAlpha {
  std::uint64_t count;  // centered grid points in Ball(z, ||z||), exact
  double value;         // q^-N * count
};

// Exact count of centered beta-scaled grid points inside the closed ball
// of radius ||z|| around z, by depth-first search with partial-squared-
// norm pruning.  Budget counts visited (dimension, value) nodes.
inline LatticeAlpha lattice_alpha(const std::vector<double>& z, double beta,
                                  int q, std::uint64_t budget = (1ULL << 24)) {
  fq::check_modulus(q);
  if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
  const int N = static_cast<int>(z.size());
  if (N < 1 || N > 12)
    throw std::invalid_argument("lattice_alpha: need 1 <= N <= 12");
  double target = 0;
  for (double zj : z) target += zj * zj;

  std::vector<double> centered(q);
  for (int c = 0; c < q; ++c) centered[c] = 2 * c > q ? c - q : c;

  const std::uint64_t bud = effective_budget(budget);
  std::uint64_t steps = 0, count = 0;
  // Iterative DFS: state is the digit choice per dimension.
  std::vector<int> digit(static_cast<std::size_t>(N), -1);
  std::vector<double> partial(static_cast<std::size_t>(N) + 1, 0.0);
  int depth = 0;
  while (depth >= 0) {
    if (++digit[depth] == q) {
      digit[depth--] = -1;
      continue;
    }
    if (++steps > bud) throw budget_error(steps, bud);
    const double d = z[depth] - beta * centered[digit[depth]];
    const double p = partial[depth] + d * d;
    if (p > target) continue;
    if (depth == N - 1) {
      ++count;
      continue;
    }
    partial[depth + 1] = p;
    ++depth;
  }
  return {count, static_cast<double>(count) / std::pow(q, N)};
}

struct LatticePoint {
  std::vector<double> coords;  // beta-scaled centered coordinates
  std::uint64_t message;       // index of the generating message
};

// All lattice points of the (v = 0) codebook inside the closed ball, by
// enumeration of the centered code cube.  Valid only when the ball cannot
// reach any point outside the cube: every non-cube lattice point has some
// coordinate of magnitude >= beta q / 2, hence norm >= beta q / 2.
inline std::vector<LatticePoint> points_in_ball(
    const ensemble::Codebook& book, double beta,
    const std::vector<double>& center, double radius,
    std::uint64_t budget = (1ULL << 24)) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
  if (radius < 0) throw std::invalid_argument("radius must be >= 0");
  const auto& spec = book.spec;
  if (center.size() != static_cast<std::size_t>(spec.N))
    throw std::invalid_argument("center dimension mismatch");
  for (int vi : book.v.e)
    if (vi != 0)
      throw std::invalid_argument("lattice codebook must have v = 0");
  double c_norm2 = 0;
  for (double c : center) c_norm2 += c * c;
  if (std::sqrt(c_norm2) + radius >= beta * spec.q / 2.0)
    throw std::invalid_argument(
        "q inadmissible for the requested ball (cube wraparound possible)");
  const std::uint64_t M = spec.message_count();
  require_budget(M, effective_budget(budget));

  std::vector<LatticePoint> out;
  const double r2 = radius * radius;
  for (std::uint64_t m = 0; m < M; ++m) {
    const fq::FqVec cw = ensemble::encode(book, m);
    double d2 = 0;
    std::vector<double> coords(static_cast<std::size_t>(spec.N));
    for (int j = 0; j < spec.N; ++j) {
      const int w = 2 * cw.e[j] > spec.q ? cw.e[j] - spec.q : cw.e[j];
      coords[j] = beta * w;
      const double d = coords[j] - center[j];
      d2 += d * d;
    }
    if (d2 <= r2) out.push_back({std::move(coords), m});
  }
  return out;
}

namespace detail {
// Fraction of the sphere of radius rho (around the origin) lying in the
// half-space <t, u> >= L/2 for a unit direction u: the solid angle of the
// cap with cos(theta) >= L / (2 rho).  This is the conditional pairwise
// error probability toward a lattice point of norm L given ||z|| = rho.
inline double cap_fraction(int N, double L, double rho) {
  if (!(rho > 0) || L > 2 * rho) return 0.0;
  if (N == 1) return 0.5;
  const double t = L / (2 * rho);
  return 0.5 * boost::math::ibeta(0.5 * (N - 1), 0.5, 1.0 - t * t);
}

inline double chi_pdf(int N, double sigma2, double rho) {
  // density of ||z|| for z ~ N(0, sigma2 I_N)
  const double log_pdf = (N - 1) * std::log(rho) - rho * rho / (2 * sigma2) -
                         std::lgamma(0.5 * N) - (0.5 * N - 1) * std::log(2.0) -
                         0.5 * N * std::log(sigma2);
  return std::exp(log_pdf);
}
}  // namespace detail

// E[alpha(z) | ||z|| = rho]: average over the isotropic direction of z of
// the grid-point count in Ball(z, ||z||), one cap term per squared-norm
// shell of the centered grid (the origin term is always inside).
inline double mean_alpha_on_sphere(const LatticeConfig& cfg, double rho,
                                   const std::map<std::int64_t, double>& hist) {
  const int N = cfg.spec.N;
  double sum = 0;
  for (const auto& [n, cnt] : hist) {
    if (n == 0) {
      sum += cnt;
      continue;
    }
    const double L = cfg.beta * std::sqrt(static_cast<double>(n));
    if (L > 2 * rho) break;  // hist is norm-sorted; later shells inactive
    sum += cnt * detail::cap_fraction(N, L, rho);
  }
  return sum / std::pow(cfg.spec.q, N);
}

struct P1P2 {
  double p1;      // (M-1) * integral_{||z|| <= r*} alpha(z) f(z) dz
  double p2;      // Pr(||z|| > r*)
  double r_star;  // the radius used
};

// Semi-analytic evaluation of the truncated-union sandwich ingredients:
// P1 by radial quadrature of E[alpha | rho] against the chi density
// (piecewise between cap-activation radii), P2 as the exact chi-square
// upper tail.
inline P1P2 p1_p2(const LatticeConfig& cfg) {
  const int N = cfg.spec.N;
  if (N > 12) throw std::invalid_argument("p1_p2: need N <= 12");
  const double rs = r_star(N, cfg.delta);
  const auto hist = centered_norm_histogram(cfg.spec.q, N);

  // Integrand kinks where a new shell activates (rho = L/2); integrate
  // smoothly between consecutive activation radii.
  std::vector<double> cuts{0.0, rs};
  for (const auto& [n, cnt] : hist) {
    if (n == 0) continue;
    const double a = cfg.beta * std::sqrt(static_cast<double>(n)) / 2.0;
    if (a < rs) cuts.push_back(a);
  }
  std::sort(cuts.begin(), cuts.end());

  auto integrand = [&](double rho) {
    return mean_alpha_on_sphere(cfg, rho, hist) *
           detail::chi_pdf(N, cfg.sigma2, rho);
  };
  double integral = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-300) continue;
    integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, cuts[i], cuts[i + 1], 12, 1e-11);
  }
  const double m_minus_1 = std::pow(cfg.spec.q, cfg.spec.K) - 1.0;
  const double p2 =
      boost::math::gamma_q(0.5 * N, rs * rs / (2 * cfg.sigma2));
  return {m_minus_1 * integral, p2, rs};
}

// Exact finite-q r*: the radius (on the radial axis, by symmetry any
// axis) where the truncated union bound (M-1) alpha(r e_1) crosses 1,
// found by bisection on the nondecreasing step function.
inline double exact_r_star(const LatticeConfig& cfg,
                           std::uint64_t budget = (1ULL << 24)) {
  const int N = cfg.spec.N;
  const double m_minus_1 = std::pow(cfg.spec.q, cfg.spec.K) - 1.0;
  auto excess = [&](double r) {
    std::vector<double> z(static_cast<std::size_t>(N), 0.0);
    z[0] = r;
    return m_minus_1 * lattice_alpha(z, cfg.beta, cfg.spec.q, budget).value -
           1.0;
  };
  double lo = 0.0;
  double hi = cfg.beta * cfg.spec.q * std::sqrt(static_cast<double>(N));
  if (excess(lo) >= 0) return lo;
  for (int it = 0; it < 80; ++it) {
    const double mid = (lo + hi) / 2;
    (excess(mid) < 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

struct McEstimate {
  double p_hat;
  double ci_low, ci_high;  // Wilson 95% interval
  std::uint64_t trials;
  std::uint64_t errors;
  std::uint64_t seed;
};

inline McEstimate wilson_estimate(std::uint64_t errors, std::uint64_t trials,
                                  std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("wilson: trials must be > 0");
  const double z = 1.959963984540054;  // two-sided 95%
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half),
          trials, errors, seed};
}

struct McResult {
  McEstimate upper;  // trials with ||z|| > r* counted as errors
  McEstimate lower;  // trials with ||z|| > r* counted as successes
  std::uint64_t out_of_ball;
  double r_star;
};

// Seeded Monte Carlo for the average error probability of the zero'th
// lattice point: per trial draw G uniform (v = 0) and z ~ N(0, sigma2 I),
// declare error when some nonzero message's lattice point is at least as
// close to z as the origin.  Out-of-ball trials realize the truncation
// sandwich both ways.  Per-trial RNG streams make the estimate
// independent of the thread partition.
inline McResult mc_error_probability(const LatticeConfig& cfg,
                                     std::uint64_t trials, std::uint64_t seed,
                                     int threads = 0) {
  if (trials == 0) throw std::invalid_argument("mc: trials must be > 0");
  const int N = cfg.spec.N, K = cfg.spec.K, q = cfg.spec.q;
  const double rs = r_star(N, cfg.delta);
  if (!(2 * rs < cfg.beta * q / 2.0))
    throw std::invalid_argument(
        "inadmissible q: decoding ball reaches outside the centered cube");
  const std::uint64_t M = cfg.spec.message_count();

  std::vector<double> centered(static_cast<std::size_t>(q));
  for (int c = 0; c < q; ++c) centered[c] = 2 * c > q ? c - q : c;

  auto run_range = [&](std::uint64_t t0, std::uint64_t t1,
                       std::uint64_t& err_in, std::uint64_t& out_ball) {
    std::vector<int> G(static_cast<std::size_t>(K) * N);
    std::vector<double> z(static_cast<std::size_t>(N));
    std::vector<double> table(static_cast<std::size_t>(N) * q);
    std::vector<int> u(static_cast<std::size_t>(K)), cw(static_cast<std::size_t>(N));
    for (std::uint64_t t = t0; t < t1; ++t) {
      auto eng = trial_engine(seed, t);
      for (int& g : G) g = static_cast<int>(uniform_below(eng, q));
      double z2 = 0;
      for (int j = 0; j < N; ++j) {
        z[j] = standard_normal(eng) * std::sqrt(cfg.sigma2);
        z2 += z[j] * z[j];
      }
      if (z2 > rs * rs) {
        ++out_ball;
        continue;
      }
      // score(w) = sum_j bw_j (bw_j - 2 z_j); error iff score <= 0
      for (int j = 0; j < N; ++j)
        for (int c = 0; c < q; ++c) {
          const double bw = cfg.beta * centered[c];
          table[static_cast<std::size_t>(j) * q + c] = bw * (bw - 2 * z[j]);
        }
      std::fill(u.begin(), u.end(), 0);
      std::fill(cw.begin(), cw.end(), 0);
      bool err = false;
      for (std::uint64_t m = 1; m < M && !err; ++m) {
        // odometer step: adding row k once per visited digit keeps
        // cw = u G (a full wrap adds the row q times, a no-op mod q)
        for (int k = 0; k < K; ++k) {
          for (int j = 0; j < N; ++j) {
            cw[j] += G[static_cast<std::size_t>(k) * N + j];
            if (cw[j] >= q) cw[j] -= q;
          }
          if (++u[k] < q) break;
          u[k] = 0;
        }
        double score = 0;
        for (int j = 0; j < N; ++j)
          score += table[static_cast<std::size_t>(j) * q + cw[j]];
        err = score <= 0;
      }
      if (err) ++err_in;
    }
  };

  int n_threads = threads > 0
                      ? threads
                      : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(n_threads), trials));
  std::vector<std::uint64_t> err_in(static_cast<std::size_t>(n_threads), 0);
  std::vector<std::uint64_t> out_ball(static_cast<std::size_t>(n_threads), 0);
  if (n_threads == 1) {
    run_range(0, trials, err_in[0], out_ball[0]);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) {
      const std::uint64_t t0 = trials * i / n_threads;
      const std::uint64_t t1 = trials * (i + 1) / n_threads;
      pool.emplace_back(run_range, t0, t1, std::ref(err_in[i]),
                        std::ref(out_ball[i]));
    }
    for (auto& th : pool) th.join();
  }
  std::uint64_t in_errors = 0, outside = 0;
  for (int i = 0; i < n_threads; ++i) {
    in_errors += err_in[i];
    outside += out_ball[i];
  }
  return {wilson_estimate(in_errors + outside, trials, seed),
          wilson_estimate(in_errors, trials, seed), outside, rs};
}

}  // namespace expforge::lattice
