#pragma once

// Independent ground truth by exhaustive enumeration in exact rational
// arithmetic.  Everything here recomputes ensemble probabilities from the
// definition (averaging over all (G, v) pairs, or over all i.i.d.
// codeword tuples), so it shares no derivation steps with the closed-form
// laws and bounds it is used to check.
//
// Channels must be given with exact rational entries; results are exact
// rationals.  Budgets are in elementary-step estimates and can be raised
// via EXPFORGE_BUDGET.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "expforge/bounds.hpp"
#include "expforge/channel.hpp"
#include "expforge/ensemble.hpp"
#include "expforge/fq.hpp"
#include "expforge/util.hpp"

namespace expforge::oracle {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using ExactDmc = channel::BasicDmc<Rational>;

struct ExactResult {
  Rational value;
  double to_double() const { return static_cast<double>(value); }
};

namespace detail {
inline std::uint64_t steps_or_throw(std::optional<std::uint64_t> a,
                                    std::uint64_t mult, std::uint64_t budget) {
  if (!a) throw budget_error(UINT64_MAX, budget);
  if (mult != 0 && *a > UINT64_MAX / mult) throw budget_error(UINT64_MAX, budget);
  const std::uint64_t est = *a * mult;
  if (est > budget) throw budget_error(est, budget);
  return est;
}

// All q^KN generator matrices with v chosen so that encode(m) = x_m; the
// conditional ensemble given one pinned codeword.
template <class Fn>
inline void for_each_book_with_pinned_codeword(
    const ensemble::CodeEnsembleSpec& spec, std::uint64_t m,
    const fq::FqVec& x_m, Fn&& fn) {
  const std::uint64_t g_count =
      *checked_pow(static_cast<std::uint64_t>(spec.q),
                   static_cast<unsigned>(spec.K * spec.N));
  const fq::FqVec u_m = ensemble::message_vector(spec, m);
  for (std::uint64_t gi = 0; gi < g_count; ++gi) {
    std::uint64_t idx = gi;
    std::vector<int> g(static_cast<std::size_t>(spec.K) * spec.N);
    for (auto& digit : g) {
      digit = static_cast<int>(idx % spec.q);
      idx /= static_cast<std::uint64_t>(spec.q);
    }
    fq::FqMat G(spec.q, spec.K, spec.N, std::move(g));
    const fq::FqVec v = fq::vec_sub(x_m, fq::mat_mul(u_m, G));
    fn(ensemble::Codebook(spec, std::move(G), v));
  }
}
}  // namespace detail

// Pr over the conditional ensemble (encode(m) = x_m fixed) that at least
// one competitor ties or beats x_m given y: the exact union probability
// the sandwich bounds enclose.
inline ExactResult exact_union_probability(
    const ensemble::CodeEnsembleSpec& spec, const ExactDmc& ch,
    std::uint64_t m, const fq::FqVec& x_m, const std::vector<int>& y,
    std::uint64_t budget = (1ULL << 28)) {
  channel::check_word(ch, x_m, y);
  const std::uint64_t M = spec.message_count();
  if (m >= M) throw std::invalid_argument("message index out of range");
  const std::uint64_t bud = effective_budget(budget);
  detail::steps_or_throw(checked_pow(static_cast<std::uint64_t>(spec.q),
                                     static_cast<unsigned>(spec.K * spec.N)),
                         M * static_cast<std::uint64_t>(spec.N), bud);

  const Rational ref = channel::likelihood(ch, x_m, y);
  BigInt bad = 0, total = 0;
  detail::for_each_book_with_pinned_codeword(
      spec, m, x_m, [&](const ensemble::Codebook& book) {
        ++total;
        for (std::uint64_t mp = 0; mp < M; ++mp) {
          if (mp == m) continue;
          if (channel::likelihood(ch, ensemble::encode(book, mp), y) >= ref) {
            ++bad;
            return;
          }
        }
      });
  return {Rational(bad) / Rational(total)};
}

// Pr over the conditional ensemble that BOTH m' and m'' tie or beat x_m
// given y.  Equals alpha^2 exactly when u_m is outside
// span*{u_m', u_m''}.
inline ExactResult exact_pairwise_intersection(
    const ensemble::CodeEnsembleSpec& spec, const ExactDmc& ch,
    std::uint64_t m, std::uint64_t mp, std::uint64_t mpp,
    const fq::FqVec& x_m, const std::vector<int>& y,
    std::uint64_t budget = (1ULL << 28)) {
  channel::check_word(ch, x_m, y);
  const std::uint64_t M = spec.message_count();
  if (m >= M || mp >= M || mpp >= M || m == mp || m == mpp || mp == mpp)
    throw std::invalid_argument("need three distinct message indices");
  const std::uint64_t bud = effective_budget(budget);
  detail::steps_or_throw(checked_pow(static_cast<std::uint64_t>(spec.q),
                                     static_cast<unsigned>(spec.K * spec.N)),
                         2ULL * static_cast<std::uint64_t>(spec.N), bud);

  const Rational ref = channel::likelihood(ch, x_m, y);
  BigInt both = 0, total = 0;
  detail::for_each_book_with_pinned_codeword(
      spec, m, x_m, [&](const ensemble::Codebook& book) {
        ++total;
        if (channel::likelihood(ch, ensemble::encode(book, mp), y) >= ref &&
            channel::likelihood(ch, ensemble::encode(book, mpp), y) >= ref)
          ++both;
      });
  return {Rational(both) / Rational(total)};
}

// Ensemble-average ML error probability for transmitted message m, ties
// counted as errors, averaged over all (G, v) and all channel outputs.
inline ExactResult exact_average_error(const ensemble::CodeEnsembleSpec& spec,
                                       const ExactDmc& ch, std::uint64_t m,
                                       std::uint64_t budget = (1ULL << 28)) {
  if (ch.q != spec.q) throw std::invalid_argument("modulus mismatch");
  const std::uint64_t M = spec.message_count();
  if (m >= M) throw std::invalid_argument("message index out of range");
  const std::uint64_t bud = effective_budget(budget);
  const auto y_words = checked_pow(static_cast<std::uint64_t>(ch.y_size),
                                   static_cast<unsigned>(spec.N));
  if (!y_words) throw budget_error(UINT64_MAX, bud);
  detail::steps_or_throw(spec.codebook_count(),
                         *y_words * M * static_cast<std::uint64_t>(spec.N),
                         bud);

  ensemble::CodebookEnumeration books(spec, bud);
  Rational sum = 0;
  std::vector<int> y(static_cast<std::size_t>(spec.N), 0);
  for (std::uint64_t bi = 0; bi < books.size(); ++bi) {
    const ensemble::Codebook book = books.at(bi);
    std::vector<fq::FqVec> words;
    words.reserve(M);
    for (std::uint64_t mm = 0; mm < M; ++mm)
      words.push_back(ensemble::encode(book, mm));
    std::fill(y.begin(), y.end(), 0);
    for (std::uint64_t yi = 0; yi < *y_words; ++yi) {
      const Rational ref = channel::likelihood(ch, words[m], y);
      bool err = false;
      for (std::uint64_t mp = 0; mp < M && !err; ++mp) {
        if (mp == m) continue;
        err = channel::likelihood(ch, words[mp], y) >= ref;
      }
      if (err) sum += ref;
      // advance y odometer
      std::size_t pos = 0;
      while (pos < y.size() && ++y[pos] == ch.y_size) y[pos++] = 0;
    }
  }
  return {sum / Rational(books.size())};
}

// Empirical conditional law of codeword `target` under exhaustive
// enumeration of all (G, v) consistent with the conditioning assignment.
// counts[i] is the number of consistent codebooks whose target codeword
// has index i (fq::vec_index); total is the number of consistent books.
struct EmpiricalLaw {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
};

inline EmpiricalLaw empirical_conditional_law(
    const ensemble::CodeEnsembleSpec& spec, std::uint64_t target,
    const ensemble::Conditioning& conditioning,
    std::uint64_t budget = (1ULL << 28)) {
  if (conditioning.empty())
    throw std::invalid_argument("empirical law: need at least one pair");
  const std::uint64_t M = spec.message_count();
  if (target >= M) throw std::invalid_argument("message index out of range");
  for (const auto& [mi, xi] : conditioning) {
    if (mi >= M) throw std::invalid_argument("message index out of range");
    if (xi.q != spec.q || xi.len() != spec.N)
      throw std::invalid_argument("empirical law: codeword shape mismatch");
  }
  const std::uint64_t bud = effective_budget(budget);
  detail::steps_or_throw(
      spec.codebook_count(),
      (conditioning.size() + 1) * static_cast<std::uint64_t>(spec.N), bud);

  const std::uint64_t cells =
      *checked_pow(static_cast<std::uint64_t>(spec.q),
                   static_cast<unsigned>(spec.N));
  EmpiricalLaw law;
  law.counts.assign(cells, 0);
  ensemble::CodebookEnumeration books(spec, bud);
  for (std::uint64_t bi = 0; bi < books.size(); ++bi) {
    const ensemble::Codebook book = books.at(bi);
    bool consistent = true;
    for (const auto& [mi, xi] : conditioning)
      if (!(ensemble::encode(book, mi) == xi)) {
        consistent = false;
        break;
      }
    if (!consistent) continue;
    ++law.total;
    ++law.counts[fq::vec_index(ensemble::encode(book, target))];
  }
  return law;
}

// Bulk form of the above: one ensemble pass, bucketed by the conditioning
// codeword values (as vec_index tuples).  Equivalent to calling
// empirical_conditional_law once per realized conditioning assignment.
using LawCensus = std::map<std::vector<std::uint64_t>, EmpiricalLaw>;

inline LawCensus conditional_law_census(const ensemble::CodeEnsembleSpec& spec,
                                        std::uint64_t target,
                                        const std::vector<std::uint64_t>& cond_indices,
                                        std::uint64_t budget = (1ULL << 28)) {
  const std::uint64_t M = spec.message_count();
  if (target >= M) throw std::invalid_argument("message index out of range");
  if (cond_indices.empty())
    throw std::invalid_argument("census: need at least one index");
  const std::uint64_t bud = effective_budget(budget);
  detail::steps_or_throw(
      spec.codebook_count(),
      (cond_indices.size() + 1) * static_cast<std::uint64_t>(spec.N), bud);

  const std::uint64_t cells =
      *checked_pow(static_cast<std::uint64_t>(spec.q),
                   static_cast<unsigned>(spec.N));
  LawCensus census;
  ensemble::CodebookEnumeration books(spec, bud);
  std::vector<std::uint64_t> key(cond_indices.size());
  for (std::uint64_t bi = 0; bi < books.size(); ++bi) {
    const ensemble::Codebook book = books.at(bi);
    for (std::size_t i = 0; i < cond_indices.size(); ++i)
      key[i] = fq::vec_index(ensemble::encode(book, cond_indices[i]));
    EmpiricalLaw& law = census[key];
    if (law.counts.empty()) law.counts.assign(cells, 0);
    ++law.total;
    ++law.counts[fq::vec_index(ensemble::encode(book, target))];
  }
  return census;
}

// Union probability for the fully random ensemble (M - 1 competitors drawn
// i.i.d. uniform), by honest enumeration of all competitor tuples.
inline ExactResult iid_union_probability(std::uint64_t M, const ExactDmc& ch,
                                         const fq::FqVec& x_m,
                                         const std::vector<int>& y,
                                         std::uint64_t budget = (1ULL << 28)) {
  channel::check_word(ch, x_m, y);
  if (M < 2) throw std::invalid_argument("iid oracle: need M >= 2");
  const int N = x_m.len();
  const std::uint64_t bud = effective_budget(budget);
  const auto cells = checked_pow(static_cast<std::uint64_t>(ch.q),
                                 static_cast<unsigned>(N));
  if (!cells) throw budget_error(UINT64_MAX, bud);
  const auto tuples =
      checked_pow(*cells, static_cast<unsigned>(M - 1));
  detail::steps_or_throw(tuples, M - 1, bud);

  // Membership table for A(x_m, y) over all candidate codewords.
  const Rational ref = channel::likelihood(ch, x_m, y);
  std::vector<char> in_a(static_cast<std::size_t>(*cells));
  for (std::uint64_t i = 0; i < *cells; ++i)
    in_a[i] =
        channel::likelihood(ch, fq::vec_from_index(ch.q, N, i), y) >= ref;

  BigInt bad = 0;
  std::vector<std::uint64_t> slot(static_cast<std::size_t>(M - 1), 0);
  for (std::uint64_t t = 0;; ++t) {
    for (std::uint64_t s : slot)
      if (in_a[s]) {
        ++bad;
        break;
      }
    std::size_t pos = 0;
    while (pos < slot.size() && ++slot[pos] == *cells) slot[pos++] = 0;
    if (pos == slot.size()) break;
  }
  BigInt total = 1;
  for (std::uint64_t i = 0; i + 1 < M; ++i) total *= *cells;
  return {Rational(bad) / Rational(total)};
}

// P1 and P2 of the ensemble-average error bound at blocklength N for the
// q-ary symmetric channel, using the distance shortcut for alpha.  M may
// be non-integral (rate-driven M = e^{NR}) since only M - 1 enters.
//   P1 = (M-1)   sum_w C(N,w) (1-eps)^(N-w) eps^w alpha(w)
//   P2 = (M-1)^rho sum_w C(N,w) (1-eps)^(N-w) eps^w alpha(w)^rho
inline std::pair<double, double> qsc_p1_p2(int q, double eps, int N,
                                           double M, double rho) {
  fq::check_modulus(q);
  if (eps < 0 || eps > 1) throw std::invalid_argument("eps must be in [0, 1]");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (M <= 1) throw std::invalid_argument("need M > 1");
  if (rho < 1) throw std::invalid_argument("rho must be >= 1");
  BigInt qn = 1;
  for (int i = 0; i < N; ++i) qn *= q;
  const double qn_d = static_cast<double>(qn);
  double p1 = 0, p2 = 0;
  for (int w = 0; w <= N; ++w) {
    // C(N, w) (q-1)^w patterns at distance w, each with the same weight.
    BigInt patterns = 1;
    for (int i = 0; i < w; ++i) patterns = patterns * (N - i) / (i + 1);
    for (int i = 0; i < w; ++i) patterns *= (q - 1);
    const double pw = static_cast<double>(patterns) *
                      std::pow(1.0 - eps, N - w) *
                      std::pow(eps / (q - 1), w);
    const double a =
        static_cast<double>(channel::detail::qsc_count(q, N, w, eps)) / qn_d;
    p1 += pw * a;
    p2 += pw * std::pow(a, rho);
  }
  return {(M - 1.0) * p1, std::pow(M - 1.0, rho) * p2};
}

// Same quantities for a general channel by full enumeration over (x_m, y),
// with alpha from the channel module.  Q_N is the uniform input.
inline std::pair<double, double> exact_p1_p2(
    const ensemble::CodeEnsembleSpec& spec, const channel::Dmc& ch,
    double rho, std::uint64_t budget = (1ULL << 28)) {
  if (ch.q != spec.q) throw std::invalid_argument("modulus mismatch");
  if (rho < 1) throw std::invalid_argument("rho must be >= 1");
  const double M = static_cast<double>(spec.message_count());
  if (ch.symmetric)
    return qsc_p1_p2(ch.q, ch.sym_eps, spec.N, M, rho);

  const std::uint64_t bud = effective_budget(budget);
  const auto x_words = checked_pow(static_cast<std::uint64_t>(ch.q),
                                   static_cast<unsigned>(spec.N));
  const auto y_words = checked_pow(static_cast<std::uint64_t>(ch.y_size),
                                   static_cast<unsigned>(spec.N));
  if (!x_words || !y_words) throw budget_error(UINT64_MAX, bud);
  detail::steps_or_throw(x_words, *y_words * *x_words, bud);

  double p1 = 0, p2 = 0;
  const double qn = static_cast<double>(*x_words);
  for (std::uint64_t xi = 0; xi < *x_words; ++xi) {
    const fq::FqVec x = fq::vec_from_index(ch.q, spec.N, xi);
    std::vector<int> y(static_cast<std::size_t>(spec.N), 0);
    for (std::uint64_t yi = 0; yi < *y_words; ++yi) {
      const double like = channel::likelihood(ch, x, y);
      if (like > 0) {
        const double a = channel::alpha(ch, x, y, bud).value;
        p1 += like * a / qn;
        p2 += like * std::pow(a, rho) / qn;
      }
      std::size_t pos = 0;
      while (pos < y.size() && ++y[pos] == ch.y_size) y[pos++] = 0;
    }
  }
  return {(M - 1.0) * p1, std::pow(M - 1.0, rho) * p2};
}

// Rational s with s^2 <= t and s within one floating rounding step of
// sqrt(t); used to compare fractional-power sandwich bounds against exact
// union probabilities with zero tolerance (t * s is a certified lower
// bound on t^{3/2}).
inline Rational rational_sqrt_lower(const Rational& t) {
  if (t < 0) throw std::invalid_argument("sqrt of negative rational");
  if (t == 0) return 0;
  double approx = std::sqrt(static_cast<double>(t));
  if (!(approx > 0)) return 0;  // underflow: 0 is still a valid lower bound
  Rational s(approx);
  if (s * s > t) s = t / s;  // s > sqrt(t)  =>  t/s < sqrt(t)
  return s;
}

}  // namespace expforge::oracle
