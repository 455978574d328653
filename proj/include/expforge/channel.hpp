#pragma once

// Discrete memoryless channels and the pairwise error-event machinery.
//
// BasicDmc is templated on the probability scalar: `double` for numeric
// work and an exact rational for oracle-grade computations.  The error
// event between codewords follows the maximum-likelihood convention that
// ties count against the transmitted word:
//
//   sigma(x', x, y) = 1  iff  P(y | x') >= P(y | x)
//   A(x, y)  = { x' : sigma(x', x, y) = 1 },   alpha = q^-N * |A(x, y)|
//
// For the q-ary symmetric channel |A| depends on (x, y) only through the
// Hamming distance w = d(x, y), which gives an O(N) shortcut:
// |A|(w) = sum_{j <= w} C(N, j) (q-1)^j when eps < (q-1)/q.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "expforge/ensemble.hpp"
#include "expforge/fq.hpp"
#include "expforge/util.hpp"

namespace expforge::channel {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {
inline void check_row_sum(const std::vector<double>& row) {
  double s = 0;
  for (double p : row) {
    if (p < 0) throw std::invalid_argument("dmc: negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("dmc: row does not sum to 1 within 1e-12");
}
template <class Rational>
inline void check_row_sum_exact(const std::vector<Rational>& row) {
  Rational s = 0;
  for (const Rational& p : row) {
    if (p < 0) throw std::invalid_argument("dmc: negative probability");
    s += p;
  }
  if (s != 1) throw std::invalid_argument("dmc: row does not sum to 1");
}
inline void check_row(const std::vector<double>& row) { check_row_sum(row); }
template <class Rational>
inline void check_row(const std::vector<Rational>& row) {
  check_row_sum_exact(row);
}
}  // namespace detail

// Input alphabet is F_q (x in [0, q)); output alphabet is [0, y_size).
template <class Real>
struct BasicDmc {
  int q = 2;
  int y_size = 2;
  std::vector<Real> p;  // row-major q x y_size
  // Symmetric-channel tag set by the qsc/bsc factories; enables the O(N)
  // alpha shortcut.  General matrices leave it unset.
  bool symmetric = false;
  Real sym_eps{};

  Real at(int x, int y) const {
    return p[static_cast<std::size_t>(x) * y_size + static_cast<std::size_t>(y)];
  }
};

using Dmc = BasicDmc<double>;

template <class Real>
inline BasicDmc<Real> make_dmc(int q, std::vector<std::vector<Real>> rows) {
  fq::check_modulus(q);
  if (rows.size() != static_cast<std::size_t>(q))
    throw std::invalid_argument("dmc: need one row per input symbol");
  const std::size_t y = rows.front().size();
  if (y == 0) throw std::invalid_argument("dmc: empty output alphabet");
  BasicDmc<Real> ch;
  ch.q = q;
  ch.y_size = static_cast<int>(y);
  for (const auto& row : rows) {
    if (row.size() != y) throw std::invalid_argument("dmc: ragged rows");
    detail::check_row(row);
    ch.p.insert(ch.p.end(), row.begin(), row.end());
  }
  return ch;
}

// q-ary symmetric channel: stays with probability 1 - eps, otherwise
// uniform over the q - 1 other symbols.
template <class Real>
inline BasicDmc<Real> make_qsc(int q, Real eps) {
  fq::check_modulus(q);
  if (eps < 0 || eps > 1)
    throw std::invalid_argument("qsc: eps must be in [0, 1]");
  BasicDmc<Real> ch;
  ch.q = q;
  ch.y_size = q;
  ch.p.assign(static_cast<std::size_t>(q) * q, Real(0));
  const Real off = eps / (q - 1);
  for (int x = 0; x < q; ++x)
    for (int y = 0; y < q; ++y)
      ch.p[static_cast<std::size_t>(x) * q + y] = (x == y) ? Real(1) - eps : off;
  ch.symmetric = true;
  ch.sym_eps = eps;
  return ch;
}

template <class Real>
inline BasicDmc<Real> make_bsc(Real eps) {
  return make_qsc<Real>(2, eps);
}

// True when the matrix is symmetric in Gallager's sense: all rows are
// permutations of each other and all columns are permutations of each
// other.  Callers use this to warn that capacity_uniform and the uniform-
// input exponents are only the true optima for such channels.
inline bool is_symmetric_channel(const Dmc& ch) {
  std::vector<std::vector<double>> rows, cols;
  for (int x = 0; x < ch.q; ++x) {
    std::vector<double> r;
    for (int y = 0; y < ch.y_size; ++y) r.push_back(ch.at(x, y));
    std::sort(r.begin(), r.end());
    rows.push_back(std::move(r));
  }
  for (int y = 0; y < ch.y_size; ++y) {
    std::vector<double> c;
    for (int x = 0; x < ch.q; ++x) c.push_back(ch.at(x, y));
    std::sort(c.begin(), c.end());
    cols.push_back(std::move(c));
  }
  for (const auto& r : rows)
    if (r != rows.front()) return false;
  for (const auto& c : cols)
    if (c != cols.front()) return false;
  return true;
}

template <class Real>
inline void check_word(const BasicDmc<Real>& ch, const fq::FqVec& x,
                       const std::vector<int>& y) {
  if (x.q != ch.q) throw std::invalid_argument("channel: modulus mismatch");
  if (static_cast<std::size_t>(x.len()) != y.size())
    throw std::invalid_argument("channel: x and y length mismatch");
  for (int yi : y)
    if (yi < 0 || yi >= ch.y_size)
      throw std::invalid_argument("channel: output symbol out of range");
}

// P_N(y | x) = product of per-symbol transition probabilities.
template <class Real>
inline Real likelihood(const BasicDmc<Real>& ch, const fq::FqVec& x,
                       const std::vector<int>& y) {
  check_word(ch, x, y);
  Real prod(1);
  for (std::size_t i = 0; i < y.size(); ++i)
    prod *= ch.at(x.e[i], y[i]);
  return prod;
}

// Tie-inclusive pairwise decision: competitor x' beats or ties x given y.
template <class Real>
inline bool sigma(const BasicDmc<Real>& ch, const fq::FqVec& x_alt,
                  const fq::FqVec& x, const std::vector<int>& y) {
  return likelihood(ch, x_alt, y) >= likelihood(ch, x, y);
}

template <class Real>
struct AlphaResult {
  BigInt count;  // |A(x, y)|, exact
  Real value;    // q^-N * count
};

namespace detail {
// |A| for the symmetric channel from w = d(x, y).  The per-symbol
// likelihood ratio factor is f = eps / ((q-1)(1-eps)); f < 1 means closer
// competitors win (the usual regime), f = 1 means everything ties, f > 1
// reverses the order.  eps in {0, 1} puts zeros in the matrix, so the
// ratio ordering breaks and those cases are handled by inspection: the
// reference likelihood is zero unless w = 0 (resp. w = N), and a zero
// reference admits every competitor.
template <class Real>
inline BigInt qsc_count(int q, int N, int w, const Real& eps) {
  BigInt total = 0;
  const bool all_tie = (eps * q == Real(q - 1));
  const bool closer_wins = (eps * q < Real(q - 1));
  if (all_tie || (eps == Real(0) && w > 0) || (eps == Real(1) && w < N)) {
    BigInt qn = 1;
    for (int i = 0; i < N; ++i) qn *= q;
    return qn;
  }
  if (eps == Real(0)) return 1;  // w = 0: only the exact match ties
  for (int j = 0; j <= N; ++j) {
    const bool in = closer_wins ? (j <= w) : (j >= w);
    if (!in) continue;
    // C(N, j) * (q-1)^j
    BigInt term = 1;
    for (int i = 0; i < j; ++i) term = term * (N - i) / (i + 1);
    for (int i = 0; i < j; ++i) term *= (q - 1);
    total += term;
  }
  return total;
}
}  // namespace detail

inline int hamming_distance(const fq::FqVec& x, const std::vector<int>& y) {
  int d = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (x.e[i] != y[i]) ++d;
  return d;
}

// alpha(x, y) with an exact competitor count.  Symmetric channels use the
// O(N) distance shortcut; general channels enumerate all q^N competitors
// subject to the budget.
template <class Real>
inline AlphaResult<Real> alpha(const BasicDmc<Real>& ch, const fq::FqVec& x,
                               const std::vector<int>& y,
                               std::uint64_t budget = (1ULL << 24)) {
  check_word(ch, x, y);
  const int N = x.len();
  BigInt qn = 1;
  for (int i = 0; i < N; ++i) qn *= ch.q;
  BigInt count;
  if (ch.symmetric) {
    count = detail::qsc_count(ch.q, N, hamming_distance(x, y), ch.sym_eps);
  } else {
    require_budget(checked_pow(static_cast<std::uint64_t>(ch.q),
                               static_cast<unsigned>(N)),
                   effective_budget(budget));
    const Real ref = likelihood(ch, x, y);
    count = 0;
    const std::uint64_t total =
        *checked_pow(static_cast<std::uint64_t>(ch.q), static_cast<unsigned>(N));
    for (std::uint64_t i = 0; i < total; ++i) {
      const fq::FqVec cand = fq::vec_from_index(ch.q, N, i);
      if (likelihood(ch, cand, y) >= ref) ++count;
    }
  }
  AlphaResult<Real> r;
  r.count = count;
  if constexpr (std::is_same_v<Real, double>) {
    r.value = static_cast<double>(count) / static_cast<double>(qn);
  } else {
    r.value = Real(count) / Real(qn);
  }
  return r;
}

// Bundle consumed by the bound family: alpha together with the competitor
// count M - 1 and the field size.
struct ErrorEventStats {
  double alpha = 0;
  std::uint64_t m_count = 0;  // M - 1
  int q = 2;
};

struct MlResult {
  std::vector<std::uint64_t> winners;  // all argmax messages, ascending
  bool is_tie() const { return winners.size() > 1; }
  std::uint64_t index() const { return winners.front(); }
};

// Full ML decoding of y under a codebook: returns every message whose
// codeword attains the maximum likelihood.  A transmitted m is counted as
// an error exactly when some other message appears in `winners`.
template <class Real>
inline MlResult ml_decode(const ensemble::Codebook& book,
                          const BasicDmc<Real>& ch, const std::vector<int>& y) {
  if (book.spec.q != ch.q)
    throw std::invalid_argument("ml_decode: modulus mismatch");
  const std::uint64_t M = book.spec.message_count();
  MlResult res;
  Real best{};
  for (std::uint64_t m = 0; m < M; ++m) {
    const Real like = likelihood(ch, ensemble::encode(book, m), y);
    if (res.winners.empty() || like > best) {
      best = like;
      res.winners.assign(1, m);
    } else if (like == best) {
      res.winners.push_back(m);
    }
  }
  return res;
}

// Mutual information of the channel under a uniform input, in nats.
inline double capacity_uniform(const Dmc& ch) {
  const double qinv = 1.0 / ch.q;
  double cap = 0;
  for (int y = 0; y < ch.y_size; ++y) {
    double py = 0;
    for (int x = 0; x < ch.q; ++x) py += qinv * ch.at(x, y);
    for (int x = 0; x < ch.q; ++x) {
      const double p = ch.at(x, y);
      if (p > 0) cap += qinv * p * std::log(p / py);
    }
  }
  return cap;
}

}  // namespace expforge::channel
