#pragma once

// Verification engines shared by the CLI verify-* commands and the
// acceptance suite.  Each engine runs an exhaustive (or seeded random)
// comparison between closed-form claims and the enumeration oracle, in
// exact rational arithmetic, and reports a mismatch census instead of
// stopping at the first failure.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "expforge/bounds.hpp"
#include "expforge/channel.hpp"
#include "expforge/ensemble.hpp"
#include "expforge/fq.hpp"
#include "expforge/oracle.hpp"
#include "expforge/util.hpp"

namespace expforge::verify {

using oracle::Rational;

struct CheckSummary {
  std::uint64_t cases = 0;          // structural cases examined
  std::uint64_t comparisons = 0;    // individual (in)equality checks
  std::uint64_t mismatches = 0;
  std::uint64_t indeterminate = 0;  // sub-ulp slivers of the 1.5-power
                                    // enclosure; counted as passes
  std::vector<std::string> examples;
  bool pass() const { return mismatches == 0 && comparisons > 0; }
  void note_mismatch(const std::string& what) {
    ++mismatches;
    if (examples.size() < 8) examples.push_back(what);
  }
};

namespace detail {
// Visit every size-k subset of {0, ..., n-1} in lexicographic order.
template <class Fn>
inline void for_each_subset(std::uint64_t n, int k, Fn&& fn) {
  std::vector<std::uint64_t> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[i] = static_cast<std::uint64_t>(i);
  if (static_cast<std::uint64_t>(k) > n) return;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - static_cast<std::uint64_t>(k - i)) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Certified enclosure of t^(twice_rho / 2) for twice_rho >= 2.  Integer
// powers are exact; half powers use a one-sided rational sqrt, so the
// interval is a couple of ulps wide at worst.
inline std::pair<Rational, Rational> pow_enclosure(const Rational& t,
                                                   int twice_rho) {
  if (twice_rho < 2)
    throw std::invalid_argument("pow_enclosure: need rho >= 1");
  Rational p = 1;
  for (int i = 0; i < twice_rho / 2; ++i) p *= t;
  if (twice_rho % 2 == 0) return {p, p};
  if (t == 0) return {Rational(0), Rational(0)};
  const Rational s_lo = oracle::rational_sqrt_lower(t);
  // s_lo degrades to 0 only when t underflows a double; sqrt(t) < 1 there.
  const Rational s_hi = s_lo == 0 ? Rational(1) : Rational(t / s_lo);
  return {p * s_lo, p * s_hi};
}
}  // namespace detail

// --- Conditional-law exactness -------------------------------------------
//
// For every target message, every conditioning index set of size
// 1..max_k, and every realizable conditioning assignment: the exhaustive
// census over all (G, v) must match the closed-form law exactly (integer
// counts, zero tolerance).

inline CheckSummary check_conditional_laws(
    const ensemble::CodeEnsembleSpec& spec, int max_k = 3,
    std::uint64_t budget = (1ULL << 28)) {
  CheckSummary sum;
  const std::uint64_t M = spec.message_count();
  const std::uint64_t cells =
      *checked_pow(static_cast<std::uint64_t>(spec.q),
                   static_cast<unsigned>(spec.N));
  for (int k = 1; k <= max_k && static_cast<std::uint64_t>(k) < M; ++k) {
    detail::for_each_subset(M, k, [&](const std::vector<std::uint64_t>& idx) {
      for (std::uint64_t target = 0; target < M; ++target) {
        bool in_set = false;
        for (std::uint64_t i : idx) in_set = in_set || i == target;
        if (in_set) continue;
        ++sum.cases;
        const auto census =
            oracle::conditional_law_census(spec, target, idx, budget);
        for (const auto& [key, law] : census) {
          ensemble::Conditioning cond;
          for (std::size_t i = 0; i < idx.size(); ++i)
            cond.emplace_back(idx[i],
                              fq::vec_from_index(spec.q, spec.N, key[i]));
          const auto closed = ensemble::conditional_law(spec, target, cond);
          ++sum.comparisons;
          bool ok = true;
          if (closed.kind == ensemble::LawKind::Uniform) {
            ok = law.total % cells == 0;
            const std::uint64_t each = law.total / cells;
            for (std::uint64_t c : law.counts) ok = ok && c == each;
          } else {
            const std::uint64_t at = fq::vec_index(*closed.mass_point);
            for (std::uint64_t c = 0; c < cells; ++c)
              ok = ok && law.counts[c] == (c == at ? law.total : 0);
          }
          if (!ok) {
            std::ostringstream os;
            os << "law mismatch: target " << target << ", k " << k;
            sum.note_mismatch(os.str());
          }
        }
      }
    });
  }
  return sum;
}

// --- Pairwise-intersection exactness --------------------------------------
//
// For every triple (m, m', m'') and every (x_m, y): the exact probability
// that both competitors tie-or-beat equals alpha^2 when u_m lies outside
// span*{u_m', u_m''}, and never exceeds alpha otherwise.

inline CheckSummary check_pairwise_intersections(
    const ensemble::CodeEnsembleSpec& spec, const oracle::ExactDmc& ch,
    std::uint64_t budget = (1ULL << 28)) {
  CheckSummary sum;
  const std::uint64_t M = spec.message_count();
  if (M < 3)
    throw std::invalid_argument(
        "pairwise intersections need at least three messages (q^K > 2)");
  std::vector<fq::FqVec> u;
  for (std::uint64_t m = 0; m < M; ++m)
    u.push_back(ensemble::message_vector(spec, m));
  const std::uint64_t x_words =
      *checked_pow(static_cast<std::uint64_t>(spec.q),
                   static_cast<unsigned>(spec.N));
  const std::uint64_t y_words =
      *checked_pow(static_cast<std::uint64_t>(ch.y_size),
                   static_cast<unsigned>(spec.N));

  for (std::uint64_t m = 0; m < M; ++m)
    for (std::uint64_t mp = 0; mp < M; ++mp) {
      if (mp == m) continue;
      for (std::uint64_t mpp = mp + 1; mpp < M; ++mpp) {
        if (mpp == m) continue;
        const bool in_star = fq::span_star_contains(u[m], {u[mp], u[mpp]});
        ++sum.cases;
        for (std::uint64_t xi = 0; xi < x_words; ++xi) {
          const fq::FqVec x_m = fq::vec_from_index(spec.q, spec.N, xi);
          std::vector<int> y(static_cast<std::size_t>(spec.N), 0);
          for (std::uint64_t yi = 0; yi < y_words; ++yi) {
            const Rational a = channel::alpha(ch, x_m, y, budget).value;
            const Rational both =
                oracle::exact_pairwise_intersection(spec, ch, m, mp, mpp, x_m,
                                                    y, budget)
                    .value;
            ++sum.comparisons;
            const bool ok = in_star ? both <= a : both == a * a;
            if (!ok) {
              std::ostringstream os;
              os << "intersection mismatch: (m,m',m'')=(" << m << "," << mp
                 << "," << mpp << "), x=" << xi << ", y=" << yi
                 << (in_star ? " [in span*]" : " [outside span*]");
              sum.note_mismatch(os.str());
            }
            std::size_t pos = 0;
            while (pos < y.size() && ++y[pos] == ch.y_size) y[pos++] = 0;
          }
        }
      }
    }
  return sum;
}

// --- Union sandwich, linear ensemble ---------------------------------------
//
// For every (m, x_m, y) and each rho in twice_rhos/2:
//   max(0, t/q - t^rho) <= Pr(union) <= t,   t = (M-1) alpha.
// Certified rational comparisons; the 1.5 power uses an enclosure, and a
// case narrower than the enclosure is counted indeterminate (a pass).

inline CheckSummary check_union_sandwich(
    const ensemble::CodeEnsembleSpec& spec, const oracle::ExactDmc& ch,
    const std::vector<int>& twice_rhos = {2, 3, 4},
    std::uint64_t budget = (1ULL << 28)) {
  CheckSummary sum;
  const std::uint64_t M = spec.message_count();
  if (M < 3)
    throw std::invalid_argument("union sandwich needs q^K > 2");
  const std::uint64_t x_words =
      *checked_pow(static_cast<std::uint64_t>(spec.q),
                   static_cast<unsigned>(spec.N));
  const std::uint64_t y_words =
      *checked_pow(static_cast<std::uint64_t>(ch.y_size),
                   static_cast<unsigned>(spec.N));
  for (std::uint64_t m = 0; m < M; ++m)
    for (std::uint64_t xi = 0; xi < x_words; ++xi) {
      const fq::FqVec x_m = fq::vec_from_index(spec.q, spec.N, xi);
      std::vector<int> y(static_cast<std::size_t>(spec.N), 0);
      for (std::uint64_t yi = 0; yi < y_words; ++yi) {
        ++sum.cases;
        const Rational a = channel::alpha(ch, x_m, y, budget).value;
        const Rational exact =
            oracle::exact_union_probability(spec, ch, m, x_m, y, budget).value;
        const Rational t = Rational(M - 1) * a;
        ++sum.comparisons;
        if (!(exact <= t)) {
          std::ostringstream os;
          os << "union upper violated: m=" << m << ", x=" << xi
             << ", y=" << yi;
          sum.note_mismatch(os.str());
        }
        for (int tr : twice_rhos) {
          ++sum.comparisons;
          const auto [p_lo, p_hi] = detail::pow_enclosure(t, tr);
          const Rational lower_hi = t / spec.q - p_lo;  // >= true lower bound
          const Rational lower_lo = t / spec.q - p_hi;  // <= true lower bound
          if (lower_hi <= 0 || lower_hi <= exact) continue;
          if (lower_lo > exact) {
            std::ostringstream os;
            os << "union lower violated: m=" << m << ", x=" << xi
               << ", y=" << yi << ", 2rho=" << tr;
            sum.note_mismatch(os.str());
          } else {
            ++sum.indeterminate;
          }
        }
        std::size_t pos = 0;
        while (pos < y.size() && ++y[pos] == ch.y_size) y[pos++] = 0;
      }
    }
  return sum;
}

// --- Union sandwich, fully random ensemble ---------------------------------
//
// M - 1 i.i.d. uniform competitors:  t - t^rho <= Pr(union) <= t.  The
// enumeration oracle is additionally pinned to the closed form
// 1 - (1 - alpha)^(M-1), an exact rational identity.

inline CheckSummary check_iid_sandwich(int q, int N, std::uint64_t M,
                                       const oracle::ExactDmc& ch,
                                       const std::vector<int>& twice_rhos = {2,
                                                                             3,
                                                                             4},
                                       std::uint64_t budget = (1ULL << 28)) {
  CheckSummary sum;
  if (ch.q != q) throw std::invalid_argument("modulus mismatch");
  const std::uint64_t x_words = *checked_pow(
      static_cast<std::uint64_t>(q), static_cast<unsigned>(N));
  const std::uint64_t y_words = *checked_pow(
      static_cast<std::uint64_t>(ch.y_size), static_cast<unsigned>(N));
  for (std::uint64_t xi = 0; xi < x_words; ++xi) {
    const fq::FqVec x_m = fq::vec_from_index(q, N, xi);
    std::vector<int> y(static_cast<std::size_t>(N), 0);
    for (std::uint64_t yi = 0; yi < y_words; ++yi) {
      ++sum.cases;
      const Rational a = channel::alpha(ch, x_m, y, budget).value;
      const Rational exact =
          oracle::iid_union_probability(M, ch, x_m, y, budget).value;
      Rational closed = 1;
      for (std::uint64_t i = 0; i + 1 < M; ++i) closed *= (1 - a);
      closed = 1 - closed;
      ++sum.comparisons;
      if (exact != closed)
        sum.note_mismatch("iid oracle disagrees with closed form at x=" +
                          std::to_string(xi) + ", y=" + std::to_string(yi));
      const Rational t = Rational(M - 1) * a;
      ++sum.comparisons;
      if (!(exact <= t))
        sum.note_mismatch("iid upper violated at x=" + std::to_string(xi) +
                          ", y=" + std::to_string(yi));
      for (int tr : twice_rhos) {
        ++sum.comparisons;
        const auto [p_lo, p_hi] = detail::pow_enclosure(t, tr);
        const Rational lower_hi = t - p_lo;
        const Rational lower_lo = t - p_hi;
        if (lower_hi <= 0 || lower_hi <= exact) continue;
        if (lower_lo > exact) {
          std::ostringstream os;
          os << "iid lower violated at x=" << xi << ", y=" << yi
             << ", 2rho=" << tr;
          sum.note_mismatch(os.str());
        } else {
          ++sum.indeterminate;
        }
      }
      std::size_t pos = 0;
      while (pos < y.size() && ++y[pos] == ch.y_size) y[pos++] = 0;
    }
  }
  return sum;
}

// --- de Caen / Bonferroni dominance on random spaces ------------------------
//
// Seeded random finite probability spaces (rational atom masses), random
// event subsets; asserts decaen <= union, bonferroni <= union, and
// union <= sum of singles capped at 1 — each independently, exactly.

struct DeCaenOptions {
  int spaces = 1000;
  int max_atoms = 12;
  int max_events = 6;
  std::uint64_t seed = 20260815;
};

inline CheckSummary check_decaen_random(const DeCaenOptions& opt) {
  CheckSummary sum;
  std::mt19937_64 eng(splitmix64(opt.seed));
  for (int s = 0; s < opt.spaces; ++s) {
    const int n_atoms =
        2 + static_cast<int>(uniform_below(eng, opt.max_atoms - 1));
    const int n_events =
        1 + static_cast<int>(uniform_below(eng, opt.max_events));
    std::vector<std::uint64_t> weight(static_cast<std::size_t>(n_atoms));
    std::uint64_t total = 0;
    for (auto& w : weight) {
      w = 1 + uniform_below(eng, 16);
      total += w;
    }
    std::vector<std::uint64_t> mask(static_cast<std::size_t>(n_events));
    for (auto& ev : mask) ev = uniform_below(eng, 1ULL << n_atoms);

    auto mass = [&](std::uint64_t m) {
      Rational p = 0;
      for (int a = 0; a < n_atoms; ++a)
        if (m >> a & 1) p += Rational(weight[a], total);
      return p;
    };
    std::vector<Rational> singles;
    std::uint64_t all = 0;
    for (std::uint64_t m : mask) {
      singles.push_back(mass(m));
      all |= m;
    }
    std::vector<std::vector<Rational>> pairs(
        static_cast<std::size_t>(n_events),
        std::vector<Rational>(static_cast<std::size_t>(n_events)));
    for (int i = 0; i < n_events; ++i)
      for (int j = 0; j < n_events; ++j) pairs[i][j] = mass(mask[i] & mask[j]);
    const Rational exact_union = mass(all);
    Rational single_sum = 0;
    for (const Rational& p : singles) single_sum += p;
    const Rational upper = single_sum > 1 ? Rational(1) : single_sum;

    ++sum.cases;
    sum.comparisons += 3;
    if (!(bounds::decaen_lower(singles, pairs) <= exact_union))
      sum.note_mismatch("de Caen exceeds the union at space " +
                        std::to_string(s));
    if (!(bounds::bonferroni_lower(singles, pairs) <= exact_union))
      sum.note_mismatch("Bonferroni exceeds the union at space " +
                        std::to_string(s));
    if (!(exact_union <= upper))
      sum.note_mismatch("union exceeds the single sum at space " +
                        std::to_string(s));
  }
  return sum;
}

}  // namespace expforge::verify
