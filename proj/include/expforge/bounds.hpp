#pragma once

// Bounds on the probability of a union of events, generic and specialized
// to the pairwise error events of a code ensemble.
//
// Generic (any finite probability space):
//   union_upper       sum of singles, capped at 1
//   bonferroni_lower  sum singles - (1/2) sum_{i != j} pair intersections
//   decaen_lower      sum_i P(A_i)^2 / sum_j P(A_i n A_j)
//
// Ensemble-specific, with t = (M-1) alpha:
//   random_sandwich   t - t^rho <= Pr(union) <= t           (1 <= rho <= 2)
//   linear_sandwich   t/q - t^rho <= Pr(union) <= t         (rho >= 1, q^K > 2)
// both lower bounds clamped at 0.  The linear ensemble loses the factor
// 1/q because pairwise intersections can only be bounded by alpha (not
// alpha^2) when the third message vector sits in span* of the other two;
// the intermediate de Caen form t / (t + (q-1) alpha ... ) is exposed for
// tests as decaen_intermediate.
//
// Everything is templated on the probability scalar so the oracle can run
// the same formulas in exact rational arithmetic.

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace expforge::bounds {

template <class Real>
inline Real union_upper(std::uint64_t M, const Real& alpha) {
  if (M < 2) throw std::invalid_argument("union_upper: need M >= 2");
  Real t = Real(M - 1) * alpha;
  if (t > Real(1)) return Real(1);
  return t;
}

namespace detail {
template <class Real>
inline void check_pair_table(const std::vector<Real>& singles,
                             const std::vector<std::vector<Real>>& pairs) {
  const std::size_t n = singles.size();
  if (pairs.size() != n)
    throw std::invalid_argument("pair table must be n x n");
  for (const auto& row : pairs)
    if (row.size() != n)
      throw std::invalid_argument("pair table must be n x n");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (pairs[i][j] != pairs[j][i])
        throw std::invalid_argument("pair table must be symmetric");
}
}  // namespace detail

// Bonferroni (inclusion-exclusion truncated at pairs).  `pairs` is the
// full symmetric table of P(A_i n A_j); the diagonal is ignored.
template <class Real>
inline Real bonferroni_lower(const std::vector<Real>& singles,
                             const std::vector<std::vector<Real>>& pairs) {
  detail::check_pair_table(singles, pairs);
  Real s(0);
  for (const Real& p : singles) s += p;
  for (std::size_t i = 0; i < singles.size(); ++i)
    for (std::size_t j = i + 1; j < singles.size(); ++j)
      s -= pairs[i][j];
  if (s < Real(0)) return Real(0);
  return s;
}

// de Caen's lower bound.  The diagonal of `pairs` must equal `singles`
// (P(A_i n A_i) = P(A_i)); zero-probability events are dropped.
template <class Real>
inline Real decaen_lower(const std::vector<Real>& singles,
                         const std::vector<std::vector<Real>>& pairs) {
  detail::check_pair_table(singles, pairs);
  for (std::size_t i = 0; i < singles.size(); ++i)
    if (pairs[i][i] != singles[i])
      throw std::invalid_argument("decaen_lower: diagonal must equal singles");
  Real total(0);
  for (std::size_t i = 0; i < singles.size(); ++i) {
    if (singles[i] == Real(0)) continue;
    Real denom(0);
    for (std::size_t j = 0; j < singles.size(); ++j) denom += pairs[i][j];
    total += singles[i] * singles[i] / denom;
  }
  return total;
}

// Pairwise intersection probability for the linear ensemble (two
// competitors m', m'' seen from transmitted m): exactly alpha^2 when u_m
// is outside span*{u_m', u_m''}, otherwise only the bound alpha is
// available.
template <class Real>
struct IntersectionBound {
  bool exact = false;  // true: value is the exact probability
  Real value{};
};

template <class Real>
inline IntersectionBound<Real> intersection_linear(const Real& alpha,
                                                   bool m_in_span_star) {
  if (m_in_span_star) return {false, alpha};
  return {true, alpha * alpha};
}

template <class Real>
struct Sandwich {
  Real lower{};
  Real upper{};
  double rho = 1;
};

// Fully random (i.i.d. codewords) ensemble: t - t^rho <= Pr <= t.
inline Sandwich<double> random_sandwich(std::uint64_t M, double alpha,
                                        double rho) {
  if (M < 2) throw std::invalid_argument("random_sandwich: need M >= 2");
  if (rho < 1 || rho > 2)
    throw std::invalid_argument("random_sandwich: rho must be in [1, 2]");
  if (alpha < 0 || alpha > 1)
    throw std::invalid_argument("random_sandwich: alpha must be in [0, 1]");
  const double t = static_cast<double>(M - 1) * alpha;
  Sandwich<double> s;
  s.rho = rho;
  s.lower = std::max(0.0, t - std::pow(t, rho));
  s.upper = std::min(1.0, t);
  return s;
}

// Intermediate de Caen form for the linear ensemble before relaxation to
// t/q - t^rho:  t / (t + (q - 1))  with t = (M - 1) alpha.  Kept separate
// so tests can check the chain  t/q - t^rho <= intermediate <= Pr(union).
template <class Real>
inline Real decaen_intermediate(std::uint64_t M, int q, const Real& alpha) {
  if (M < 3) throw std::invalid_argument("decaen_intermediate: need q^K > 2");
  const Real t = Real(M - 1) * alpha;
  if (t == Real(0)) return Real(0);
  return t / (t + Real(q - 1));
}

// Linear ensemble: t/q - t^rho <= Pr <= t, valid for q^K > 2, rho >= 1.
inline Sandwich<double> linear_sandwich(std::uint64_t M, int q, double alpha,
                                        double rho) {
  if (M < 3)
    throw std::invalid_argument("linear_sandwich: hypothesis q^K > 2 violated");
  if (rho < 1) throw std::invalid_argument("linear_sandwich: rho must be >= 1");
  if (alpha < 0 || alpha > 1)
    throw std::invalid_argument("linear_sandwich: alpha must be in [0, 1]");
  const double t = static_cast<double>(M - 1) * alpha;
  Sandwich<double> s;
  s.rho = rho;
  s.lower = std::max(0.0, t / q - std::pow(t, rho));
  s.upper = std::min(1.0, t);
  return s;
}

}  // namespace expforge::bounds
