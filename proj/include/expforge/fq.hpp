#pragma once

// Linear algebra over the prime field F_q with a runtime modulus.
//
// Vectors are row vectors; codeword maps multiply on the right (u * G).
// The one nonstandard item is the translated affine span
//
//   span*(x1, ..., xn) = x1 + span(x2 - x1, ..., xn - x1),
//
// equivalently the set of combinations sum c_i x_i whose coefficients sum
// to 1 mod q.  Membership of a target in span* of a conditioning set is
// what separates the point-mass and uniform branches of the conditional
// codeword law, so both an enumerating and a solving form are provided.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "expforge/util.hpp"

namespace expforge::fq {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::uint64_t next_prime(std::uint64_t n) {
  while (!is_prime(n)) ++n;
  return n;
}

inline void check_modulus(int q) {
  if (q < 2 || !is_prime(static_cast<std::uint64_t>(q)))
    throw std::invalid_argument("modulus must be a prime >= 2");
}

inline int mod_add(int a, int b, int q) { return (a + b) % q; }
inline int mod_sub(int a, int b, int q) { return (a - b % q + q) % q; }
inline int mod_mul(int a, int b, int q) {
  return static_cast<int>(static_cast<long long>(a) * b % q);
}

// Inverse by extended Euclid; q is prime so every nonzero element inverts.
inline int mod_inv(int a, int q) {
  a %= q;
  if (a < 0) a += q;
  if (a == 0) throw std::invalid_argument("mod_inv: zero has no inverse");
  int t = 0, new_t = 1, r = q, new_r = a;
  while (new_r != 0) {
    const int quot = r / new_r;
    t = std::exchange(new_t, t - quot * new_t);
    r = std::exchange(new_r, r - quot * new_r);
  }
  return t < 0 ? t + q : t;
}

struct FqVec {
  int q = 2;
  std::vector<int> e;

  FqVec() = default;
  FqVec(int q_, std::vector<int> elems) : q(q_), e(std::move(elems)) {
    check_modulus(q);
    for (int v : e)
      if (v < 0 || v >= q)
        throw std::invalid_argument("vector entry out of range [0, q)");
  }
  static FqVec zero(int q_, int len) {
    return FqVec(q_, std::vector<int>(static_cast<std::size_t>(len), 0));
  }
  int len() const { return static_cast<int>(e.size()); }
  friend bool operator==(const FqVec& a, const FqVec& b) {
    return a.q == b.q && a.e == b.e;
  }
  friend bool operator<(const FqVec& a, const FqVec& b) {
    if (a.q != b.q) return a.q < b.q;
    return a.e < b.e;
  }
};

struct FqMat {
  int q = 2;
  int rows = 0, cols = 0;
  std::vector<int> e;  // row-major

  FqMat() = default;
  FqMat(int q_, int r, int c, std::vector<int> elems)
      : q(q_), rows(r), cols(c), e(std::move(elems)) {
    check_modulus(q);
    if (r < 0 || c < 0 ||
        e.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c))
      throw std::invalid_argument("matrix shape does not match element count");
    for (int v : e)
      if (v < 0 || v >= q)
        throw std::invalid_argument("matrix entry out of range [0, q)");
  }
  static FqMat zero(int q_, int r, int c) {
    return FqMat(q_, r, c, std::vector<int>(static_cast<std::size_t>(r) * c, 0));
  }
  static FqMat identity(int q_, int n) {
    FqMat m = zero(q_, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }
  int at(int r, int c) const { return e[static_cast<std::size_t>(r) * cols + c]; }
  int& at(int r, int c) { return e[static_cast<std::size_t>(r) * cols + c]; }
  FqVec row(int r) const {
    return FqVec(q, std::vector<int>(e.begin() + static_cast<std::ptrdiff_t>(r) * cols,
                                     e.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols));
  }
  friend bool operator==(const FqMat& a, const FqMat& b) {
    return a.q == b.q && a.rows == b.rows && a.cols == b.cols && a.e == b.e;
  }
};

inline FqVec vec_add(const FqVec& a, const FqVec& b) {
  if (a.q != b.q || a.len() != b.len())
    throw std::invalid_argument("vec_add: shape or modulus mismatch");
  FqVec r = a;
  for (int i = 0; i < r.len(); ++i) r.e[i] = mod_add(a.e[i], b.e[i], a.q);
  return r;
}

inline FqVec vec_sub(const FqVec& a, const FqVec& b) {
  if (a.q != b.q || a.len() != b.len())
    throw std::invalid_argument("vec_sub: shape or modulus mismatch");
  FqVec r = a;
  for (int i = 0; i < r.len(); ++i) r.e[i] = mod_sub(a.e[i], b.e[i], a.q);
  return r;
}

inline FqVec vec_scale(int c, const FqVec& a) {
  FqVec r = a;
  c %= a.q;
  if (c < 0) c += a.q;
  for (int i = 0; i < r.len(); ++i) r.e[i] = mod_mul(c, a.e[i], a.q);
  return r;
}

// Row vector times matrix: (1 x K) * (K x N) -> (1 x N).
inline FqVec mat_mul(const FqVec& u, const FqMat& G) {
  if (u.q != G.q) throw std::invalid_argument("mat_mul: modulus mismatch");
  if (u.len() != G.rows)
    throw std::invalid_argument("mat_mul: vector length must equal row count");
  FqVec out = FqVec::zero(G.q, G.cols);
  for (int k = 0; k < G.rows; ++k) {
    const int uk = u.e[k];
    if (uk == 0) continue;
    for (int n = 0; n < G.cols; ++n)
      out.e[n] = (out.e[n] + uk * G.at(k, n)) % G.q;
  }
  return out;
}

// Row rank by Gaussian elimination mod q.
inline int rank(FqMat m) {
  const int q = m.q;
  int r = 0;
  for (int c = 0; c < m.cols && r < m.rows; ++c) {
    int pivot = -1;
    for (int i = r; i < m.rows; ++i)
      if (m.at(i, c) != 0) { pivot = i; break; }
    if (pivot < 0) continue;
    for (int j = 0; j < m.cols; ++j)
      std::swap(m.at(r, j), m.at(pivot, j));
    const int inv = mod_inv(m.at(r, c), q);
    for (int j = c; j < m.cols; ++j) m.at(r, j) = mod_mul(m.at(r, j), inv, q);
    for (int i = 0; i < m.rows; ++i) {
      if (i == r || m.at(i, c) == 0) continue;
      const int f = m.at(i, c);
      for (int j = c; j < m.cols; ++j)
        m.at(i, j) = mod_sub(m.at(i, j), mod_mul(f, m.at(r, j), q), q);
    }
    ++r;
  }
  return r;
}

// Any t with t * A = rhs, or nullopt when the system is unsolvable.
// Free variables are set to zero, which fixes a canonical solution.
inline std::optional<std::vector<int>> solve_left(const FqMat& A,
                                                  const FqVec& rhs) {
  if (A.q != rhs.q || A.cols != rhs.len())
    throw std::invalid_argument("solve_left: shape or modulus mismatch");
  const int q = A.q;
  // Augmented system on A^T: columns of the working matrix are the unknowns.
  FqMat w = FqMat::zero(q, A.cols, A.rows + 1);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) w.at(j, i) = A.at(i, j);
  for (int j = 0; j < A.cols; ++j) w.at(j, A.rows) = rhs.e[j];

  std::vector<int> pivot_col(static_cast<std::size_t>(w.rows), -1);
  int r = 0;
  for (int c = 0; c < A.rows && r < w.rows; ++c) {
    int pivot = -1;
    for (int i = r; i < w.rows; ++i)
      if (w.at(i, c) != 0) { pivot = i; break; }
    if (pivot < 0) continue;
    for (int j = 0; j <= A.rows; ++j) std::swap(w.at(r, j), w.at(pivot, j));
    const int inv = mod_inv(w.at(r, c), q);
    for (int j = c; j <= A.rows; ++j) w.at(r, j) = mod_mul(w.at(r, j), inv, q);
    for (int i = 0; i < w.rows; ++i) {
      if (i == r || w.at(i, c) == 0) continue;
      const int f = w.at(i, c);
      for (int j = c; j <= A.rows; ++j)
        w.at(i, j) = mod_sub(w.at(i, j), mod_mul(f, w.at(r, j), q), q);
    }
    pivot_col[static_cast<std::size_t>(r)] = c;
    ++r;
  }
  for (int i = r; i < w.rows; ++i)
    if (w.at(i, A.rows) != 0) return std::nullopt;  // inconsistent system
  std::vector<int> t(static_cast<std::size_t>(A.rows), 0);
  for (int i = 0; i < r; ++i)
    t[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(i)])] =
        w.at(i, A.rows);
  return t;
}

namespace detail {
// Difference matrix D with rows points[i] - points[0], i >= 1.
inline FqMat difference_matrix(const std::vector<FqVec>& pts) {
  const int q = pts.front().q;
  const int dim = pts.front().len();
  FqMat d = FqMat::zero(q, static_cast<int>(pts.size()) - 1, dim);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const FqVec diff = vec_sub(pts[i], pts.front());
    for (int j = 0; j < dim; ++j) d.at(static_cast<int>(i) - 1, j) = diff.e[j];
  }
  return d;
}

inline void check_point_set(const std::vector<FqVec>& pts) {
  if (pts.empty()) throw std::invalid_argument("span*: empty point set");
  for (const FqVec& p : pts)
    if (p.q != pts.front().q || p.len() != pts.front().len())
      throw std::invalid_argument("span*: mixed moduli or dimensions");
}
}  // namespace detail

// Coefficients c (one per point) with sum(c) = 1 mod q and sum c_i p_i =
// target, or nullopt when target is outside span* of the points.
inline std::optional<std::vector<int>> affine_combination_coeffs(
    const FqVec& target, const std::vector<FqVec>& pts) {
  detail::check_point_set(pts);
  if (target.q != pts.front().q || target.len() != pts.front().len())
    throw std::invalid_argument("affine_combination_coeffs: shape mismatch");
  const FqMat d = detail::difference_matrix(pts);
  const FqVec rhs = vec_sub(target, pts.front());
  if (d.rows == 0) {
    // Single point: span* is just that point.
    bool zero = std::all_of(rhs.e.begin(), rhs.e.end(),
                            [](int v) { return v == 0; });
    if (!zero) return std::nullopt;
    return std::vector<int>{1};
  }
  const auto t = solve_left(d, rhs);
  if (!t) return std::nullopt;
  std::vector<int> c(pts.size(), 0);
  int sum = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    c[i] = (*t)[i - 1];
    sum = mod_add(sum, c[i], target.q);
  }
  c[0] = mod_sub(1, sum, target.q);
  return c;
}

inline bool span_star_contains(const FqVec& target,
                               const std::vector<FqVec>& pts) {
  return affine_combination_coeffs(target, pts).has_value();
}

// Materializes span* as a sorted, duplicate-free vector.  The member count
// is q^rank(D); above `budget` this throws and membership queries via
// span_star_contains are the supported path.
inline std::vector<FqVec> span_star_members(const std::vector<FqVec>& pts,
                                            std::uint64_t budget = (1ULL << 20)) {
  detail::check_point_set(pts);
  const int q = pts.front().q;
  const FqMat d = detail::difference_matrix(pts);

  // Collect a row basis of D via elimination on a copy.
  std::vector<FqVec> basis;
  {
    FqMat w = d;
    int r = 0;
    for (int c = 0; c < w.cols && r < w.rows; ++c) {
      int pivot = -1;
      for (int i = r; i < w.rows; ++i)
        if (w.at(i, c) != 0) { pivot = i; break; }
      if (pivot < 0) continue;
      for (int j = 0; j < w.cols; ++j) std::swap(w.at(r, j), w.at(pivot, j));
      const int inv = mod_inv(w.at(r, c), q);
      for (int j = c; j < w.cols; ++j) w.at(r, j) = mod_mul(w.at(r, j), inv, q);
      for (int i = 0; i < w.rows; ++i) {
        if (i == r || w.at(i, c) == 0) continue;
        const int f = w.at(i, c);
        for (int j = c; j < w.cols; ++j)
          w.at(i, j) = mod_sub(w.at(i, j), mod_mul(f, w.at(r, j), q), q);
      }
      ++r;
    }
    for (int i = 0; i < r; ++i) basis.push_back(w.row(i));
  }

  require_budget(checked_pow(static_cast<std::uint64_t>(q),
                             static_cast<unsigned>(basis.size())),
                 budget);

  std::vector<FqVec> members;
  std::vector<int> coef(basis.size(), 0);
  for (;;) {
    FqVec p = pts.front();
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (coef[i] != 0) p = vec_add(p, vec_scale(coef[i], basis[i]));
    members.push_back(std::move(p));
    std::size_t pos = 0;
    while (pos < coef.size() && ++coef[pos] == q) coef[pos++] = 0;
    if (pos == coef.size()) break;
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return members;
}

// Little-endian base-q index of a vector, and its inverse.
inline std::uint64_t vec_index(const FqVec& v) {
  std::uint64_t idx = 0;
  for (int i = v.len() - 1; i >= 0; --i)
    idx = idx * static_cast<std::uint64_t>(v.q) +
          static_cast<std::uint64_t>(v.e[i]);
  return idx;
}

inline FqVec vec_from_index(int q, int len, std::uint64_t idx) {
  std::vector<int> e(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    e[static_cast<std::size_t>(i)] = static_cast<int>(idx % q);
    idx /= static_cast<std::uint64_t>(q);
  }
  return FqVec(q, std::move(e));
}

}  // namespace expforge::fq
