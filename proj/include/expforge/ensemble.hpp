#pragma once

// The random linear code ensemble over F_q: every code of the form
// { u G + v : u in F_q^K } with G (K x N) and v (1 x N) drawn uniformly.
// Messages are indexed 0 .. q^K - 1 and map to message vectors by
// little-endian base-q digits.
//
// conditional_law() gives the distribution of one codeword given the
// values of up to k others: uniform over F_q^N unless the target message
// vector lies in span* of the conditioning message vectors, in which case
// the codeword is a deterministic affine combination of the conditioning
// codewords (coefficients summing to 1 mod q).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "expforge/fq.hpp"
#include "expforge/util.hpp"

namespace expforge::ensemble {

struct CodeEnsembleSpec {
  int q = 2;
  int N = 1;
  int K = 1;

  CodeEnsembleSpec() = default;
  CodeEnsembleSpec(int q_, int N_, int K_) : q(q_), N(N_), K(K_) {
    fq::check_modulus(q);
    if (N < 1) throw std::invalid_argument("spec: N must be >= 1");
    if (K < 1 || K > N)
      throw std::invalid_argument("spec: K must satisfy 1 <= K <= N");
    if (!checked_pow(static_cast<std::uint64_t>(q), static_cast<unsigned>(K)))
      throw std::invalid_argument("spec: q^K does not fit in 64 bits");
  }

  std::uint64_t message_count() const {
    return *checked_pow(static_cast<std::uint64_t>(q),
                        static_cast<unsigned>(K));
  }
  // Number of (G, v) pairs: q^(KN + N).  nullopt when it exceeds 64 bits.
  std::optional<std::uint64_t> codebook_count() const {
    return checked_pow(static_cast<std::uint64_t>(q),
                       static_cast<unsigned>(K * N + N));
  }
};

struct Codebook {
  CodeEnsembleSpec spec;
  fq::FqMat G;  // K x N
  fq::FqVec v;  // length N

  Codebook() = default;
  Codebook(CodeEnsembleSpec s, fq::FqMat g, fq::FqVec off)
      : spec(s), G(std::move(g)), v(std::move(off)) {
    if (G.q != spec.q || v.q != spec.q || G.rows != spec.K ||
        G.cols != spec.N || v.len() != spec.N)
      throw std::invalid_argument("codebook: shape or modulus mismatch");
  }
};

// Message index -> message vector (little-endian base-q digits, length K).
inline fq::FqVec message_vector(const CodeEnsembleSpec& spec, std::uint64_t m) {
  if (m >= spec.message_count())
    throw std::invalid_argument("message index out of range");
  return fq::vec_from_index(spec.q, spec.K, m);
}

inline fq::FqVec encode(const Codebook& book, std::uint64_t m) {
  return fq::vec_add(fq::mat_mul(message_vector(book.spec, m), book.G),
                     book.v);
}

// Index-addressable enumeration of all (G, v) pairs.  Index digits are
// little-endian base q: the first K*N digits fill G row-major, the last N
// fill v.  Disjoint index ranges partition the ensemble, so accumulations
// can be split across workers and merged in index order.
class CodebookEnumeration {
 public:
  explicit CodebookEnumeration(CodeEnsembleSpec spec,
                               std::uint64_t budget = (1ULL << 24))
      : spec_(spec) {
    const auto count = spec.codebook_count();
    require_budget(count, effective_budget(budget));
    count_ = *count;
  }

  std::uint64_t size() const { return count_; }

  Codebook at(std::uint64_t idx) const {
    if (idx >= count_) throw std::invalid_argument("codebook index out of range");
    const int q = spec_.q;
    std::vector<int> g(static_cast<std::size_t>(spec_.K) * spec_.N);
    for (auto& digit : g) {
      digit = static_cast<int>(idx % q);
      idx /= static_cast<std::uint64_t>(q);
    }
    std::vector<int> v(static_cast<std::size_t>(spec_.N));
    for (auto& digit : v) {
      digit = static_cast<int>(idx % q);
      idx /= static_cast<std::uint64_t>(q);
    }
    return Codebook(spec_, fq::FqMat(q, spec_.K, spec_.N, std::move(g)),
                    fq::FqVec(q, std::move(v)));
  }

 private:
  CodeEnsembleSpec spec_;
  std::uint64_t count_ = 0;
};

inline Codebook sample_codebook(const CodeEnsembleSpec& spec,
                                std::mt19937_64& eng) {
  std::vector<int> g(static_cast<std::size_t>(spec.K) * spec.N);
  for (auto& digit : g)
    digit = static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(spec.q)));
  std::vector<int> v(static_cast<std::size_t>(spec.N));
  for (auto& digit : v)
    digit = static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(spec.q)));
  return Codebook(spec, fq::FqMat(spec.q, spec.K, spec.N, std::move(g)),
                  fq::FqVec(spec.q, std::move(v)));
}

enum class LawKind { Uniform, PointMass };

struct ConditionalLaw {
  LawKind kind = LawKind::Uniform;
  std::optional<fq::FqVec> mass_point;  // set iff kind == PointMass
};

using Conditioning = std::vector<std::pair<std::uint64_t, fq::FqVec>>;

namespace detail {
inline ConditionalLaw law_unchecked(const CodeEnsembleSpec& spec,
                                    std::uint64_t target,
                                    const Conditioning& conditioning) {
  std::vector<fq::FqVec> us;
  us.reserve(conditioning.size());
  for (const auto& [m, x] : conditioning) us.push_back(message_vector(spec, m));
  const auto coeffs =
      fq::affine_combination_coeffs(message_vector(spec, target), us);
  if (!coeffs) return {LawKind::Uniform, std::nullopt};
  fq::FqVec mass = fq::FqVec::zero(spec.q, spec.N);
  for (std::size_t i = 0; i < conditioning.size(); ++i)
    mass = fq::vec_add(mass, fq::vec_scale((*coeffs)[i], conditioning[i].second));
  return {LawKind::PointMass, std::move(mass)};
}
}  // namespace detail

// Law of codeword `target` given the conditioning codeword assignments.
// Throws if the conditioning itself has ensemble probability zero (one of
// the conditioned codewords is forced by the others to a different value).
inline ConditionalLaw conditional_law(const CodeEnsembleSpec& spec,
                                      std::uint64_t target,
                                      const Conditioning& conditioning) {
  if (conditioning.empty())
    throw std::invalid_argument("conditional_law: need at least one pair");
  std::vector<std::uint64_t> seen{target};
  for (const auto& [m, x] : conditioning) {
    if (m >= spec.message_count())
      throw std::invalid_argument("conditional_law: message index out of range");
    if (x.q != spec.q || x.len() != spec.N)
      throw std::invalid_argument("conditional_law: codeword shape mismatch");
    for (std::uint64_t s : seen)
      if (s == m)
        throw std::invalid_argument("conditional_law: duplicate message index");
    seen.push_back(m);
  }
  // Realizability: each conditioned codeword must match what the others
  // force, when they force anything.
  if (conditioning.size() >= 2) {
    for (std::size_t j = 0; j < conditioning.size(); ++j) {
      Conditioning rest;
      for (std::size_t i = 0; i < conditioning.size(); ++i)
        if (i != j) rest.push_back(conditioning[i]);
      const auto law = detail::law_unchecked(spec, conditioning[j].first, rest);
      if (law.kind == LawKind::PointMass &&
          !(*law.mass_point == conditioning[j].second))
        throw std::invalid_argument(
            "conditional_law: conditioning has zero ensemble probability");
    }
  }
  return detail::law_unchecked(spec, target, conditioning);
}

}  // namespace expforge::ensemble
