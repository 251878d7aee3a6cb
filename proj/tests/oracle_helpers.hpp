#pragma once

// Test-only oracles, kept independent of the implementation paths they
// check.

#include <random>
#include <vector>

#include "hvoc/fock.hpp"
#include "hvoc/heisenberg.hpp"
#include "hvoc/rational.hpp"

namespace oracle {

// Coefficients of prod_{n>=1} (1-q^n)^{-d} up to q^N, by polynomial
// multiplication of the factor expansions (1-q^n)^{-d} = sum_j C(d-1+j,j)
// q^{nj}.
inline std::vector<long long> euler_product_coeffs(int d, int N) {
  std::vector<long long> acc(N + 1, 0);
  acc[0] = 1;
  for (int n = 1; n <= N; ++n) {
    std::vector<long long> factor(N + 1, 0);
    for (int j = 0; n * j <= N; ++j) {
      long long c = 1;
      for (int t = 1; t <= j; ++t) c = c * (d - 1 + t) / t;
      factor[n * j] = c;
    }
    std::vector<long long> next(N + 1, 0);
    for (int a = 0; a <= N; ++a) {
      if (acc[a] == 0) continue;
      for (int b = 0; a + b <= N; ++b) next[a + b] += acc[a] * factor[b];
    }
    acc = std::move(next);
  }
  return acc;
}

// Counts multisets of pairs (color in 1..d, level >= 1) with level sum N, by
// direct enumeration over the lexicographically ordered pair list.
inline long long count_colored_partitions(int d, int N, int min_color = 1,
                                          int max_level = -1) {
  if (N == 0) return 1;
  if (max_level < 0) max_level = N;
  long long total = 0;
  for (int c = min_color; c <= d; ++c) {
    int cap = (c == min_color) ? std::min(max_level, N) : N;
    for (int l = cap; l >= 1; --l)
      total += count_colored_partitions(d, N - l, c, l);
  }
  return total;
}

// Annihilation by repeated bracket commutation: a_c(m) a(-n) = [a_c(m),
// a(-n)] + a(-n) a_c(m), recursing until the vacuum kills the mode.
inline hvoc::FockVector annihilate_by_bracket(int dim, const hvoc::Mode& mode,
                                              const hvoc::Monomial& m) {
  using namespace hvoc;
  if (m.is_vacuum()) return FockVector::zero(dim);
  auto factors = m.factors();
  const Mode head = factors[0];
  std::vector<Mode> rest_modes(factors.begin() + 1, factors.end());
  const Monomial rest(rest_modes);
  FockVector out(dim);
  if (head.color == mode.color && head.level == -mode.level) {
    out.add_term(rest, Rational(mode.level));
  }
  FockVector deeper = annihilate_by_bracket(dim, mode, rest);
  for (const auto& [mm, c] : deeper.terms())
    out.add_term(mm.with_factor(head), c);
  return out;
}

// p(v) through the public word-application path.
inline hvoc::Rational p_value_by_word(int dim, const hvoc::Monomial& v) {
  using namespace hvoc;
  std::vector<Mode> word;
  auto factors = v.factors();
  for (auto it = factors.rbegin(); it != factors.rend(); ++it)
    word.emplace_back(it->color, -it->level);
  for (const Mode& f : factors) word.push_back(f);
  FockVector r = apply_word(word, FockVector::vacuum(dim));
  return r.coefficient(Monomial::vacuum());
}

struct Rng {
  std::mt19937 gen;
  explicit Rng(unsigned seed) : gen(seed) {}

  int uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  }

  hvoc::Monomial monomial(int dim, int max_weight) {
    std::vector<hvoc::Mode> factors;
    int budget = uniform(0, max_weight);
    while (budget > 0) {
      int level = uniform(1, budget);
      factors.emplace_back(uniform(1, dim), -level);
      budget -= level;
    }
    return hvoc::Monomial(std::move(factors));
  }

  hvoc::Rational rational() {
    int num = uniform(-12, 12);
    int den = uniform(1, 9);
    return hvoc::Rational(num, den);
  }

  hvoc::FockVector vector(int dim, int max_weight, int max_terms) {
    hvoc::FockVector v(dim);
    int terms = uniform(0, max_terms);
    for (int t = 0; t < terms; ++t)
      v.add_term(monomial(dim, max_weight), rational());
    return v;
  }
};

}  // namespace oracle
