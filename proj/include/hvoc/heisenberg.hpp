#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hvoc/fock.hpp"
#include "hvoc/rational.hpp"

namespace hvoc {

// Action of a single mode.  Creation multiplies; annihilation a_c(n) acts by
// the bracket [a_c(n), a_c(-n)] = n on each matching factor:
// multiplicity * n * (monomial with one factor a_c(-n) removed).
inline FockVector apply_mode(const Mode& mode, const FockVector& v) {
  if (mode.color > v.dim()) throw rank_error("mode color exceeds dimension");
  FockVector out(v.dim());
  if (mode.level < 0) {
    for (const auto& [m, c] : v.terms()) out.add_term(m.with_factor(mode), c);
    return out;
  }
  const Mode partner(mode.color, -mode.level);
  for (const auto& [m, c] : v.terms()) {
    int mult = m.multiplicity(partner);
    if (mult == 0) continue;
    out.add_term(m.without_factor(partner),
                 c * Rational(mult) * Rational(mode.level));
  }
  return out;
}

// Composition in sequence order; the rightmost mode acts first.
inline FockVector apply_word(std::span<const Mode> word, const FockVector& v) {
  FockVector out = v;
  for (auto it = word.rbegin(); it != word.rend(); ++it)
    out = apply_mode(*it, out);
  return out;
}

// p(v): annihilating a monomial with its own reversed mode word yields this
// positive scalar.  Closed form: product over distinct (color, n) with
// multiplicity m of m! * n^m.
inline Integer p_value(const Monomial& v) {
  Integer p(1);
  auto factors = v.factors();
  for (size_t i = 0; i < factors.size();) {
    size_t j = i;
    while (j < factors.size() && factors[j] == factors[i]) ++j;
    long long mult = static_cast<long long>(j - i);
    p *= factorial(mult) * int_pow(-factors[i].level, mult);
    i = j;
  }
  return p;
}

// The diagonal bilinear form: (u, v) = p(u) if u = v on monomials, 0
// otherwise, extended bilinearly.  Symmetric, graded, nondegenerate.
inline Rational bilinear_form(const FockVector& u, const FockVector& v) {
  if (u.dim() != v.dim()) throw rank_error("dimension mismatch");
  Rational r(0);
  const auto& a = u.terms();
  const auto& b = v.terms();
  // Both maps share the monomial order; walk them together.
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      r += ia->second * ib->second * Rational(p_value(ia->first));
      ++ia;
      ++ib;
    }
  }
  return r;
}

// Tensor extension: (u1 (x) u2, v1 (x) v2) = (u1, v1)(u2, v2).
inline Rational bilinear_form(const TensorVector& u, const TensorVector& v) {
  if (u.dim() != v.dim()) throw rank_error("dimension mismatch");
  Rational r(0);
  const auto& a = u.terms();
  const auto& b = v.terms();
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      r += ia->second * ib->second *
           Rational(p_value(ia->first.first) * p_value(ia->first.second));
      ++ia;
      ++ib;
    }
  }
  return r;
}

// One factor of an ordered product of mode series: the order-n derivative
// series of the color-c current, i.e. (1/(n-1)!) (d/dx)^{n-1} a_c(x).
struct SeriesFactor {
  int color;
  int order;  // n >= 1
};

inline std::vector<SeriesFactor> series_factors(const Monomial& m) {
  std::vector<SeriesFactor> out;
  out.reserve(m.factors().size());
  for (const Mode& f : m.factors()) out.push_back({f.color, -f.level});
  return out;
}

// Which half of the factor series carries which modes.
//
//   current: creation a(-(n+e)) at exponents e >= 0, annihilation a(-n-e)
//            at exponents e <= -n-1 (the current a(x) and its derivatives).
//   adjoint: every mode negated, exponents kept; coefficient-wise this is the
//            adjoint of the current kind under the diagonal form.
//
// The scalar attached to exponent e is the same for both kinds:
//   e >= 0:      C(n-1+e, n-1)
//   e <= -n-1:   (-1)^(n-1) C(-e-1, n-1)
// and exponents -n <= e <= -1 carry no mode at all.
enum class SeriesKind { current, adjoint };

inline Integer series_coefficient(int order, int exponent) {
  if (exponent >= 0) return binomial(order - 1 + exponent, order - 1);
  if (exponent <= -order - 1) {
    Integer c = binomial(-exponent - 1, order - 1);
    return (order % 2 == 0) ? -c : c;
  }
  return Integer(0);
}

namespace detail {

// Expands the normal-ordered factor product on one target monomial by a
// layer-per-factor sweep.  A layer maps (remaining target factors, exponent
// sum so far) to the linear combination of created-mode monomials
// accumulated along all choice paths reaching that state; symmetric choices
// of equal factors merge instead of branching.
struct SeriesApplyDriver {
  std::span<const SeriesFactor> factors;
  int lo, hi;
  SeriesKind kind;
  int dim;
  std::map<int, FockVector>* out = nullptr;

  using State = std::pair<Monomial, int>;           // remaining avail, sum
  using Partial = std::map<Monomial, Rational>;     // created part
  std::vector<int> suffix_order;

  void run(const Monomial& target, const Rational& coeff) {
    suffix_order.assign(factors.size() + 1, 0);
    for (size_t i = factors.size(); i-- > 0;)
      suffix_order[i] = suffix_order[i + 1] + factors[i].order;

    std::map<State, Partial> layer;
    layer[{target, 0}][Monomial::vacuum()] = Rational(1);

    for (size_t i = 0; i < factors.size(); ++i) {
      const auto [c, n] = factors[i];
      std::map<State, Partial> next;
      auto add = [&](const Monomial& avail, int sum, const Partial& part,
                     const Integer& scale, const Mode* created) {
        Partial& slot = next[{avail, sum}];
        for (const auto& [m, r] : part) {
          Monomial key = created ? m.with_factor(*created) : m;
          Rational add_val = r * Rational(scale);
          auto [it, inserted] = slot.emplace(std::move(key), add_val);
          if (!inserted) {
            it->second += add_val;
            if (it->second == 0) slot.erase(it);
          }
        }
      };
      for (const auto& [state, part] : layer) {
        const auto& [avail, sum] = state;
        const int avail_weight = avail.weight();
        // Reachable-window pruning: with the current kind the remaining
        // factors can lower the sum by at most suffix_order + avail weight;
        // with the adjoint kind they can raise it by at most avail weight.
        if (kind == SeriesKind::current) {
          if (sum - suffix_order[i] - avail_weight > hi) continue;
        } else {
          if (sum + avail_weight < lo) continue;
        }

        // Annihilation: one available factor of matching color.
        auto fs = avail.factors();
        for (size_t t = 0; t < fs.size();) {
          size_t u = t;
          while (u < fs.size() && fs[u] == fs[t]) ++u;
          const Mode mode = fs[t];
          const int mult = static_cast<int>(u - t);
          t = u;
          if (mode.color != c) continue;
          const int level = -mode.level;
          const int e =
              (kind == SeriesKind::current) ? -n - level : level - n;
          if (kind == SeriesKind::adjoint && e < 0) continue;
          Integer sc = series_coefficient(n, e);
          if (sc == 0) continue;
          add(avail.without_factor(mode), sum + e, part,
              sc * Integer(level) * Integer(mult), nullptr);
        }

        // Creation: the exponent loop is bounded by what the remaining
        // factors can still compensate.
        if (kind == SeriesKind::current) {
          const int e_max =
              hi - sum + suffix_order[i + 1] + avail_weight;
          for (int e = 0; e <= e_max; ++e) {
            Integer sc = series_coefficient(n, e);
            const Mode created(c, -(n + e));
            add(avail, sum + e, part, sc, &created);
          }
        } else {
          const int e_min = lo - sum - avail_weight;
          for (int e = -n - 1; e >= e_min; --e) {
            Integer sc = series_coefficient(n, e);
            const Mode created(c, -(-n - e));
            add(avail, sum + e, part, sc, &created);
          }
        }
      }
      layer = std::move(next);
    }

    for (const auto& [state, part] : layer) {
      const auto& [avail, sum] = state;
      if (sum < lo || sum > hi) continue;
      for (const auto& [created, r] : part) {
        std::vector<Mode> modes(avail.factors().begin(),
                                avail.factors().end());
        modes.insert(modes.end(), created.factors().begin(),
                     created.factors().end());
        out->at(sum).add_term(Monomial(std::move(modes)), r * coeff);
      }
    }
  }
};

}  // namespace detail

// Coefficients of the normal-ordered product of the factor series, applied to
// a target vector, for every exponent in [lo, hi].  Normal ordering applies
// all annihilation modes before all creation modes; each retained coefficient
// is a finite sum.
inline std::map<int, FockVector> ordered_series_apply_range(
    std::span<const SeriesFactor> factors, int lo, int hi,
    const FockVector& target, SeriesKind kind) {
  if (lo > hi) throw std::invalid_argument("empty exponent range");
  std::map<int, FockVector> out;
  for (int e = lo; e <= hi; ++e) out.emplace(e, FockVector::zero(target.dim()));
  detail::SeriesApplyDriver driver;
  driver.factors = factors;
  driver.lo = lo;
  driver.hi = hi;
  driver.kind = kind;
  driver.dim = target.dim();
  driver.out = &out;
  for (const auto& [m, c] : target.terms()) driver.run(m, c);
  return out;
}

inline FockVector ordered_series_apply(std::span<const SeriesFactor> factors,
                                       int exponent, const FockVector& target,
                                       SeriesKind kind) {
  auto r = ordered_series_apply_range(factors, exponent, exponent, target,
                                      kind);
  return r.at(exponent);
}

// Coefficient of x^exponent in the normal-ordered current product applied to
// v (the expansion of Y on the factor list).
inline FockVector normal_order_apply(std::span<const SeriesFactor> factors,
                                     int exponent, const FockVector& v) {
  return ordered_series_apply(factors, exponent, v, SeriesKind::current);
}

}  // namespace hvoc
