#pragma once

#include <algorithm>
#include <compare>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hvoc/rational.hpp"

namespace hvoc {

struct rank_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// One oscillator mode a_color(level).  level < 0 creates, level > 0
// annihilates; there is no level-0 mode.
struct Mode {
  int color;
  int level;

  Mode(int color_, int level_) : color(color_), level(level_) {
    if (color < 1) throw std::invalid_argument("mode color must be >= 1");
    if (level == 0) throw std::invalid_argument("mode level must be nonzero");
  }

  // (color asc, level asc); on creation modes this is color asc, |level| desc,
  // which is the canonical factor order inside a monomial.
  friend auto operator<=>(const Mode&, const Mode&) = default;
};

// Product of creation modes in canonical order.  The empty product is the
// vacuum.  Equal multisets of factors compare equal.
class Monomial {
 public:
  Monomial() = default;

  explicit Monomial(std::vector<Mode> factors) : factors_(std::move(factors)) {
    for (const Mode& m : factors_) {
      if (m.level >= 0)
        throw std::invalid_argument("monomial factors must be creation modes");
    }
    std::sort(factors_.begin(), factors_.end());
  }

  Monomial(std::initializer_list<Mode> factors)
      : Monomial(std::vector<Mode>(factors)) {}

  static Monomial vacuum() { return Monomial(); }

  bool is_vacuum() const { return factors_.empty(); }
  std::span<const Mode> factors() const { return factors_; }
  int size() const { return static_cast<int>(factors_.size()); }

  int weight() const {
    int w = 0;
    for (const Mode& m : factors_) w += -m.level;
    return w;
  }

  int max_color() const {
    int c = 0;
    for (const Mode& m : factors_) c = std::max(c, m.color);
    return c;
  }

  int multiplicity(const Mode& m) const {
    return static_cast<int>(std::count(factors_.begin(), factors_.end(), m));
  }

  Monomial with_factor(const Mode& m) const {
    if (m.level >= 0)
      throw std::invalid_argument("monomial factors must be creation modes");
    Monomial r = *this;
    r.factors_.insert(
        std::upper_bound(r.factors_.begin(), r.factors_.end(), m), m);
    return r;
  }

  // Removes one copy of a factor; the factor must be present.
  Monomial without_factor(const Mode& m) const {
    Monomial r = *this;
    auto it = std::find(r.factors_.begin(), r.factors_.end(), m);
    internal_check(it != r.factors_.end(), "factor to remove not present");
    r.factors_.erase(it);
    return r;
  }

  // Total order: weight, then factor count, then lexicographic on factors.
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.factors_ == b.factors_;
  }
  friend std::strong_ordering operator<=>(const Monomial& a,
                                          const Monomial& b) {
    if (auto c = a.weight() <=> b.weight(); c != 0) return c;
    if (auto c = a.size() <=> b.size(); c != 0) return c;
    return a.factors_ <=> b.factors_;
  }

 private:
  std::vector<Mode> factors_;
};

// Finite rational linear combination of monomials over d oscillator colors.
// No zero coefficient is ever stored.
class FockVector {
 public:
  explicit FockVector(int dim) : dim_(dim) {
    if (dim < 1) throw rank_error("dimension must be >= 1");
  }

  static FockVector zero(int dim) { return FockVector(dim); }

  static FockVector vacuum(int dim) {
    FockVector v(dim);
    v.add_term(Monomial::vacuum(), Rational(1));
    return v;
  }

  static FockVector unit(int dim, const Monomial& m,
                         const Rational& coeff = Rational(1)) {
    FockVector v(dim);
    v.add_term(m, coeff);
    return v;
  }

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const Monomial& m, const Rational& coeff) {
    if (coeff == 0) return;
    if (m.max_color() > dim_)
      throw rank_error("monomial color exceeds dimension");
    auto [it, inserted] = terms_.emplace(m, coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == 0) terms_.erase(it);
    }
  }

  FockVector& operator+=(const FockVector& o) {
    require_same_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  FockVector& operator-=(const FockVector& o) {
    require_same_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  FockVector& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend FockVector operator+(FockVector a, const FockVector& b) {
    return a += b;
  }
  friend FockVector operator-(FockVector a, const FockVector& b) {
    return a -= b;
  }
  friend FockVector operator*(const Rational& s, FockVector v) {
    return v *= s;
  }

  friend bool operator==(const FockVector& a, const FockVector& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  // Weight of the unique homogeneous component, or -1 for the zero vector.
  // Throws if the vector is not homogeneous.
  int homogeneous_weight() const {
    int w = -1;
    for (const auto& [m, c] : terms_) {
      if (w == -1)
        w = m.weight();
      else
        internal_check(w == m.weight(), "vector is not homogeneous");
    }
    return w;
  }

  int max_weight() const {
    int w = 0;
    for (const auto& [m, c] : terms_) w = std::max(w, m.weight());
    return w;
  }

 private:
  void require_same_dim(const FockVector& o) const {
    if (dim_ != o.dim_) throw rank_error("dimension mismatch");
  }

  int dim_;
  std::map<Monomial, Rational> terms_;
};

// Finite rational linear combination of monomial (x) monomial pairs.
class TensorVector {
 public:
  explicit TensorVector(int dim) : dim_(dim) {
    if (dim < 1) throw rank_error("dimension must be >= 1");
  }

  static TensorVector zero(int dim) { return TensorVector(dim); }

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<std::pair<Monomial, Monomial>, Rational>& terms() const {
    return terms_;
  }

  Rational coefficient(const Monomial& a, const Monomial& b) const {
    auto it = terms_.find({a, b});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const Monomial& a, const Monomial& b, const Rational& coeff) {
    if (coeff == 0) return;
    if (a.max_color() > dim_ || b.max_color() > dim_)
      throw rank_error("monomial color exceeds dimension");
    auto [it, inserted] = terms_.emplace(std::make_pair(a, b), coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == 0) terms_.erase(it);
    }
  }

  TensorVector& operator+=(const TensorVector& o) {
    require_same_dim(o);
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
    return *this;
  }
  TensorVector& operator-=(const TensorVector& o) {
    require_same_dim(o);
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
    return *this;
  }
  TensorVector& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }

  friend TensorVector operator+(TensorVector a, const TensorVector& b) {
    return a += b;
  }
  friend TensorVector operator-(TensorVector a, const TensorVector& b) {
    return a -= b;
  }
  friend TensorVector operator*(const Rational& s, TensorVector t) {
    return t *= s;
  }

  friend bool operator==(const TensorVector& a, const TensorVector& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  void require_same_dim(const TensorVector& o) const {
    if (dim_ != o.dim_) throw rank_error("dimension mismatch");
  }

  int dim_;
  std::map<std::pair<Monomial, Monomial>, Rational> terms_;
};

inline TensorVector tensor(const FockVector& u, const FockVector& w) {
  if (u.dim() != w.dim()) throw rank_error("dimension mismatch");
  TensorVector t(u.dim());
  for (const auto& [mu, cu] : u.terms())
    for (const auto& [mw, cw] : w.terms()) t.add_term(mu, mw, cu * cw);
  return t;
}

// Swaps the two tensor slots in every term.
inline TensorVector transpose_left(const TensorVector& t) {
  TensorVector r(t.dim());
  for (const auto& [k, c] : t.terms()) r.add_term(k.second, k.first, c);
  return r;
}

// All monomials of the given weight over dim colors, in canonical order.
// The count is the q^weight coefficient of prod_{n>=1} (1-q^n)^{-dim}.
inline std::vector<Monomial> basis_of_weight(int dim, int weight) {
  if (dim < 1) throw rank_error("dimension must be >= 1");
  if (weight < 0) throw std::invalid_argument("weight must be >= 0");
  std::vector<Monomial> out;
  std::vector<Mode> current;
  // Factors are chosen nondecreasing in the canonical factor order, so each
  // multiset is produced exactly once.
  auto recurse = [&](auto&& self, int remaining, int min_color,
                     int max_level_abs) -> void {
    if (remaining == 0) {
      out.emplace_back(current);
      return;
    }
    for (int c = min_color; c <= dim; ++c) {
      int cap = (c == min_color) ? std::min(max_level_abs, remaining)
                                 : remaining;
      for (int l = cap; l >= 1; --l) {
        current.emplace_back(c, -l);
        self(self, remaining - l, c, l);
        current.pop_back();
      }
    }
  };
  recurse(recurse, weight, 1, weight);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Monomial> basis_up_to_weight(int dim, int max_weight) {
  std::vector<Monomial> out;
  for (int n = 0; n <= max_weight; ++n) {
    auto level = basis_of_weight(dim, n);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

}  // namespace hvoc
