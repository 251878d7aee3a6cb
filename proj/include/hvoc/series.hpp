#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hvoc/fock.hpp"
#include "hvoc/heisenberg.hpp"
#include "hvoc/rational.hpp"
#include "hvoc/voa.hpp"
#include "hvoc/voc.hpp"

namespace hvoc {

struct window_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Var { x, x0, x1, x2 };

inline const char* var_name(Var v) {
  switch (v) {
    case Var::x: return "x";
    case Var::x0: return "x0";
    case Var::x1: return "x1";
    case Var::x2: return "x2";
  }
  return "?";
}

// Per-variable inclusive exponent bounds.
class ExponentWindow {
 public:
  ExponentWindow(std::vector<Var> vars, std::vector<std::pair<int, int>> bounds)
      : vars_(std::move(vars)), bounds_(std::move(bounds)) {
    if (vars_.empty() || vars_.size() != bounds_.size())
      throw window_error("window must bound at least one variable");
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (bounds_[i].first > bounds_[i].second)
        throw window_error("degenerate window: lo > hi");
      for (size_t j = i + 1; j < vars_.size(); ++j)
        if (vars_[i] == vars_[j])
          throw window_error("duplicate variable in window");
    }
  }

  static ExponentWindow cube(std::vector<Var> vars, int lo, int hi) {
    std::vector<std::pair<int, int>> bounds(vars.size(), {lo, hi});
    return ExponentWindow(std::move(vars), std::move(bounds));
  }

  size_t size() const { return vars_.size(); }
  const std::vector<Var>& vars() const { return vars_; }
  std::pair<int, int> bounds(size_t i) const { return bounds_[i]; }

  std::optional<size_t> index_of(Var v) const {
    for (size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == v) return i;
    return std::nullopt;
  }

  bool contains(const std::vector<int>& exps) const {
    if (exps.size() != vars_.size()) return false;
    for (size_t i = 0; i < exps.size(); ++i)
      if (exps[i] < bounds_[i].first || exps[i] > bounds_[i].second)
        return false;
    return true;
  }

  long long cell_count() const {
    long long n = 1;
    for (const auto& [lo, hi] : bounds_) n *= (hi - lo + 1);
    return n;
  }

  friend bool operator==(const ExponentWindow&, const ExponentWindow&) =
      default;

 private:
  std::vector<Var> vars_;
  std::vector<std::pair<int, int>> bounds_;
};

namespace detail {
inline bool payload_is_zero(const Rational& r) { return r == 0; }
inline bool payload_is_zero(const FockVector& v) { return v.is_zero(); }
inline bool payload_is_zero(const TensorVector& v) { return v.is_zero(); }
}  // namespace detail

// Finite Laurent coefficients within a window.  An exactness flag per
// variable records whether the window provably covers every nonzero
// coefficient in that direction, or is only a sample.
template <class Payload>
class WindowedSeries {
 public:
  WindowedSeries(ExponentWindow window, Payload zero)
      : window_(std::move(window)),
        exact_(window_.size(), false),
        zero_(std::move(zero)) {}

  const ExponentWindow& window() const { return window_; }

  void set_exact(Var v, bool flag) {
    auto i = window_.index_of(v);
    if (!i) throw window_error("variable not in window");
    exact_[*i] = flag;
  }
  bool exact(Var v) const {
    auto i = window_.index_of(v);
    if (!i) throw window_error("variable not in window");
    return exact_[*i];
  }

  // Adds into a cell, silently discarding exponents outside the window
  // (truncation).
  void accumulate(const std::vector<int>& exps, const Payload& p) {
    if (detail::payload_is_zero(p)) return;
    if (!window_.contains(exps)) return;
    auto [it, inserted] = coeffs_.emplace(exps, p);
    if (!inserted) {
      it->second += p;
      if (detail::payload_is_zero(it->second)) coeffs_.erase(it);
    }
  }

  // accumulate(exps, scale * p) without materializing the product.
  void accumulate_scaled(const std::vector<int>& exps, const Payload& p,
                         const Rational& scale) {
    if (scale == 0 || detail::payload_is_zero(p)) return;
    if (!window_.contains(exps)) return;
    auto it = coeffs_.find(exps);
    if (it == coeffs_.end()) {
      Payload scaled = p;
      scaled *= scale;
      coeffs_.emplace(exps, std::move(scaled));
      return;
    }
    Payload scaled = p;
    scaled *= scale;
    it->second += scaled;
    if (detail::payload_is_zero(it->second)) coeffs_.erase(it);
  }

  const Payload& at(const std::vector<int>& exps) const {
    auto it = coeffs_.find(exps);
    return it == coeffs_.end() ? zero_ : it->second;
  }

  const std::map<std::vector<int>, Payload>& coefficients() const {
    return coeffs_;
  }

  WindowedSeries restricted(const ExponentWindow& sub) const {
    if (sub.vars() != window_.vars())
      throw window_error("restriction must keep the variable set");
    for (size_t i = 0; i < sub.size(); ++i) {
      if (sub.bounds(i).first < window_.bounds(i).first ||
          sub.bounds(i).second > window_.bounds(i).second)
        throw window_error("restriction window exceeds original");
    }
    WindowedSeries out(sub, zero_);
    out.exact_ = exact_;
    for (const auto& [e, p] : coeffs_)
      if (sub.contains(e)) out.coeffs_.emplace(e, p);
    return out;
  }

  WindowedSeries& operator+=(const WindowedSeries& o) {
    if (o.window_.vars() != window_.vars())
      throw window_error("variable set mismatch");
    for (const auto& [e, p] : o.coeffs_) accumulate(e, p);
    return *this;
  }
  WindowedSeries& operator-=(const WindowedSeries& o) {
    if (o.window_.vars() != window_.vars())
      throw window_error("variable set mismatch");
    for (const auto& [e, p] : o.coeffs_) {
      Payload neg = p;
      neg *= Rational(-1);
      accumulate(e, neg);
    }
    return *this;
  }

  // Same window and same stored coefficients.
  friend bool operator==(const WindowedSeries& a, const WindowedSeries& b) {
    return a.window_ == b.window_ && a.coeffs_ == b.coeffs_;
  }

  // First cell whose coefficients differ, for counterexample reporting.
  static std::optional<std::vector<int>> first_mismatch(
      const WindowedSeries& a, const WindowedSeries& b) {
    for (const auto& [e, p] : a.coeffs_)
      if (!(b.at(e) == p)) return e;
    for (const auto& [e, p] : b.coeffs_)
      if (!(a.at(e) == p)) return e;
    return std::nullopt;
  }

 private:
  ExponentWindow window_;
  std::vector<bool> exact_;
  Payload zero_;
  std::map<std::vector<int>, Payload> coeffs_;
};

using ScalarSeries = WindowedSeries<Rational>;

// (a sign*b)^n = sum_{j>=0} C(n,j) sign^j a^{n-j} b^j, truncated to the
// window; C(n,j) is the generalized binomial for negative n.
inline ScalarSeries binomial_expand(Var a_var, Var b_var, int n, int sign,
                                    const ExponentWindow& window) {
  if (a_var == b_var) throw window_error("binomial variables must differ");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("sign must be +1 or -1");
  auto ia = window.index_of(a_var);
  auto ib = window.index_of(b_var);
  if (!ia || !ib || window.size() != 2)
    throw window_error("window must bound exactly the two variables");
  ScalarSeries out(window, Rational(0));
  const auto [blo, bhi] = window.bounds(*ib);
  std::vector<int> exps(2, 0);
  for (int j = std::max(0, blo); j <= bhi; ++j) {
    Integer c = binomial(n, j);
    if (sign < 0 && j % 2 == 1) c = -c;
    exps[*ia] = n - j;
    exps[*ib] = j;
    out.accumulate(exps, Rational(c));
  }
  const bool covers = blo <= 0 && n >= 0 && bhi >= n;
  out.set_exact(b_var, covers);
  out.set_exact(a_var, covers);
  return out;
}

// The three delta-function factors of the Jacobi identity, each carrying its
// leading inverse-variable prefactor, plus the plain one-variable delta.
enum class DeltaPattern {
  plain_x,                  // delta(x): every coefficient 1
  x1_minus_x2_over_x0,      // x0^{-1} delta((x1-x2)/x0)
  x2_minus_x1_over_neg_x0,  // x0^{-1} delta((x2-x1)/-x0)
  x1_minus_x0_over_x2,      // x2^{-1} delta((x1-x0)/x2)
};

// Expansion convention: the binomial numerator is expanded in nonnegative
// powers of its second-listed variable.
inline ScalarSeries delta_series(DeltaPattern pattern,
                                 const ExponentWindow& window) {
  ScalarSeries out(window, Rational(0));
  if (pattern == DeltaPattern::plain_x) {
    if (window.size() != 1)
      throw window_error("plain delta needs a one-variable window");
    const auto [lo, hi] = window.bounds(0);
    for (int e = lo; e <= hi; ++e) out.accumulate({e}, Rational(1));
    return out;
  }
  auto i0 = window.index_of(Var::x0);
  auto i1 = window.index_of(Var::x1);
  auto i2 = window.index_of(Var::x2);
  if (!i0 || !i1 || !i2 || window.size() != 3)
    throw window_error("window must bound x0, x1, x2");
  std::vector<int> exps(3, 0);
  auto put = [&](int e0, int e1, int e2, const Rational& c) {
    exps[*i0] = e0;
    exps[*i1] = e1;
    exps[*i2] = e2;
    out.accumulate(exps, c);
  };
  switch (pattern) {
    case DeltaPattern::x1_minus_x2_over_x0: {
      // sum_n (x1-x2)^n x0^{-n-1}
      const auto [lo0, hi0] = window.bounds(*i0);
      const auto [lo2, hi2] = window.bounds(*i2);
      for (int e0 = lo0; e0 <= hi0; ++e0) {
        const int n = -e0 - 1;
        for (int j = std::max(0, lo2); j <= hi2; ++j) {
          Rational c(binomial(n, j));
          if (j % 2 == 1) c = -c;
          put(e0, n - j, j, c);
        }
      }
      break;
    }
    case DeltaPattern::x2_minus_x1_over_neg_x0: {
      // sum_n (x2-x1)^n (-x0)^{-n} x0^{-1}
      const auto [lo0, hi0] = window.bounds(*i0);
      const auto [lo1, hi1] = window.bounds(*i1);
      for (int e0 = lo0; e0 <= hi0; ++e0) {
        const int n = -e0 - 1;
        for (int j = std::max(0, lo1); j <= hi1; ++j) {
          Rational c(binomial(n, j));
          if (((j + n) % 2 + 2) % 2 == 1) c = -c;
          put(e0, j, n - j, c);
        }
      }
      break;
    }
    case DeltaPattern::x1_minus_x0_over_x2: {
      // sum_n (x1-x0)^n x2^{-n-1}
      const auto [lo2, hi2] = window.bounds(*i2);
      const auto [lo0, hi0] = window.bounds(*i0);
      for (int e2 = lo2; e2 <= hi2; ++e2) {
        const int n = -e2 - 1;
        for (int j = std::max(0, lo0); j <= hi0; ++j) {
          Rational c(binomial(n, j));
          if (j % 2 == 1) c = -c;
          put(j, n - j, e2, c);
        }
      }
      break;
    }
    case DeltaPattern::plain_x:
      break;
  }
  return out;
}

// Product of a scalar series with a payload series, truncated to the output
// window.  The factor series must already be materialized on windows wide
// enough to cover every contribution to the output window; the Jacobi
// assemblers below derive such windows from the weight formula.
template <class Payload>
WindowedSeries<Payload> convolve_truncated(const ScalarSeries& a,
                                           const WindowedSeries<Payload>& b,
                                           const ExponentWindow& out_window,
                                           const Payload& zero) {
  if (out_window.vars() != a.window().vars())
    throw window_error("output variables must match the scalar factor");
  std::vector<size_t> pos;
  for (Var v : b.window().vars()) {
    auto i = out_window.index_of(v);
    if (!i) throw window_error("payload variable missing from output window");
    pos.push_back(*i);
  }
  WindowedSeries<Payload> out(out_window, zero);
  std::vector<int> exps(out_window.size(), 0);
  for (const auto& [ea, ca] : a.coefficients()) {
    for (const auto& [eb, cb] : b.coefficients()) {
      exps.assign(ea.begin(), ea.end());
      for (size_t t = 0; t < pos.size(); ++t) exps[pos[t]] += eb[t];
      out.accumulate_scaled(exps, cb, ca);
    }
  }
  return out;
}

namespace detail {

struct Range {
  int lo, hi;
};

// Empty derived ranges collapse to a single cell of zeros.
inline Range make_range(int lo, int hi) {
  return Range{std::min(lo, hi), hi};
}

inline long long range_count(const Range& r) { return r.hi - r.lo + 1; }

inline void guard_cells(long long cells, long long max_cells) {
  if (cells > max_cells)
    throw window_error(
        "derived internal summation grid exceeds the configured budget: " +
        std::to_string(cells) + " cells, budget " + std::to_string(max_cells));
}

inline ExponentWindow cube3(int lo, int hi) {
  return ExponentWindow::cube({Var::x0, Var::x1, Var::x2}, lo, hi);
}

// Exponent-sum band of the cells a convolution with a delta factor can ever
// read: every delta term keeps the total table exponent a + b equal to the
// total window exponent shifted by one prefactor power, so only
// [3 lo + 1, 3 hi + 1] is reachable from the cube [lo, hi]^3.
struct Band {
  int lo, hi;
  bool contains(int s) const { return s >= lo && s <= hi; }
};

inline Band band_for_cube(int lo, int hi) { return {3 * lo + 1, 3 * hi + 1}; }

// Nested operator table outer_{-a-1}(inner_{-b-1} target) on an explicit
// grid, variables (outer_var^a, inner_var^b).  A cache makes repeated
// monomial-level evaluations across tables free.
inline WindowedSeries<FockVector> nested_y_table(
    const VoaContext& ctx, const FockVector& outer, const FockVector& inner,
    const FockVector& target, Var outer_var, Var inner_var, Range a, Range b,
    Band band, CachedY* ycache = nullptr) {
  ExponentWindow grid({outer_var, inner_var}, {{a.lo, a.hi}, {b.lo, b.hi}});
  WindowedSeries<FockVector> out(grid, FockVector::zero(ctx.dim()));
  for (int eb = b.lo; eb <= b.hi; ++eb) {
    const int ea_lo = std::max(a.lo, band.lo - eb);
    const int ea_hi = std::min(a.hi, band.hi - eb);
    if (ea_lo > ea_hi) continue;
    FockVector z = ycache != nullptr
                       ? ycache->apply(inner, -eb - 1, target)
                       : ctx.y_coefficient(inner, -eb - 1, target);
    if (z.is_zero()) continue;
    if (ycache != nullptr) {
      for (int ea = ea_lo; ea <= ea_hi; ++ea)
        out.accumulate({ea, eb}, ycache->apply(outer, -ea - 1, z));
    } else {
      auto outer_slices =
          ctx.y_coefficient_range(outer, -ea_hi - 1, -ea_lo - 1, z);
      for (const auto& [ka, val] : outer_slices) {
        if (val.is_zero()) continue;
        out.accumulate({-ka - 1, eb}, val);
      }
    }
  }
  return out;
}

// (u_{-a-1} v)_{-b-1} w on an explicit grid, variables (x0^a, x2^b).
inline WindowedSeries<FockVector> iterate_y_table(
    const VoaContext& ctx, const FockVector& u, const FockVector& v,
    const FockVector& w, Range a, Range b, Band band,
    CachedY* ycache = nullptr) {
  ExponentWindow grid({Var::x0, Var::x2}, {{a.lo, a.hi}, {b.lo, b.hi}});
  WindowedSeries<FockVector> out(grid, FockVector::zero(ctx.dim()));
  for (int ea = a.lo; ea <= a.hi; ++ea) {
    const int eb_lo = std::max(b.lo, band.lo - ea);
    const int eb_hi = std::min(b.hi, band.hi - ea);
    if (eb_lo > eb_hi) continue;
    FockVector z = ycache != nullptr ? ycache->apply(u, -ea - 1, v)
                                     : ctx.y_coefficient(u, -ea - 1, v);
    if (z.is_zero()) continue;
    if (ycache != nullptr) {
      for (int eb = eb_lo; eb <= eb_hi; ++eb)
        out.accumulate({ea, eb}, ycache->apply(z, -eb - 1, w));
    } else {
      auto outer_slices =
          ctx.y_coefficient_range(z, -eb_hi - 1, -eb_lo - 1, w);
      for (const auto& [kb, val] : outer_slices) {
        if (val.is_zero()) continue;
        out.accumulate({ea, -kb - 1}, val);
      }
    }
  }
  return out;
}

// Delta factor materialized on the window that covers every shift of the
// output cube by the operator grid.
inline ScalarSeries delta_for(DeltaPattern pattern, int lo, int hi, Var var_a,
                              Range a, Var var_b, Range b) {
  std::vector<Var> vars = {Var::x0, Var::x1, Var::x2};
  std::vector<std::pair<int, int>> bounds(3, {lo, hi});
  auto widen = [&](Var v, Range r) {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == v) bounds[i] = {lo - r.hi, hi - r.lo};
  };
  widen(var_a, a);
  widen(var_b, b);
  return delta_series(pattern, ExponentWindow(vars, std::move(bounds)));
}

// Range of wt(ma) + wt(mb) over term pairs; {0, -1} when either factor is 0.
inline std::pair<int, int> pair_weight_span(const FockVector& a,
                                            const FockVector& b) {
  if (a.is_zero() || b.is_zero()) return {0, -1};
  int amin = a.terms().begin()->first.weight();
  int amax = a.terms().rbegin()->first.weight();
  int bmin = b.terms().begin()->first.weight();
  int bmax = b.terms().rbegin()->first.weight();
  return {amin + bmin, amax + bmax};
}

}  // namespace detail

struct JacobiSides {
  WindowedSeries<FockVector> lhs;
  WindowedSeries<FockVector> rhs;
};

// Both sides of the operator Jacobi identity applied to w, as three-variable
// series on [lo,hi]^3.  Every retained coefficient is a finite sum: the
// internal grids below are derived from the weight formula, so the
// truncation to the window is exact.
inline JacobiSides jacobi_sides_voa(const VoaContext& ctx, const FockVector& u,
                                    const FockVector& v, const FockVector& w,
                                    int lo, int hi,
                                    long long max_cells = 4'000'000,
                                    CachedY* ycache = nullptr) {
  if (lo > hi) throw window_error("degenerate window: lo > hi");
  const int wu = u.max_weight(), wv = v.max_weight(), ww = w.max_weight();
  const ExponentWindow window = detail::cube3(lo, hi);
  const FockVector zero = FockVector::zero(ctx.dim());
  const detail::Band band = detail::band_for_cube(lo, hi);

  // Term A: x0^{-1} delta((x1-x2)/x0) Y(u,x1) Y(v,x2) w.  The x2 exponent of
  // the operator grid is bounded below by the weight grading, which bounds
  // the delta tail j <= hi + wt v + wt w.
  const int jmax_a = std::max(hi + wv + ww, 0);
  auto a_rng = detail::make_range(2 * lo + 1, 2 * hi + 1 + jmax_a);
  auto b_rng = detail::make_range(std::min(-wv - ww, hi), hi);
  detail::guard_cells(detail::range_count(a_rng) * detail::range_count(b_rng),
                      max_cells);
  auto s12 = detail::nested_y_table(ctx, u, v, w, Var::x1, Var::x2, a_rng,
                                    b_rng, band, ycache);
  auto d1 = detail::delta_for(DeltaPattern::x1_minus_x2_over_x0, lo, hi,
                              Var::x1, a_rng, Var::x2, b_rng);
  auto lhs = convolve_truncated(d1, s12, window, zero);

  // Term B: x0^{-1} delta((x2-x1)/-x0) Y(v,x2) Y(u,x1) w.
  const int jmax_b = std::max(hi + wu + ww, 0);
  auto b2_rng = detail::make_range(2 * lo + 1, 2 * hi + 1 + jmax_b);
  auto a2_rng = detail::make_range(std::min(-wu - ww, hi), hi);
  detail::guard_cells(
      detail::range_count(a2_rng) * detail::range_count(b2_rng), max_cells);
  auto s21 = detail::nested_y_table(ctx, v, u, w, Var::x2, Var::x1, b2_rng,
                                    a2_rng, band, ycache);
  auto d2 = detail::delta_for(DeltaPattern::x2_minus_x1_over_neg_x0, lo, hi,
                              Var::x2, b2_rng, Var::x1, a2_rng);
  lhs -= convolve_truncated(d2, s21, window, zero);

  // Term C: x2^{-1} delta((x1-x0)/x2) Y(Y(u,x0)v, x2) w.  The x0 exponent of
  // the inner coefficient is bounded below by truncation.
  const int jmax_c = std::max(hi + wu + wv, 0);
  auto c_rng =
      detail::make_range(std::max(lo - jmax_c, std::min(-wu - wv, hi)), hi);
  auto cb_rng = detail::make_range(2 * lo + 1, 2 * hi + 1 + jmax_c);
  detail::guard_cells(
      detail::range_count(c_rng) * detail::range_count(cb_rng), max_cells);
  auto s3 = detail::iterate_y_table(ctx, u, v, w, c_rng, cb_rng, band,
                                    ycache);
  auto d3 = detail::delta_for(DeltaPattern::x1_minus_x0_over_x2, lo, hi,
                              Var::x0, c_rng, Var::x2, cb_rng);
  auto rhs = convolve_truncated(d3, s3, window, zero);

  return {std::move(lhs), std::move(rhs)};
}

// Independent assembly of the same two sides: per-coefficient summation with
// explicitly bounded inner sums, no materialized series objects.
inline JacobiSides jacobi_sides_voa_components(const VoaContext& ctx,
                                               const FockVector& u,
                                               const FockVector& v,
                                               const FockVector& w, int lo,
                                               int hi) {
  if (lo > hi) throw window_error("degenerate window: lo > hi");
  const int wu = u.max_weight(), wv = v.max_weight(), ww = w.max_weight();
  const ExponentWindow window = detail::cube3(lo, hi);
  WindowedSeries<FockVector> lhs(window, FockVector::zero(ctx.dim()));
  WindowedSeries<FockVector> rhs(window, FockVector::zero(ctx.dim()));

  std::map<int, FockVector> vw_memo, uw_memo, uv_memo;
  auto memo_get = [&](std::map<int, FockVector>& memo, const FockVector& x,
                      const FockVector& y, int e) -> const FockVector& {
    auto it = memo.find(e);
    if (it == memo.end())
      it = memo.emplace(e, ctx.y_coefficient(x, -e - 1, y)).first;
    return it->second;
  };

  for (int e0 = lo; e0 <= hi; ++e0) {
    const int n = -e0 - 1;
    for (int e1 = lo; e1 <= hi; ++e1) {
      for (int e2 = lo; e2 <= hi; ++e2) {
        FockVector acc(ctx.dim());
        // sum_j C(n,j)(-1)^j u_{-(e1-n+j)-1}( v_{-(e2-j)-1} w )
        for (int j = 0; j <= e2 + wv + ww; ++j) {
          Integer c = binomial(n, j);
          if (c == 0) continue;
          if (j % 2 == 1) c = -c;
          const FockVector& z = memo_get(vw_memo, v, w, e2 - j);
          if (z.is_zero()) continue;
          acc += Rational(c) * ctx.y_coefficient(u, -(e1 - n + j) - 1, z);
        }
        // minus sum_j C(n,j)(-1)^{j+n} v_{-(e2-(n-j))-1}( u_{-(e1-j)-1} w )
        for (int j = 0; j <= e1 + wu + ww; ++j) {
          Integer c = binomial(n, j);
          if (c == 0) continue;
          if (((j + n) % 2 + 2) % 2 == 1) c = -c;
          const FockVector& z = memo_get(uw_memo, u, w, e1 - j);
          if (z.is_zero()) continue;
          acc -= Rational(c) * ctx.y_coefficient(v, -(e2 - (n - j)) - 1, z);
        }
        lhs.accumulate({e0, e1, e2}, acc);

        FockVector rc(ctx.dim());
        // sum_j C(e1+j, j)(-1)^j ( u_{-(e0-j)-1} v )_{-(e1+e2+j+1)-1} w
        for (int j = 0; j <= e0 + wu + wv; ++j) {
          Integer c = binomial(e1 + j, j);
          if (c == 0) continue;
          if (j % 2 == 1) c = -c;
          const FockVector& z = memo_get(uv_memo, u, v, e0 - j);
          if (z.is_zero()) continue;
          rc += Rational(c) * ctx.y_coefficient(z, -(e1 + e2 + j + 1) - 1, w);
        }
        rhs.accumulate({e0, e1, e2}, rc);
      }
    }
  }
  return {std::move(lhs), std::move(rhs)};
}

// Memoized coproduct coefficients.
class CachedCoproduct {
 public:
  explicit CachedCoproduct(const VocContext& ctx) : ctx_(&ctx) {}

  const TensorVector& mono(const Monomial& m, int k) {
    auto it = memo_.find({m, k});
    if (it == memo_.end()) {
      it = memo_
               .emplace(std::make_pair(m, k),
                        ctx_->coproduct_coefficient(
                            FockVector::unit(ctx_->dim(), m), k))
               .first;
    }
    return it->second;
  }

  TensorVector apply(const FockVector& u, int k) {
    TensorVector out(ctx_->dim());
    for (const auto& [m, c] : u.terms()) {
      TensorVector t = mono(m, k);
      t *= c;
      out += t;
    }
    return out;
  }

  const VocContext& context() const { return *ctx_; }

 private:
  const VocContext* ctx_;
  std::map<std::pair<Monomial, int>, TensorVector> memo_;
};

// (X, v (x) w) under the tensor extension of the diagonal form.
inline Rational pair_tensor(const TensorVector& X, const FockVector& v,
                            const FockVector& w) {
  Rational r(0);
  for (const auto& [mv, cv] : v.terms()) {
    for (const auto& [mw, cw] : w.terms()) {
      Rational x = X.coefficient(mv, mw);
      if (x == 0) continue;
      r += x * cv * cw * Rational(p_value(mv) * p_value(mw));
    }
  }
  return r;
}

struct VocJacobiResult {
  ScalarSeries lhs;  // coproduct-side identity paired against the probes
  ScalarSeries rhs;
  // Pairings of the three coproduct-side terms, and the matching nested
  // operator-side pairings computed through an independent path.
  ScalarSeries t1_coalgebra, t1_operator;
  ScalarSeries t2_coalgebra, t2_operator;
  ScalarSeries t3_coalgebra, t3_operator;
};

// Each coproduct-side Jacobi term evaluated against probes v1 (x) v2 (x) v3
// via the extended bilinear form, assembled with the delta factors over
// [lo,hi]^3.
inline VocJacobiResult jacobi_sides_voc(const VocContext& ctx,
                                        const FockVector& u,
                                        const FockVector& v1,
                                        const FockVector& v2,
                                        const FockVector& v3, int lo, int hi,
                                        CachedCoproduct* cache = nullptr,
                                        long long max_cells = 4'000'000,
                                        CachedY* ycache = nullptr) {
  if (lo > hi) throw window_error("degenerate window: lo > hi");
  const int wu = u.max_weight();
  const int w1 = v1.max_weight(), w2 = v2.max_weight(), w3 = v3.max_weight();
  const VoaContext& voa = ctx.voa();
  const int dim = ctx.dim();
  const ExponentWindow window = detail::cube3(lo, hi);
  const Rational zero(0);

  // Coproduct coefficients vanish at exponents above wt(u) (truncation), so
  // the outer grid is capped there; inner pairings vanish off the probe
  // weight diagonal, handled by the weight filters below.
  const int jmax1 = std::max(hi + w2 + w3, 0);
  auto t1a = detail::make_range(2 * lo + 1, std::min(wu, 2 * hi + 1 + jmax1));
  auto t1b = detail::make_range(std::min(-w2 - w3, hi), hi);
  const int jmax2 = std::max(hi + w1 + w3, 0);
  auto t2b = detail::make_range(2 * lo + 1, std::min(wu, 2 * hi + 1 + jmax2));
  auto t2a = detail::make_range(std::min(-w1 - w3, hi), hi);
  const int jmax3 = std::max(hi + w1 + w2, 0);
  auto t3b = detail::make_range(2 * lo + 1, std::min(wu, 2 * hi + 1 + jmax3));
  auto t3a =
      detail::make_range(std::max(lo - jmax3, std::min(-w1 - w2, hi)), hi);
  detail::guard_cells(
      detail::range_count(t1a) * detail::range_count(t1b) +
          detail::range_count(t2a) * detail::range_count(t2b) +
          detail::range_count(t3a) * detail::range_count(t3b),
      max_cells);

  std::optional<CachedCoproduct> local;
  if (cache == nullptr) {
    local.emplace(ctx);
    cache = &*local;
  }

  ExponentWindow g12({Var::x1, Var::x2}, {{t1a.lo, t1a.hi}, {t1b.lo, t1b.hi}});
  ExponentWindow g21({Var::x1, Var::x2}, {{t2a.lo, t2a.hi}, {t2b.lo, t2b.hi}});
  ExponentWindow g3({Var::x0, Var::x2}, {{t3a.lo, t3a.hi}, {t3b.lo, t3b.hi}});
  ScalarSeries t1c(g12, zero), t1o(g12, zero);
  ScalarSeries t2c(g21, zero), t2o(g21, zero);
  ScalarSeries t3c(g3, zero), t3o(g3, zero);

  const auto [w23_min, w23_max] = detail::pair_weight_span(v2, v3);
  const auto [w13_min, w13_max] = detail::pair_weight_span(v1, v3);
  const auto [w12_min, w12_max] = detail::pair_weight_span(v1, v2);
  const detail::Band cband = detail::band_for_cube(lo, hi);

  // Coproduct-side tables, on the same banded grids as the operator tables.
  for (const auto& [mu, cu] : u.terms()) {
    // ((Id (x) coproduct(x2)) coproduct(x1) u, v1 (x) v2 (x) v3)
    for (int a = t1a.lo; a <= t1a.hi; ++a) {
      const TensorVector& outer = cache->mono(mu, coproduct_index(a));
      for (const auto& [slots, c] : outer.terms()) {
        Rational left =
            v1.coefficient(slots.first) * Rational(p_value(slots.first));
        if (left == 0) continue;
        const int wb = slots.second.weight();
        for (int b = t1b.lo; b <= t1b.hi; ++b) {
          if (!cband.contains(a + b)) continue;
          const int k = coproduct_index(b);
          // (Delta_k(beta), v2 (x) v3) needs wt v2 + wt v3 = wt beta + k + 1.
          const int need = wb + k + 1;
          if (need < w23_min || need > w23_max) continue;
          Rational inner =
              pair_tensor(cache->mono(slots.second, k), v2, v3);
          if (inner == 0) continue;
          t1c.accumulate({a, b}, cu * c * left * inner);
        }
      }
    }
    // ((T (x) Id)(Id (x) coproduct(x1)) coproduct(x2) u, ...): the transpose
    // routes the second probe to the outer left slot.
    for (int b = t2b.lo; b <= t2b.hi; ++b) {
      const TensorVector& outer = cache->mono(mu, coproduct_index(b));
      for (const auto& [slots, c] : outer.terms()) {
        Rational left =
            v2.coefficient(slots.first) * Rational(p_value(slots.first));
        if (left == 0) continue;
        const int wb = slots.second.weight();
        for (int a = t2a.lo; a <= t2a.hi; ++a) {
          if (!cband.contains(a + b)) continue;
          const int k = coproduct_index(a);
          const int need = wb + k + 1;
          if (need < w13_min || need > w13_max) continue;
          Rational inner =
              pair_tensor(cache->mono(slots.second, k), v1, v3);
          if (inner == 0) continue;
          t2c.accumulate({a, b}, cu * c * left * inner);
        }
      }
    }
    // ((coproduct(x0) (x) Id) coproduct(x2) u, ...)
    for (int b = t3b.lo; b <= t3b.hi; ++b) {
      const TensorVector& outer = cache->mono(mu, coproduct_index(b));
      for (const auto& [slots, c] : outer.terms()) {
        Rational right =
            v3.coefficient(slots.second) * Rational(p_value(slots.second));
        if (right == 0) continue;
        const int wa = slots.first.weight();
        for (int a = t3a.lo; a <= t3a.hi; ++a) {
          if (!cband.contains(a + b)) continue;
          const int k = coproduct_index(a);
          const int need = wa + k + 1;
          if (need < w12_min || need > w12_max) continue;
          Rational inner = pair_tensor(cache->mono(slots.first, k), v1, v2);
          if (inner == 0) continue;
          t3c.accumulate({a, b}, cu * c * right * inner);
        }
      }
    }
  }

  // Operator-side tables through the vertex operator path.
  const detail::Band band = detail::band_for_cube(lo, hi);
  auto s12 = detail::nested_y_table(voa, v1, v2, v3, Var::x1, Var::x2, t1a,
                                    t1b, band, ycache);
  for (const auto& [e, val] : s12.coefficients())
    t1o.accumulate(e, bilinear_form(u, val));
  auto s21 = detail::nested_y_table(voa, v2, v1, v3, Var::x2, Var::x1, t2b,
                                    t2a, band, ycache);
  for (const auto& [e, val] : s21.coefficients())
    t2o.accumulate({e[1], e[0]}, bilinear_form(u, val));  // grid is (x2, x1)
  auto s3 = detail::iterate_y_table(voa, v1, v2, v3, t3a, t3b, band, ycache);
  for (const auto& [e, val] : s3.coefficients())
    t3o.accumulate(e, bilinear_form(u, val));

  // Assemble the full identity from the coproduct-side tables.
  auto d1 = detail::delta_for(DeltaPattern::x1_minus_x2_over_x0, lo, hi,
                              Var::x1, t1a, Var::x2, t1b);
  auto d2 = detail::delta_for(DeltaPattern::x2_minus_x1_over_neg_x0, lo, hi,
                              Var::x1, t2a, Var::x2, t2b);
  auto d3 = detail::delta_for(DeltaPattern::x1_minus_x0_over_x2, lo, hi,
                              Var::x0, t3a, Var::x2, t3b);
  auto lhs = convolve_truncated(d1, t1c, window, zero);
  lhs -= convolve_truncated(d2, t2c, window, zero);
  auto rhs = convolve_truncated(d3, t3c, window, zero);
  (void)dim;

  return {std::move(lhs),  std::move(rhs), std::move(t1c), std::move(t1o),
          std::move(t2c), std::move(t2o), std::move(t3c), std::move(t3o)};
}

}  // namespace hvoc
