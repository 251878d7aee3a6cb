#pragma once

#include <map>
#include <vector>

#include "hvoc/fock.hpp"
#include "hvoc/heisenberg.hpp"
#include "hvoc/rational.hpp"

namespace hvoc {

// Fault injection for non-vacuity tests of the verification suites: flips the
// sign of the unordered-sum term of L(k) for k > 0.
struct VoaFaults {
  bool virasoro_sign_flip = false;
};

// Vertex operator structure on the rank-d Fock space: vacuum, conformal
// vector, Y coefficients and the L(k) operators.
class VoaContext {
 public:
  explicit VoaContext(int dim, VoaFaults faults = {})
      : dim_(dim),
        vacuum_(FockVector::vacuum(dim)),
        omega_(FockVector::zero(dim)),
        faults_(faults) {
    // omega = 1/2 sum_i a_i(-1)^2
    for (int i = 1; i <= dim; ++i)
      omega_.add_term(Monomial({Mode(i, -1), Mode(i, -1)}), Rational(1, 2));
    internal_check(omega_.homogeneous_weight() == 2, "omega must have weight 2");
  }

  int dim() const { return dim_; }
  const FockVector& vacuum() const { return vacuum_; }
  const FockVector& omega() const { return omega_; }
  const VoaFaults& faults() const { return faults_; }

  // v_k w, the x^{-k-1} coefficient of Y(v, x)w.  Bilinear; on homogeneous
  // inputs the result is homogeneous of weight wt v + wt w - k - 1 (checked).
  FockVector y_coefficient(const FockVector& v, int k,
                           const FockVector& w) const {
    auto r = y_coefficient_range(v, k, k, w);
    return r.at(k);
  }

  std::map<int, FockVector> y_coefficient_range(const FockVector& v, int k_lo,
                                                int k_hi,
                                                const FockVector& w) const {
    check_rank(v);
    check_rank(w);
    std::map<int, FockVector> out;
    for (int k = k_lo; k <= k_hi; ++k)
      out.emplace(k, FockVector::zero(dim_));
    for (const auto& [mv, cv] : v.terms()) {
      auto factors = series_factors(mv);
      for (const auto& [mw, cw] : w.terms()) {
        // Y(v,x) = sum_k v_k x^{-k-1}: exponent -k-1 picks out v_k.
        auto slices = ordered_series_apply_range(
            factors, -k_hi - 1, -k_lo - 1, FockVector::unit(dim_, mw),
            SeriesKind::current);
        for (auto& [e, val] : slices) {
          if (val.is_zero()) continue;
          const int k = -e - 1;
          internal_check(
              val.homogeneous_weight() == mv.weight() + mw.weight() - k - 1,
              "wt(v_k w) must equal wt v + wt w - k - 1");
          out.at(k) += (cv * cw) * val;
        }
      }
    }
    return out;
  }

  // [v_{-1} 1, v_{-2} 1, ..., v_{-order-1} 1]; equals the coefficient list of
  // exp(x L(-1)) v.
  std::vector<FockVector> creation_series(const FockVector& v,
                                          int order) const {
    auto r = y_coefficient_range(v, -order - 1, -1, vacuum_);
    std::vector<FockVector> out;
    out.reserve(order + 1);
    for (int m = 0; m <= order; ++m) out.push_back(r.at(-m - 1));
    return out;
  }

  // L(k) from the explicit normal-ordered quadratic expressions:
  //   k > 0: sum_i ( 1/2 sum_{j=1}^{k-1} a_i(j) a_i(k-j)
  //                  + sum_{j>=1} a_i(-j) a_i(k+j) )
  //   k < 0: the mirror expression; k = 0 acts by weight.
  // The infinite sum truncates on a weight-N vector once the annihilation
  // level exceeds N.  Must agree with y_coefficient(omega, k+1, v).
  FockVector virasoro_apply(int k, const FockVector& v) const {
    check_rank(v);
    FockVector out(dim_);
    for (const auto& [m, c] : v.terms()) out += c * virasoro_monomial(k, m);
    return out;
  }

 private:
  FockVector virasoro_monomial(int k, const Monomial& m) const {
    FockVector out(dim_);
    const FockVector unit = FockVector::unit(dim_, m);
    const int weight = m.weight();
    if (k == 0) {
      out.add_term(m, Rational(weight));
      return out;
    }
    const Rational mixed_sign =
        faults_.virasoro_sign_flip && k > 0 ? Rational(-1) : Rational(1);
    if (k > 0) {
      for (int i = 1; i <= dim_; ++i) {
        for (int j = 1; j <= k - 1; ++j) {
          out += Rational(1, 2) *
                 apply_mode(Mode(i, j), apply_mode(Mode(i, k - j), unit));
        }
        for (int j = 1; k + j <= weight; ++j) {
          out += mixed_sign *
                 apply_mode(Mode(i, -j), apply_mode(Mode(i, k + j), unit));
        }
      }
    } else {
      const int kk = -k;
      for (int i = 1; i <= dim_; ++i) {
        for (int j = 1; j <= kk - 1; ++j) {
          out += Rational(1, 2) *
                 apply_mode(Mode(i, -j), apply_mode(Mode(i, -kk + j), unit));
        }
        for (int j = 1; j <= weight; ++j) {
          out += apply_mode(Mode(i, -kk - j), apply_mode(Mode(i, j), unit));
        }
      }
    }
    return out;
  }

  void check_rank(const FockVector& v) const {
    if (v.dim() != dim_) throw rank_error("vector dimension mismatch");
  }

  int dim_;
  FockVector vacuum_;
  FockVector omega_;
  VoaFaults faults_;
};

// Memoized monomial-level v_k w evaluations.
class CachedY {
 public:
  explicit CachedY(const VoaContext& ctx) : ctx_(&ctx) {}

  const FockVector& mono(const Monomial& v, int k, const Monomial& w) {
    auto key = std::make_tuple(v, k, w);
    auto it = memo_.find(key);
    if (it == memo_.end()) {
      it = memo_
               .emplace(key, ctx_->y_coefficient(
                                 FockVector::unit(ctx_->dim(), v), k,
                                 FockVector::unit(ctx_->dim(), w)))
               .first;
    }
    return it->second;
  }

  FockVector apply(const FockVector& v, int k, const FockVector& w) {
    FockVector out(ctx_->dim());
    for (const auto& [mv, cv] : v.terms())
      for (const auto& [mw, cw] : w.terms()) {
        FockVector part = mono(mv, k, mw);
        part *= cv * cw;
        out += part;
      }
    return out;
  }

  const VoaContext& context() const { return *ctx_; }

 private:
  const VoaContext* ctx_;
  std::map<std::tuple<Monomial, int, Monomial>, FockVector> memo_;
};

}  // namespace hvoc
