#pragma once

#include <map>

#include "hvoc/fock.hpp"
#include "hvoc/heisenberg.hpp"
#include "hvoc/rational.hpp"
#include "hvoc/voa.hpp"

namespace hvoc {

// Fault injection: omit the 1/p(v) normalization of the coproduct terms.
struct VocFaults {
  bool drop_coproduct_normalization = false;
};

// Index bookkeeping between x-exponents and coefficient indices, kept in one
// place.  The coproduct expands as sum_k Delta_k(v) x^{-k-1}; the co-Virasoro
// contraction expands as sum_j L(j) x^{j-2}, so L(j) sits in Delta_{1-j}.
constexpr int coproduct_exponent(int k) { return -k - 1; }
constexpr int coproduct_index(int exponent) { return -exponent - 1; }
constexpr int covirasoro_delta_index(int j) { return 1 - j; }

// Coalgebra structure adjoint to the vertex operator structure under the
// diagonal bilinear form: coproduct coefficients Delta_k, covacuum, and the
// co-Virasoro functional.
class VocContext {
 public:
  explicit VocContext(int dim, VocFaults faults = {}, VoaFaults voa_faults = {})
      : voa_(dim, voa_faults), faults_(faults) {}

  const VoaContext& voa() const { return voa_; }
  int dim() const { return voa_.dim(); }
  const VocFaults& faults() const { return faults_; }

  // Delta_k(u) = sum over monomials v of (1/p(v)) v (x) (adjoint series of v
  // at exponent -k-1 applied to u).  The left slot ranges over weights
  // 0..wt(u)+k+1; the right slot of each term has weight
  // wt(u) - wt(v) + k + 1 (checked).  Satisfies
  // (Delta_k(u), v (x) w) = (u, v_k w).
  TensorVector coproduct_coefficient(const FockVector& u, int k) const {
    auto r = coproduct_range(u, k, k);
    return r.at(k);
  }

  std::map<int, TensorVector> coproduct_range(const FockVector& u, int k_lo,
                                              int k_hi) const {
    check_rank(u);
    const int dim = voa_.dim();
    std::map<int, TensorVector> out;
    for (int k = k_lo; k <= k_hi; ++k) out.emplace(k, TensorVector::zero(dim));
    const int e_lo = coproduct_exponent(k_hi);
    const int e_hi = coproduct_exponent(k_lo);
    for (const auto& [mu, cu] : u.terms()) {
      const int v_weight_max = mu.weight() + k_hi + 1;
      for (int vw = 0; vw <= v_weight_max; ++vw) {
        for (const Monomial& v : basis_of_weight(dim, vw)) {
          const Rational norm = faults_.drop_coproduct_normalization
                                    ? Rational(1)
                                    : Rational(1, p_value(v));
          auto factors = series_factors(v);
          auto slices = ordered_series_apply_range(
              factors, e_lo, e_hi, FockVector::unit(dim, mu),
              SeriesKind::adjoint);
          for (const auto& [e, slot] : slices) {
            if (slot.is_zero()) continue;
            const int k = coproduct_index(e);
            internal_check(
                slot.homogeneous_weight() == mu.weight() - vw + k + 1,
                "right slot of Delta_k must have weight wt u - wt v + k + 1");
            for (const auto& [ms, cs] : slot.terms())
              out.at(k).add_term(v, ms, cu * norm * cs);
          }
        }
      }
    }
    return out;
  }

  // (u, vacuum): the coefficient of the vacuum in u.
  Rational covacuum(const FockVector& u) const {
    check_rank(u);
    return bilinear_form(u, voa_.vacuum());
  }

  // (u, omega)
  Rational co_virasoro(const FockVector& u) const {
    check_rank(u);
    return bilinear_form(u, voa_.omega());
  }

  // The operator extracted from the coproduct by the co-Virasoro functional
  // on the left slot; agrees with virasoro_apply(j, .).
  FockVector co_virasoro_mode(int j, const FockVector& u) const {
    TensorVector d = coproduct_coefficient(u, covirasoro_delta_index(j));
    FockVector out(dim());
    for (const auto& [pair, c] : d.terms()) {
      Rational rho = bilinear_form(FockVector::unit(dim(), pair.first),
                                   voa_.omega());
      if (rho == 0) continue;
      out.add_term(pair.second, c * rho);
    }
    return out;
  }

 private:
  void check_rank(const FockVector& v) const {
    if (v.dim() != dim()) throw rank_error("vector dimension mismatch");
  }

  VoaContext voa_;
  VocFaults faults_;
};

}  // namespace hvoc
