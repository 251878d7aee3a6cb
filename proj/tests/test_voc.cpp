#include <catch2/catch_amalgamated.hpp>

#include "hvoc/series.hpp"
#include "hvoc/voc.hpp"
#include "oracle_helpers.hpp"

using namespace hvoc;

namespace {
const Monomial kA1 = Monomial{Mode(1, -1)};
const Monomial kA2 = Monomial{Mode(1, -2)};

FockVector counit_right(const TensorVector& X) {
  FockVector out(X.dim());
  for (const auto& [slots, c] : X.terms())
    if (slots.second.is_vacuum()) out.add_term(slots.first, c);
  return out;
}

FockVector counit_left(const TensorVector& X) {
  FockVector out(X.dim());
  for (const auto& [slots, c] : X.terms())
    if (slots.first.is_vacuum()) out.add_term(slots.second, c);
  return out;
}
}  // namespace

TEST_CASE("index bookkeeping between exponents and coefficient indices") {
  for (int k = -7; k <= 7; ++k) {
    CHECK(coproduct_index(coproduct_exponent(k)) == k);
    // L(j) sits at x^{j-2}, which is the x^{-k-1} slot for k = 1-j.
    CHECK(coproduct_exponent(covirasoro_delta_index(k)) == k - 2);
  }
}

TEST_CASE("covacuum") {
  VocContext ctx(1);
  CHECK(ctx.covacuum(FockVector::vacuum(1)) == 1);
  CHECK(ctx.covacuum(FockVector::unit(1, kA1)) == 0);
  FockVector mix = Rational(3) * FockVector::vacuum(1) +
                   Rational(5) * FockVector::unit(1, kA2);
  CHECK(ctx.covacuum(mix) == 3);
  // equals the vacuum coefficient
  oracle::Rng rng(808);
  for (int trial = 0; trial < 30; ++trial) {
    FockVector u = rng.vector(1, 5, 4);
    CHECK(ctx.covacuum(u) == u.coefficient(Monomial::vacuum()));
  }
}

TEST_CASE("co-Virasoro functional") {
  for (int d = 1; d <= 3; ++d) {
    VocContext ctx(d);
    CHECK(ctx.co_virasoro(FockVector::unit(d, Monomial{Mode(1, -1),
                                                       Mode(1, -1)})) == 1);
    CHECK(ctx.co_virasoro(FockVector::unit(d, Monomial{Mode(1, -2)})) == 0);
    CHECK(ctx.co_virasoro(ctx.voa().omega()) == Rational(d, 2));
  }
}

TEST_CASE("coproduct vacuum-slot structure") {
  VocContext ctx(1);
  oracle::Rng rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    FockVector u = FockVector::unit(1, rng.monomial(1, 4));
    for (int k = -6; k <= 4; ++k) {
      TensorVector d = ctx.coproduct_coefficient(u, k);
      FockVector vac_left = counit_left(d);
      CHECK(vac_left == (k == -1 ? u : FockVector::zero(1)));
    }
  }
}

TEST_CASE("coproduct pairing example at the vacuum") {
  VocContext ctx(1);
  TensorVector d = ctx.coproduct_coefficient(FockVector::vacuum(1), 1);
  // single term a1(-1) (x) a1(-1), pairing 1 against v = w = a1(-1)
  REQUIRE(d.terms().size() == 1);
  CHECK(d.coefficient(kA1, kA1) == 1);
  CHECK(pair_tensor(d, FockVector::unit(1, kA1), FockVector::unit(1, kA1)) ==
        1);
}

TEST_CASE("coproduct truncation bound") {
  VocContext ctx(1);
  for (const Monomial& mu : basis_up_to_weight(1, 4)) {
    FockVector u = FockVector::unit(1, mu);
    for (int k = -mu.weight() - 4; k < -mu.weight() - 1; ++k)
      CHECK(ctx.coproduct_coefficient(u, k).is_zero());
  }
}

TEST_CASE("coproduct slot weights") {
  VocContext ctx(2);
  for (const Monomial& mu : basis_up_to_weight(2, 3)) {
    FockVector u = FockVector::unit(2, mu);
    for (int k = -4; k <= 4; ++k) {
      TensorVector d = ctx.coproduct_coefficient(u, k);
      for (const auto& [slots, c] : d.terms()) {
        CHECK(slots.first.weight() <= mu.weight() + k + 1);
        CHECK(slots.second.weight() ==
              mu.weight() - slots.first.weight() + k + 1);
      }
    }
  }
}

TEST_CASE("adjunction against the vertex operator path") {
  for (int d = 1; d <= 2; ++d) {
    VocContext ctx(d);
    const VoaContext& voa = ctx.voa();
    CachedCoproduct cache(ctx);
    auto basis = basis_up_to_weight(d, 3);
    for (const Monomial& mu : basis) {
      FockVector u = FockVector::unit(d, mu);
      for (const Monomial& mv : basis) {
        FockVector v = FockVector::unit(d, mv);
        for (const Monomial& mw : basis) {
          FockVector w = FockVector::unit(d, mw);
          for (int k = -mu.weight() - 2; k <= mv.weight() + mw.weight() + 1;
               ++k) {
            CHECK(pair_tensor(cache.mono(mu, k), v, w) ==
                  bilinear_form(u, voa.y_coefficient(v, k, w)));
          }
        }
      }
    }
  }
}

TEST_CASE("cocreation in components and in paired form") {
  VocContext ctx(1);
  const VoaContext& voa = ctx.voa();
  auto basis = basis_up_to_weight(1, 4);
  for (const Monomial& mu : basis) {
    FockVector u = FockVector::unit(1, mu);
    // (Id (x) c) kills every nonnegative slot
    for (int k = 0; k <= 5; ++k)
      CHECK(counit_right(ctx.coproduct_coefficient(u, k)).is_zero());
    FockVector l1_power = u;
    Integer mfact(1);
    for (int m = 0; m <= 4; ++m) {
      if (m > 0) {
        l1_power = voa.virasoro_apply(1, l1_power);
        mfact *= m;
      }
      FockVector got = counit_right(ctx.coproduct_coefficient(u, -m - 1));
      CHECK(got == Rational(1, mfact) * l1_power);
      for (const Monomial& mv : basis) {
        FockVector v = FockVector::unit(1, mv);
        FockVector lv = v;
        for (int t = 0; t < m; ++t) lv = voa.virasoro_apply(-1, lv);
        CHECK(bilinear_form(got, v) == bilinear_form(u, lv) / Rational(mfact));
      }
    }
  }
}

TEST_CASE("cocreation example") {
  VocContext ctx(1);
  // (Id (x) c) Delta_{-2}(a1(-2)) = L(1) a1(-2) = 2 a1(-1)
  FockVector u = FockVector::unit(1, kA2);
  FockVector got = counit_right(ctx.coproduct_coefficient(u, -2));
  CHECK(got == Rational(2) * FockVector::unit(1, kA1));
}

TEST_CASE("co-Virasoro modes reproduce the Virasoro operators") {
  VocContext ctx(1);
  const VoaContext& voa = ctx.voa();
  CHECK(ctx.co_virasoro_mode(-2, FockVector::vacuum(1)) == voa.omega());
  CHECK(ctx.co_virasoro_mode(1, FockVector::unit(1, kA1)).is_zero());
  for (const Monomial& mu : basis_up_to_weight(1, 4)) {
    FockVector u = FockVector::unit(1, mu);
    CHECK(ctx.co_virasoro_mode(0, u) == Rational(mu.weight()) * u);
    for (int j = -5; j <= 5; ++j)
      CHECK(ctx.co_virasoro_mode(j, u) == voa.virasoro_apply(j, u));
  }
}

TEST_CASE("derivative compatibility of the coproduct") {
  VocContext ctx(1);
  const VoaContext& voa = ctx.voa();
  for (const Monomial& mu : basis_up_to_weight(1, 4)) {
    FockVector u = FockVector::unit(1, mu);
    for (int k = -5; k <= 4; ++k) {
      TensorVector lhs(1);
      const TensorVector dk = ctx.coproduct_coefficient(u, k);
      for (const auto& [slots, c] : dk.terms()) {
        FockVector moved =
            voa.virasoro_apply(1, FockVector::unit(1, slots.first));
        for (const auto& [m, cm] : moved.terms())
          lhs.add_term(m, slots.second, c * cm);
      }
      TensorVector rhs = ctx.coproduct_coefficient(u, k - 1);
      rhs *= Rational(-k);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("dropping the normalization breaks cocreation but not the counit") {
  VocFaults faults;
  faults.drop_coproduct_normalization = true;
  VocContext broken(1, faults);
  FockVector u = FockVector::unit(1, kA2);
  // counit path only sees the vacuum left slot, whose normalization is 1
  CHECK(counit_left(broken.coproduct_coefficient(u, -1)) == u);
  // cocreation picks up the un-normalized p(v) factors
  FockVector got = counit_right(broken.coproduct_coefficient(u, -1));
  CHECK(got != u);
  CHECK(got == Rational(2) * u);
}

TEST_CASE("cached coproduct agrees with direct evaluation") {
  VocContext ctx(2);
  CachedCoproduct cache(ctx);
  oracle::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    FockVector u = rng.vector(2, 3, 3);
    int k = rng.uniform(-4, 3);
    CHECK(cache.apply(u, k) == ctx.coproduct_coefficient(u, k));
  }
}
