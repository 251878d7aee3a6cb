#include <catch2/catch_amalgamated.hpp>

#include "hvoc/voa.hpp"
#include "oracle_helpers.hpp"

using namespace hvoc;

namespace {
const Monomial kA1 = Monomial{Mode(1, -1)};
const Monomial kA2 = Monomial{Mode(1, -2)};
}  // namespace

TEST_CASE("context distinguished vectors") {
  VoaContext ctx(2);
  CHECK(ctx.vacuum() == FockVector::vacuum(2));
  FockVector omega(2);
  omega.add_term(Monomial{Mode(1, -1), Mode(1, -1)}, Rational(1, 2));
  omega.add_term(Monomial{Mode(2, -1), Mode(2, -1)}, Rational(1, 2));
  CHECK(ctx.omega() == omega);
}

TEST_CASE("unit acts as the identity in the x^0 slot only") {
  VoaContext ctx(1);
  oracle::Rng rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    FockVector w = rng.vector(1, 5, 4);
    for (int k = -6; k <= 6; ++k) {
      FockVector got = ctx.y_coefficient(ctx.vacuum(), k, w);
      CHECK(got == (k == -1 ? w : FockVector::zero(1)));
    }
  }
}

TEST_CASE("creation slot examples") {
  VoaContext ctx(1);
  CHECK(ctx.y_coefficient(FockVector::unit(1, kA1), -1, ctx.vacuum()) ==
        FockVector::unit(1, kA1));
  // arbitrary monomial lands in the x^0 slot
  oracle::Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    FockVector v = FockVector::unit(1, rng.monomial(1, 5));
    CHECK(ctx.y_coefficient(v, -1, ctx.vacuum()) == v);
  }
}

TEST_CASE("weight bookkeeping of y coefficients") {
  VoaContext ctx(2);
  auto basis = basis_up_to_weight(2, 4);
  for (const Monomial& mv : basis) {
    for (const Monomial& mw : basis) {
      for (int k = -4; k <= 6; ++k) {
        FockVector out = ctx.y_coefficient(FockVector::unit(2, mv), k,
                                           FockVector::unit(2, mw));
        if (out.is_zero()) continue;
        CHECK(out.homogeneous_weight() ==
              mv.weight() + mw.weight() - k - 1);
      }
    }
  }
}

TEST_CASE("truncation in k") {
  VoaContext ctx(1);
  FockVector v = FockVector::unit(1, kA1);
  oracle::Rng rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    Monomial mw = rng.monomial(1, 5);
    for (int k = mw.weight() + 1; k <= mw.weight() + 4; ++k)
      CHECK(ctx.y_coefficient(v, k, FockVector::unit(1, mw)).is_zero());
  }
}

TEST_CASE("creation series equals the translation exponential") {
  for (int d = 1; d <= 2; ++d) {
    VoaContext ctx(d);
    CHECK(ctx.creation_series(ctx.vacuum(), 3) ==
          std::vector<FockVector>{FockVector::vacuum(d), FockVector::zero(d),
                                  FockVector::zero(d), FockVector::zero(d)});
    auto basis = basis_up_to_weight(d, 5);
    for (const Monomial& mv : basis) {
      FockVector v = FockVector::unit(d, mv);
      auto series = ctx.creation_series(v, 5);
      FockVector expect = v;  // L(-1)^m v / m!
      Integer mfact(1);
      for (int m = 0; m <= 5; ++m) {
        if (m > 0) {
          expect = ctx.virasoro_apply(-1, expect);
          mfact *= m;
        }
        CHECK(series[m] == Rational(1, mfact) * expect);
      }
    }
  }
}

TEST_CASE("creation series example at weight one") {
  VoaContext ctx(1);
  auto series = ctx.creation_series(FockVector::unit(1, kA1), 1);
  REQUIRE(series.size() == 2);
  CHECK(series[0] == FockVector::unit(1, kA1));
  CHECK(series[1] == FockVector::unit(1, kA2));
}

TEST_CASE("Virasoro operators") {
  VoaContext ctx(1);
  FockVector v = FockVector::unit(1, Monomial{Mode(1, -2), Mode(1, -1)});
  CHECK(ctx.virasoro_apply(0, v) == Rational(3) * v);
  CHECK(ctx.virasoro_apply(-2, ctx.vacuum()) == ctx.omega());
  for (int k = -1; k <= 5; ++k)
    CHECK(ctx.virasoro_apply(k, ctx.vacuum()).is_zero());
}

TEST_CASE("both Virasoro code paths agree") {
  for (int d = 1; d <= 2; ++d) {
    VoaContext ctx(d);
    const int max_weight = d == 1 ? 6 : 4;
    for (const Monomial& m : basis_up_to_weight(d, max_weight)) {
      FockVector v = FockVector::unit(d, m);
      for (int k = -6; k <= 6; ++k) {
        CHECK(ctx.virasoro_apply(k, v) ==
              ctx.y_coefficient(ctx.omega(), k + 1, v));
      }
    }
  }
}

TEST_CASE("Virasoro bracket with central charge") {
  for (int d = 1; d <= 2; ++d) {
    VoaContext ctx(d);
    FockVector v = FockVector::unit(d, Monomial{Mode(1, -1)});
    // [L(2), L(-2)] = 4 L(0) + d/2
    FockVector lhs = ctx.virasoro_apply(2, ctx.virasoro_apply(-2, v)) -
                     ctx.virasoro_apply(-2, ctx.virasoro_apply(2, v));
    FockVector rhs = Rational(4) * ctx.virasoro_apply(0, v) +
                     Rational(d, 2) * v;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("sign flip fault breaks the bracket") {
  VoaFaults faults;
  faults.virasoro_sign_flip = true;
  VoaContext ctx(1, faults);
  FockVector v = FockVector::unit(1, kA1);
  FockVector lhs = ctx.virasoro_apply(1, ctx.virasoro_apply(-1, v)) -
                   ctx.virasoro_apply(-1, ctx.virasoro_apply(1, v));
  FockVector rhs = Rational(2) * ctx.virasoro_apply(0, v);
  CHECK(lhs != rhs);
}

TEST_CASE("y coefficient is bilinear") {
  VoaContext ctx(2);
  oracle::Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    FockVector v1 = rng.vector(2, 3, 3), v2 = rng.vector(2, 3, 3);
    FockVector w = rng.vector(2, 3, 3);
    Rational s = rng.rational();
    for (int k = -3; k <= 3; ++k) {
      CHECK(ctx.y_coefficient(v1 + s * v2, k, w) ==
            ctx.y_coefficient(v1, k, w) + s * ctx.y_coefficient(v2, k, w));
      CHECK(ctx.y_coefficient(v1, k, w + s * v2) ==
            ctx.y_coefficient(v1, k, w) + s * ctx.y_coefficient(v1, k, v2));
    }
  }
}
