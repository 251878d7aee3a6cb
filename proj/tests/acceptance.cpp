// Acceptance suite: one line per criterion, exact checks at desk scale.

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hvoc/parse.hpp"
#include "hvoc/series.hpp"
#include "hvoc/verify.hpp"
#include "oracle_helpers.hpp"

using namespace hvoc;

namespace {

int failures = 0;

void outcome(int criterion, const std::string& label, bool pass,
             const std::string& detail = "") {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << criterion << ": "
            << label;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int default_jobs() {
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(1u, std::min(hw, 4u));
}

VerificationConfig config(int dim, int max_weight) {
  VerificationConfig cfg;
  cfg.dim = dim;
  cfg.max_weight = max_weight;
  cfg.window_lo = -5;
  cfg.window_hi = 5;
  cfg.jobs = default_jobs();
  return cfg;
}

std::string fmt_time(double s) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << s << " s";
  return os.str();
}

}  // namespace

// 1. full operator-algebra axiom suite
static void criterion1() {
  bool pass = true;
  std::string detail;
  for (auto [d, n] : {std::pair{1, 3}, std::pair{2, 2}}) {
    auto t0 = std::chrono::steady_clock::now();
    auto report = verify_voa(config(d, n));
    double dt = seconds_since(t0);
    if (!report.all_pass() || dt >= 60.0) pass = false;
    detail += "dim " + std::to_string(d) + ": " + fmt_time(dt) + "; ";
  }
  outcome(1, "operator algebra axioms at dim 1 (weight 3) and dim 2 "
             "(weight 2), window [-5,5]^3, each under 60 s",
          pass, detail);
}

// 2. full coalgebra axiom suite including counit, cocreation and the
// derivative compatibility in components
static void criterion2() {
  bool pass = true;
  std::string detail;
  for (auto [d, n] : {std::pair{1, 3}, std::pair{2, 2}}) {
    auto t0 = std::chrono::steady_clock::now();
    auto report = verify_voc(config(d, n));
    double dt = seconds_since(t0);
    bool counit_seen = false, cocreation_seen = false, deriv_seen = false;
    for (const auto& c : report.checks) {
      if (c.check == "counit") counit_seen = c.pass();
      if (c.check == "cocreation") cocreation_seen = c.pass();
      if (c.check == "l1_derivative") deriv_seen = c.pass();
    }
    if (!report.all_pass() || !counit_seen || !cocreation_seen ||
        !deriv_seen || dt >= 120.0)
      pass = false;
    detail += "dim " + std::to_string(d) + ": " + fmt_time(dt) + "; ";
  }
  outcome(2, "coalgebra axioms (counit, cocreation, truncation, Jacobi, "
             "bracket, grading, derivative) at the same configs, each under "
             "120 s",
          pass, detail);
}

// 3. adjunction between the coproduct and the vertex operators
static void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  auto cfg = config(1, 4);
  auto report = verify_adjunction(cfg);
  double dt = seconds_since(t0);
  outcome(3, "(Delta_k(u), v (x) w) = (u, v_k w) for all basis triples of "
             "weights <= 4 at dim 1, k over the grading-forced range, under "
             "60 s",
          report.all_pass() && dt < 60.0, fmt_time(dt));
}

// 4. Virasoro bracket with central charge equal to the dimension
static void criterion4() {
  bool pass = true;
  std::string detail;
  for (int d : {1, 2}) {
    auto cfg = config(d, 6);
    cfg.bracket_range = 4;
    auto report = verify_virasoro_bracket(cfg);
    if (!report.all_pass()) pass = false;
    // the central slot at j = 2, k = -2 contributes exactly d/2 on the vacuum
    VoaContext ctx(d);
    FockVector vac = FockVector::vacuum(d);
    FockVector bracket = ctx.virasoro_apply(2, ctx.virasoro_apply(-2, vac)) -
                         ctx.virasoro_apply(-2, ctx.virasoro_apply(2, vac));
    FockVector expected =
        Rational(4) * ctx.virasoro_apply(0, vac) + Rational(d, 2) * vac;
    if (!(bracket == expected)) pass = false;
    Rational central = bilinear_form(bracket, vac);
    if (central != Rational(d, 2)) pass = false;
    detail += "dim " + std::to_string(d) + " central slot " +
              print_rational(central) + "; ";
  }
  outcome(4, "[L(j),L(k)] = (j-k)L(j+k) + (1/12)(j^3-j)[j=-k] d on weights "
             "<= 6, j,k in [-4,4], dims 1 and 2",
          pass, detail);
}

// 5. Virasoro preservation of the bilinear form
static void criterion5() {
  auto cfg = config(1, 6);
  cfg.preserving_range = 4;
  auto report = verify_virasoro_preserving(cfg);
  outcome(5, "(L(k)u, v) = (u, L(-k)v) on all basis pairs of weight <= 6, "
             "|k| <= 4, dim 1",
          report.all_pass());
}

// 6. Gram matrices and the two p-value code paths
static void criterion6() {
  bool pass = true;
  for (int d = 1; d <= 2 && pass; ++d) {
    for (int n = 0; n <= 6 && pass; ++n) {
      auto basis = basis_of_weight(d, n);
      for (size_t i = 0; i < basis.size() && pass; ++i) {
        for (size_t j = 0; j < basis.size() && pass; ++j) {
          Rational g = bilinear_form(FockVector::unit(d, basis[i]),
                                     FockVector::unit(d, basis[j]));
          if (i == j) {
            if (g != Rational(p_value(basis[i])) || !(g > 0)) pass = false;
          } else if (g != 0) {
            pass = false;
          }
        }
      }
    }
    for (int n = 0; n <= 8 && pass; ++n) {
      for (const Monomial& m : basis_of_weight(d, n)) {
        if (Rational(p_value(m)) != oracle::p_value_by_word(d, m)) {
          pass = false;
          break;
        }
      }
    }
  }
  outcome(6, "Gram matrices of weight <= 6 (dims 1, 2) diagonal with entries "
             "p(v) > 0; closed-form p equals the annihilation-word oracle up "
             "to weight 8",
          pass);
}

// 7. weight bookkeeping of products and coproducts
static void criterion7() {
  bool pass = true;
  VoaContext ctx(2);
  VocContext voc(2);
  auto basis = basis_up_to_weight(2, 4);
  for (const Monomial& mv : basis) {
    for (const Monomial& mw : basis) {
      for (int k = -5; k <= 7; ++k) {
        FockVector out = ctx.y_coefficient(FockVector::unit(2, mv), k,
                                           FockVector::unit(2, mw));
        if (out.is_zero()) continue;
        if (out.homogeneous_weight() != mv.weight() + mw.weight() - k - 1)
          pass = false;
      }
    }
  }
  for (const Monomial& mu : basis_up_to_weight(2, 3)) {
    for (int k = -4; k <= 4; ++k) {
      TensorVector d = voc.coproduct_coefficient(FockVector::unit(2, mu), k);
      for (const auto& [slots, c] : d.terms()) {
        if (slots.second.weight() !=
            mu.weight() - slots.first.weight() + k + 1)
          pass = false;
      }
    }
  }
  outcome(7, "wt(v_k w) = wt v + wt w - k - 1 and the coproduct slot-weight "
             "relation hold for every computed term (engine-level checks stay "
             "active in all suites)",
          pass);
}

// 8. basis counts against the frozen sequence and a brute-force enumerator
static void criterion8() {
  const std::vector<long long> expected{1, 1, 2, 3, 5, 7, 11};
  bool pass = true;
  for (int n = 0; n <= 6; ++n) {
    long long got = (long long)basis_of_weight(1, n).size();
    if (got != expected[n]) pass = false;
    if (oracle::count_colored_partitions(1, n) != expected[n]) pass = false;
  }
  outcome(8, "|basis_of_weight(1, N)| = (1, 1, 2, 3, 5, 7, 11) for N = 0..6, "
             "reproduced by an independent partition enumerator",
          pass);
}

// 9. consistency oracles between independent code paths
static void criterion9() {
  bool pass = true;
  std::string detail;

  // explicit L(k) formulas vs the conformal-vector coefficients
  for (int d : {1, 2}) {
    VoaContext ctx(d);
    for (const Monomial& m : basis_up_to_weight(d, 5)) {
      FockVector v = FockVector::unit(d, m);
      for (int k = -6; k <= 6; ++k) {
        if (!(ctx.virasoro_apply(k, v) ==
              ctx.y_coefficient(ctx.omega(), k + 1, v))) {
          pass = false;
          detail = "L vs Y(omega) mismatch";
        }
      }
    }
  }

  // coproduct-extracted modes vs the explicit operators
  {
    VocContext ctx(1);
    for (const Monomial& m : basis_up_to_weight(1, 5)) {
      FockVector u = FockVector::unit(1, m);
      for (int j = -6; j <= 6; ++j) {
        if (!(ctx.co_virasoro_mode(j, u) ==
              ctx.voa().virasoro_apply(j, u))) {
          pass = false;
          detail = "co-Virasoro mode mismatch at dim 1";
        }
      }
    }
    VocContext ctx2(2);
    for (const Monomial& m : basis_up_to_weight(2, 3)) {
      FockVector u = FockVector::unit(2, m);
      for (int j = -4; j <= 4; ++j) {
        if (!(ctx2.co_virasoro_mode(j, u) ==
              ctx2.voa().virasoro_apply(j, u))) {
          pass = false;
          detail = "co-Virasoro mode mismatch at dim 2";
        }
      }
    }
  }

  // the two p-value code paths
  for (int d = 1; d <= 2; ++d) {
    for (int n = 0; n <= 8; ++n) {
      for (const Monomial& m : basis_of_weight(d, n)) {
        if (Rational(p_value(m)) != oracle::p_value_by_word(d, m)) {
          pass = false;
          detail = "p-value path mismatch";
        }
      }
    }
  }

  // the two Jacobi assemblies
  {
    VoaContext ctx(1);
    auto basis = basis_up_to_weight(1, 3);
    for (const Monomial& mu : basis) {
      for (const Monomial& mv : basis) {
        for (const Monomial& mw : basis) {
          FockVector u = FockVector::unit(1, mu);
          FockVector v = FockVector::unit(1, mv);
          FockVector w = FockVector::unit(1, mw);
          auto a = jacobi_sides_voa(ctx, u, v, w, -3, 3);
          auto b = jacobi_sides_voa_components(ctx, u, v, w, -3, 3);
          if (!(a.lhs == b.lhs && a.rhs == b.rhs)) {
            pass = false;
            detail = "dual Jacobi assembly mismatch";
          }
        }
      }
    }
  }

  outcome(9, "consistency oracles: L(k) = conformal-vector coefficients "
             "(weights <= 5, dims 1, 2); coproduct-extracted modes = L(k); "
             "both p-value paths; both Jacobi assemblies on weights <= 3",
          pass, detail);
}

// 10. non-vacuity through fault injection
static void criterion10() {
  bool pass = true;
  std::string detail;

  {
    auto cfg = config(1, 3);
    cfg.voa_faults.virasoro_sign_flip = true;
    auto report = verify_virasoro_bracket(cfg);
    if (report.all_pass()) {
      pass = false;
      detail += "sign flip undetected; ";
    } else {
      const auto& rec = report.checks.at(0);
      if (!rec.witness) {
        pass = false;
        detail += "sign flip lacks a witness; ";
      } else {
        // reproduce the witness through the public operations
        int j = 0, k = 0;
        std::string vtext;
        for (const auto& [key, val] : rec.witness->inputs) {
          if (key == "j") j = std::stoi(val);
          if (key == "k") k = std::stoi(val);
          if (key == "v") vtext = val;
        }
        VoaContext faulty(cfg.dim, cfg.voa_faults);
        FockVector v = parse_vector(vtext, cfg.dim);
        FockVector lhs = faulty.virasoro_apply(j, faulty.virasoro_apply(k, v)) -
                         faulty.virasoro_apply(k, faulty.virasoro_apply(j, v));
        FockVector rhs = Rational(j - k) * faulty.virasoro_apply(j + k, v);
        if (j + k == 0)
          rhs += Rational(Integer(j) * j * j - j, 12) * Rational(cfg.dim) * v;
        if (print_vector(lhs) != rec.witness->lhs ||
            print_vector(rhs) != rec.witness->rhs || lhs == rhs) {
          pass = false;
          detail += "sign-flip witness does not reproduce; ";
        }
      }
    }
  }

  {
    auto cfg = config(1, 2);
    cfg.window_lo = -3;
    cfg.window_hi = 3;
    cfg.voc_faults.drop_coproduct_normalization = true;
    auto report = verify_voc(cfg);
    bool voc_failed = !report.all_pass();
    if (!voc_failed) {
      pass = false;
      detail += "normalization drop undetected in the coalgebra suite; ";
    }
    auto adj = verify_adjunction(cfg);
    if (adj.all_pass()) {
      pass = false;
      detail += "normalization drop undetected in the adjunction; ";
    } else {
      const auto& rec = adj.checks.at(0);
      if (!rec.witness) {
        pass = false;
        detail += "adjunction failure lacks a witness; ";
      } else {
        std::string ut, vt, wt;
        int k = 0;
        for (const auto& [key, val] : rec.witness->inputs) {
          if (key == "u") ut = val;
          if (key == "v") vt = val;
          if (key == "w") wt = val;
          if (key == "k") k = std::stoi(val);
        }
        VocContext faulty(cfg.dim, cfg.voc_faults);
        FockVector u = parse_vector(ut, cfg.dim);
        FockVector v = parse_vector(vt, cfg.dim);
        FockVector w = parse_vector(wt, cfg.dim);
        Rational lhs = pair_tensor(faulty.coproduct_coefficient(u, k), v, w);
        Rational rhs = bilinear_form(u, faulty.voa().y_coefficient(v, k, w));
        if (print_rational(lhs) != rec.witness->lhs ||
            print_rational(rhs) != rec.witness->rhs || lhs == rhs) {
          pass = false;
          detail += "normalization witness does not reproduce; ";
        }
      }
    }
  }

  outcome(10, "each built-in fault injection (L(k) sign flip, dropped 1/p(v) "
              "normalization) causes suite failures with reproducible "
              "witnesses",
          pass, detail);
}

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::cout << (failures == 0 ? "acceptance: all criteria pass"
                              : "acceptance: FAILURES present")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
