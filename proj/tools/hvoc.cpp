#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hvoc/fock.hpp"
#include "hvoc/heisenberg.hpp"
#include "hvoc/parse.hpp"
#include "hvoc/verify.hpp"
#include "hvoc/version.hpp"
#include "hvoc/voa.hpp"
#include "hvoc/voc.hpp"

namespace {

struct WindowOption {
  int lo = -5;
  int hi = 5;
};

bool parse_window(const std::string& text, WindowOption& w) {
  auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  try {
    w.lo = std::stoi(text.substr(0, colon));
    w.hi = std::stoi(text.substr(colon + 1));
  } catch (...) {
    return false;
  }
  return true;
}

int run_verify(const std::string& suite, const hvoc::VerificationConfig& cfg,
               const std::string& report_path) {
  hvoc::VerificationReport report;
  if (suite == "voa") {
    report = hvoc::verify_voa(cfg);
  } else if (suite == "voc") {
    report = hvoc::verify_voc(cfg);
  } else if (suite == "adjoint") {
    report = hvoc::verify_adjunction(cfg);
  } else if (suite == "virasoro") {
    report = hvoc::verify_virasoro_bracket(cfg);
  } else if (suite == "preserving") {
    report = hvoc::verify_virasoro_preserving(cfg);
  } else if (suite == "invariance") {
    report = hvoc::diagnose_invariance(cfg);
  } else if (suite == "all") {
    report = hvoc::verify_all(cfg);
  } else {
    std::cerr << "error: unknown suite '" << suite
              << "' (expected voa|voc|adjoint|virasoro|preserving|invariance|"
                 "all)\n";
    return 2;
  }
  std::cout << report.summary_text();
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "error: cannot write report to " << report_path << "\n";
      return 2;
    }
    out << report.to_json().dump(2) << "\n";
  }
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(hvoc::kEngineName) + " " + hvoc::kEngineVersion +
               " - exact symbolic engine for the rank-d oscillator vertex "
               "operator algebra and its adjoint coalgebra"};
  app.require_subcommand(1);

  // basis
  int basis_dim = 1, basis_weight = 0;
  auto* basis_cmd = app.add_subcommand("basis", "list monomials of a weight");
  basis_cmd->add_option("--dim", basis_dim, "number of oscillator colors")
      ->required();
  basis_cmd->add_option("--weight", basis_weight, "weight to enumerate")
      ->required();

  // pair
  int pair_dim = 1;
  std::string pair_u, pair_v;
  auto* pair_cmd = app.add_subcommand("pair", "bilinear form of two vectors");
  pair_cmd->add_option("--dim", pair_dim, "number of oscillator colors")
      ->required();
  pair_cmd->add_option("U", pair_u, "first vector")->required();
  pair_cmd->add_option("V", pair_v, "second vector")->required();

  // ycoeff
  int y_dim = 1, y_k = 0;
  std::string y_v, y_w;
  auto* y_cmd = app.add_subcommand("ycoeff", "v_k w");
  y_cmd->add_option("--dim", y_dim, "number of oscillator colors")->required();
  y_cmd->add_option("--k", y_k, "mode index k")->required();
  y_cmd->add_option("V", y_v, "operator argument v")->required();
  y_cmd->add_option("W", y_w, "target vector w")->required();

  // coproduct
  int cop_dim = 1, cop_k = 0;
  std::string cop_u;
  auto* cop_cmd = app.add_subcommand("coproduct", "Delta_k(u)");
  cop_cmd->add_option("--dim", cop_dim, "number of oscillator colors")
      ->required();
  cop_cmd->add_option("--k", cop_k, "coefficient index k")->required();
  cop_cmd->add_option("U", cop_u, "vector u")->required();

  // lapply
  int l_dim = 1, l_k = 0;
  std::string l_v;
  auto* l_cmd = app.add_subcommand("lapply", "L(k) v");
  l_cmd->add_option("--dim", l_dim, "number of oscillator colors")->required();
  l_cmd->add_option("--k", l_k, "Virasoro index k")->required();
  l_cmd->add_option("V", l_v, "vector v")->required();

  // verify
  std::string verify_suite;
  hvoc::VerificationConfig cfg;
  std::string window_text, report_path;
  auto* verify_cmd = app.add_subcommand(
      "verify", "run an axiom suite (voa|voc|adjoint|virasoro|preserving|"
                "invariance|all)");
  verify_cmd->add_option("suite", verify_suite, "suite to run")->required();
  verify_cmd->add_option("--dim", cfg.dim, "number of oscillator colors");
  verify_cmd->add_option("--max-weight", cfg.max_weight,
                         "largest basis weight in the domain");
  verify_cmd->add_option("--window", window_text,
                         "exponent window LO:HI (default -5:5)");
  verify_cmd->add_option("--bracket-range", cfg.bracket_range,
                         "j,k range for the Virasoro bracket");
  verify_cmd->add_option("--preserving-range", cfg.preserving_range,
                         "|k| range for form preservation");
  verify_cmd->add_option("--max-work", cfg.max_work,
                         "budget on estimated elementary comparisons");
  verify_cmd->add_option("--jobs", cfg.jobs, "parallel workers");
  verify_cmd->add_option("--report", report_path, "write a JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*basis_cmd) {
      for (const auto& m : hvoc::basis_of_weight(basis_dim, basis_weight))
        std::cout << hvoc::print_monomial(m) << "\n";
      return 0;
    }
    if (*pair_cmd) {
      auto u = hvoc::parse_vector(pair_u, pair_dim);
      auto v = hvoc::parse_vector(pair_v, pair_dim);
      std::cout << hvoc::print_rational(hvoc::bilinear_form(u, v)) << "\n";
      return 0;
    }
    if (*y_cmd) {
      hvoc::VoaContext ctx(y_dim);
      auto v = hvoc::parse_vector(y_v, y_dim);
      auto w = hvoc::parse_vector(y_w, y_dim);
      std::cout << hvoc::print_vector(ctx.y_coefficient(v, y_k, w)) << "\n";
      return 0;
    }
    if (*cop_cmd) {
      hvoc::VocContext ctx(cop_dim);
      auto u = hvoc::parse_vector(cop_u, cop_dim);
      std::cout << hvoc::print_tensor(ctx.coproduct_coefficient(u, cop_k))
                << "\n";
      return 0;
    }
    if (*l_cmd) {
      hvoc::VoaContext ctx(l_dim);
      auto v = hvoc::parse_vector(l_v, l_dim);
      std::cout << hvoc::print_vector(ctx.virasoro_apply(l_k, v)) << "\n";
      return 0;
    }
    if (*verify_cmd) {
      WindowOption w;
      if (!window_text.empty()) {
        if (!parse_window(window_text, w)) {
          std::cerr << "error: --window expects LO:HI\n";
          return 2;
        }
        cfg.window_lo = w.lo;
        cfg.window_hi = w.hi;
      }
      return run_verify(verify_suite, cfg, report_path);
    }
  } catch (const hvoc::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const hvoc::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hvoc::window_error& e) {
    std::cerr << "window error: " << e.what() << "\n";
    return 2;
  } catch (const hvoc::rank_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
