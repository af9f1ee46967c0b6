#include "rppm/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <unistd.h>
#include <vector>

namespace {

bool use_color() {
  return isatty(fileno(stdout)) && std::getenv("NO_COLOR") == nullptr;
}

const char* color(const char* code) { return use_color() ? code : ""; }

void print_records(const std::vector<rppm::CaseRecord>& records) {
  std::printf("%-16s %-6s %4s %10s %6s %12s %14s %12s\n", "case", "method",
              "n", "lambda0", "iters", "f_final", "det_final", "termination");
  for (const auto& r : records) {
    std::printf("%-16s %-6s %4lld %10s %6d %12s %14s %s%s%s\n",
                r.case_id.c_str(), r.method.c_str(),
                static_cast<long long>(r.n),
                rppm::format_double(r.lambda0).c_str(), r.iterations,
                rppm::format_double(r.f_final).c_str(),
                rppm::format_double(r.det_final).c_str(),
                r.valid ? color("\033[32m") : color("\033[31m"),
                (r.termination + (r.valid ? "" : "  INVALID: " +
                                                     r.invalid_reason))
                    .c_str(),
                color("\033[0m"));
  }
}

int finish(const std::vector<rppm::CaseRecord>& records) {
  print_records(records);
  for (const auto& r : records) {
    if (!r.valid) {
      std::fprintf(stderr, "invalid record %s (%s): %s\n", r.case_id.c_str(),
                   r.method.c_str(), r.invalid_reason.c_str());
      return 1;
    }
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian proximal point methods on the SPD manifold"};
  app.require_subcommand(1);

  rppm::ExperimentConfig cfg;
  std::string method_str = "adap";
  double lambda0 = 0.1;
  long long n = 10;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--n", n, "matrix size");
    sub->add_option("--alpha", cfg.alpha, "f1 alpha parameter");
    sub->add_option("--mu", cfg.mu, "f1 mu parameter");
    sub->add_option("--eps", cfg.eps_stop, "step-distance stopping tolerance")
        ->default_val(1e-8);
    sub->add_option("--max-iter", cfg.max_outer,
                    "outer iteration cap (0 = experiment default: 100, "
                    "or 30000 for scaling)")
        ->default_val(0);
    sub->add_option("--seed", cfg.seed, "base RNG seed");
    sub->add_option("--out", cfg.output_dir, "output directory for CSV/SVG");
    sub->add_flag("--full", cfg.full, "paper-scale grids");
    sub->add_option("--threads", cfg.threads, "OpenMP worker count")
        ->default_val(1);
  };

  CLI::App* lam = app.add_subcommand(
      "lambda-sensitivity", "Adap-RPPM on f1 over a lambda0 grid");
  add_common(lam);
  lam->add_option("--lambda0-grid", cfg.lambda0_grid, "lambda0 values");

  CLI::App* sca = app.add_subcommand(
      "scaling", "Adap-RPPM on f2 over a matrix-size grid");
  add_common(sca);
  sca->add_option("--n-grid", cfg.n_grid, "matrix sizes");

  CLI::App* cmp = app.add_subcommand(
      "comparison", "adap/dca/dcppa multi-start comparison on f3");
  add_common(cmp);
  cmp->add_option("--n-grid", cfg.n_grid, "matrix sizes");
  cmp->add_option("--starts", cfg.starts_per_case,
                  "random starts per dimension");

  CLI::App* sol = app.add_subcommand("solve", "single solver run");
  add_common(sol);
  sol->add_option("--problem", cfg.problem, "f1 | f2 | f3");
  sol->add_option("--method", method_str, "rppm | adap | dca | dcppa");
  sol->add_option("--lambda0", lambda0, "initial proximal parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  cfg.n = static_cast<Eigen::Index>(n);
  try {
    if (lam->parsed()) {
      return finish(rppm::run_lambda_sensitivity(cfg));
    }
    if (sca->parsed()) {
      return finish(rppm::run_scaling(cfg));
    }
    if (cmp->parsed()) {
      auto [records, profile] = rppm::run_comparison(cfg);
      (void)profile;
      return finish(records);
    }
    if (sol->parsed()) {
      rppm::CaseRecord rec =
          rppm::run_single(cfg, rppm::method_from_string(method_str), lambda0);
      return finish({rec});
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
