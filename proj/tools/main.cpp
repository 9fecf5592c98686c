#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cycsurv/cox.hpp"
#include "cycsurv/csv.hpp"
#include "cycsurv/trial.hpp"
#include "cycsurv/validate.hpp"

namespace {

int run_simulate(const std::string& config, std::uint64_t seed,
                 const std::string& out_dir,
                 const std::vector<std::string>& overrides,
                 bool skip_outcomes) {
  const cycsurv::TrialConfig cfg = cycsurv::parse_config(config, overrides);
  const cycsurv::RunResult result =
      cycsurv::run_trials(cfg, seed, !skip_outcomes);
  cycsurv::emit(cfg, result, out_dir);

  const auto& s = result.summary;
  std::cout << "trials: " << s.trials << "\n";
  for (std::size_t ai = 0; ai < s.arms.size(); ++ai) {
    const auto& as = s.arms[ai];
    std::cout << "  " << as.label << ": n=" << as.n << " events=" << as.events;
    cycsurv::RunningStat fit_stat;
    for (const auto& f : s.fits) {
      if (f.arm == static_cast<int>(ai) && f.estimable &&
          f.status == cycsurv::FitStatus::Converged) {
        fit_stat.push(f.beta_hat);
      }
    }
    if (fit_stat.count() >= 1) {
      std::cout << " beta_hat_mean=" << cycsurv::format_double(fit_stat.mean());
      if (fit_stat.count() >= 2) {
        std::cout << " beta_hat_sd=" << cycsurv::format_double(fit_stat.sd());
      }
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}

int run_fit(const std::string& rows_path, bool include_x,
            const std::string& out_path) {
  const auto rows = cycsurv::read_rows_csv(rows_path);
  const cycsurv::FitResult r = cycsurv::fit_cox(rows, include_x);

  const char* status = r.status == cycsurv::FitStatus::Converged
                           ? "converged"
                           : (r.status == cycsurv::FitStatus::Separation
                                  ? "separation"
                                  : "max_iterations");
  std::cout << "beta = " << cycsurv::format_double(r.beta)
            << "  se = " << cycsurv::format_double(r.se)
            << "  loglik = " << cycsurv::format_double(r.loglik)
            << "  iterations = " << r.iterations << "  status = " << status
            << "\n";
  for (Eigen::Index c = 0; c < r.eta.size(); ++c) {
    std::cout << "eta" << (c + 1) << " = "
              << cycsurv::format_double(r.eta[c])
              << "  se = " << cycsurv::format_double(r.eta_se[c]) << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    cycsurv::CsvWriter w(f);
    std::vector<std::string> header = {"beta", "se", "loglik", "iterations",
                                       "status"};
    std::vector<std::string> row = {
        cycsurv::format_double(r.beta), cycsurv::format_double(r.se),
        cycsurv::format_double(r.loglik), std::to_string(r.iterations),
        status};
    for (Eigen::Index c = 0; c < r.eta.size(); ++c) {
      header.push_back("eta" + std::to_string(c + 1));
      header.push_back("eta" + std::to_string(c + 1) + "_se");
      row.push_back(cycsurv::format_double(r.eta[c]));
      row.push_back(cycsurv::format_double(r.eta_se[c]));
    }
    w.row(header);
    w.row(row);
  }
  return r.status == cycsurv::FitStatus::Converged ? 0 : 1;
}

int run_verify(int points, std::size_t samples, std::uint64_t seed) {
  bool ok = true;

  const cycsurv::OracleCheck oc = cycsurv::oracle_grid_check(points);
  const bool oc_pass =
      oc.max_abs_err <= 1e-6 && oc.censor_mismatches == 0 && oc.points > 0;
  ok = ok && oc_pass;
  std::cout << (oc_pass ? "PASS" : "FAIL") << " oracle-grid: " << oc.points
            << " points, max |dT| = " << cycsurv::format_double(oc.max_abs_err)
            << " d, censor mismatches = " << oc.censor_mismatches << "\n";

  for (const auto& c : cycsurv::continuity_checks()) {
    const bool pass = c.max_gap <= 1e-8;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " continuity " << c.name
              << ": max gap = " << cycsurv::format_double(c.max_gap) << " d\n";
  }

  for (const auto& c : cycsurv::pullback_checks(samples, seed)) {
    ok = ok && c.pass;
    std::cout << (c.pass ? "PASS" : "FAIL") << " pullback " << c.name
              << ": D = " << cycsurv::format_double(c.d) << " (crit "
              << cycsurv::format_double(c.critical) << ", n = " << c.n << ")\n";
  }

  const cycsurv::TwoSampleCheck ts = cycsurv::cross_approach_check(samples, seed);
  ok = ok && ts.pass;
  std::cout << (ts.pass ? "PASS" : "FAIL")
            << " cross-approach: D = " << cycsurv::format_double(ts.d)
            << " (crit " << cycsurv::format_double(ts.critical) << ")\n";

  std::cout << (ok ? "verify: all checks passed" : "verify: FAILURES above")
            << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survival-time simulation for cyclic multi-dose regimens"};
  app.require_subcommand(1);

  std::string config, out_dir = ".", rows_path, fit_out;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  bool skip_outcomes = false, include_x = false;
  int points = 40;
  std::size_t samples = 100000;
  std::uint64_t verify_seed = 20240901;

  CLI::App* sim = app.add_subcommand("simulate", "Run trials and write CSVs");
  sim->add_option("--config", config, "Config file")->required();
  sim->add_option("--seed", seed, "Master RNG seed")->required();
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--set", overrides,
                  "Override a config key, e.g. --set trials=10");
  sim->add_flag("--no-outcomes", skip_outcomes,
                "Skip the per-subject outcomes.csv");

  CLI::App* fit = app.add_subcommand("fit", "Fit counting-process rows");
  fit->add_option("--rows", rows_path, "Counting-process CSV")->required();
  fit->add_flag("--include-x", include_x, "Also fit the x covariates");
  fit->add_option("--out", fit_out, "Write the fit as a one-row CSV");

  CLI::App* verify = app.add_subcommand(
      "verify", "Check closed-form generators against the numerical oracle");
  verify->add_option("--points", points, "Grid points per configuration");
  verify->add_option("--samples", samples, "Draws per distributional check");
  verify->add_option("--seed", verify_seed, "Seed for distributional checks");

  CLI::App* figures =
      app.add_subcommand("figures", "Run trials and write plot-data CSVs only");
  figures->add_option("--config", config, "Config file")->required();
  figures->add_option("--seed", seed, "Master RNG seed")->required();
  figures->add_option("--out", out_dir, "Output directory");
  figures->add_option("--set", overrides,
                      "Override a config key, e.g. --set trials=10");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return run_simulate(config, seed, out_dir, overrides, skip_outcomes);
    }
    if (fit->parsed()) {
      return run_fit(rows_path, include_x, fit_out);
    }
    if (verify->parsed()) {
      return run_verify(points, samples, verify_seed);
    }
    if (figures->parsed()) {
      return run_simulate(config, seed, out_dir, overrides, true);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
