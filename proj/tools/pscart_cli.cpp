// Copyright 2026 The pscart Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pscart_cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pscart/causal.hpp"
#include "pscart/csv.hpp"
#include "pscart/dgp.hpp"
#include "pscart/discrete_scm.hpp"
#include "pscart/harness.hpp"

namespace pscart::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> provenance_lines(const std::string& command_echo,
                                          std::uint64_t seed) {
  return {std::string("pscart ") + kVersion, "command: " + command_echo,
          "seed: " + std::to_string(seed)};
}

void build_app(CLI::App& app, RunConfig& cfg) {
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file");
  app.get_formatter()->column_width(30);

  auto* gen = app.add_subcommand("generate", "Simulate one scenario cohort to CSV");
  gen->add_option("--scenario", cfg.generate.scenario, "Scenario id")
      ->check(CLI::IsMember(ScenarioConfig::preset_ids()));
  gen->add_option("--n", cfg.generate.n, "Rows to generate")->check(CLI::PositiveNumber);
  gen->add_option("--seed", cfg.generate.seed, "Random seed");
  gen->add_option("--out", cfg.generate.out, "Output CSV path")->required();
  gen->add_option("--schema-out", cfg.generate.schema_out, "Column schema JSON path");
  gen->add_option("--latents", cfg.generate.latents_out,
                  "Oracle-only sidecar CSV (noise, true scores, counterfactuals)");

  auto* est = app.add_subcommand("estimate", "Estimate the ATT log odds ratio");
  est->add_option("--data", cfg.estimate.data_path, "Input CSV")->required();
  est->add_option("--schema", cfg.estimate.schema_path, "Column schema JSON")->required();
  est->add_option("--ps", cfg.estimate.ps_method, "Propensity method")
      ->check(CLI::IsMember({"bacart", "bcart", "lrc", "lrm"}));
  est->add_option("--missing", cfg.estimate.missing, "Missing-data handling")
      ->check(CLI::IsMember({"direct", "cca", "mi"}));
  est->add_option("--mode", cfg.estimate.mode, "Effect estimator")
      ->check(CLI::IsMember({"ipw", "match"}));
  est->add_option("--preset", cfg.estimate.preset, "Hyperparameter preset")
      ->check(CLI::IsMember({"desk", "full"}));
  est->add_option("--seed", cfg.estimate.seed, "Random seed");
  est->add_option("--out", cfg.estimate.out, "Result CSV path (stdout when absent)");
  est->add_option("--diagnostics", cfg.estimate.diagnostics,
                  "Diagnostics JSON path (stdout when absent)");
  est->add_option("--ks-trace", cfg.estimate.ks_trace,
                  "Balance-trace CSV dump for boosted fits");
  est->add_option("--mice-m", cfg.estimate.mice_m, "Imputation count")
      ->check(CLI::Range(2, 100));
  est->add_option("--mice-cycles", cfg.estimate.mice_cycles, "Chained-equation sweeps")
      ->check(CLI::Range(1, 100));
  est->add_option("--boost-iters", cfg.estimate.boost_iterations,
                  "Boosting iterations (0 = preset default)");
  est->add_option("--boost-stride", cfg.estimate.boost_stride,
                  "Balance-evaluation cadence (0 = preset default)");
  est->add_option("--save-imputations", cfg.estimate.save_imputations,
                  "Directory for the completed datasets plus manifest (mi only)");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study over one scenario");
  sim->add_option("--scenario", cfg.simulate.scenario, "Scenario id")
      ->check(CLI::IsMember(ScenarioConfig::preset_ids()));
  sim->add_option("--reps", cfg.simulate.reps, "Replications")->check(CLI::Range(2, 1000000));
  sim->add_option("--preset", cfg.simulate.preset, "desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  sim->add_option("--estimators", cfg.simulate.estimators,
                  "Estimator tokens, e.g. bacart mi+bcart cca+bacart none+bcart")
      ->delimiter(',');
  sim->add_option("--mode", cfg.simulate.mode, "ipw, match, or both")
      ->check(CLI::IsMember({"ipw", "match", "both"}));
  sim->add_option("--seed", cfg.simulate.seed, "Random seed");
  sim->add_option("--out", cfg.simulate.out_dir, "Output directory")->required();
  sim->add_option("--n", cfg.simulate.n, "Cohort size per replication")
      ->check(CLI::PositiveNumber);
  sim->add_option("--threads", cfg.simulate.threads, "Worker threads (0 = hardware)");
  sim->add_option("--boost-iters", cfg.simulate.boost_iterations,
                  "Boosting iterations (0 = preset default)");
  sim->add_option("--boost-stride", cfg.simulate.boost_stride,
                  "Balance-evaluation cadence (0 = preset default)");

  auto* ver = app.add_subcommand("verify-appendix",
                                 "Check the weighting identities and counterexamples");
  ver->add_option("--joints", cfg.verify.joints, "Random joints per identity family")
      ->check(CLI::Range(1, 100000));
  ver->add_option("--seed", cfg.verify.seed, "Random seed");
}

std::string subcommand_name(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) return sub->get_name();
  return "";
}

HarnessOptions options_for_preset(const std::string& preset) {
  return preset == "full" ? HarnessOptions::full() : HarnessOptions::desk();
}

}  // namespace

RunConfig parse_cli(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Propensity-score estimation with trees under missing covariate data"};
  build_app(app, cfg);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);
  cfg.subcommand = subcommand_name(app);
  return cfg;
}

int run_generate(const GenerateConfig& cfg, const std::string& command_echo) {
  const auto scenario = ScenarioConfig::preset(cfg.scenario);
  RngStream cohort_rng(cfg.seed, 0, purpose::covariates);
  const auto cohort =
      generate_cohort(cfg.n, scenario.gamma, scenario.exposure_model, cohort_rng);
  RngStream miss_rng(cfg.seed, 0, purpose::missingness);
  const auto data = inject_missingness(cohort, scenario, miss_rng);

  write_csv_file(data, cfg.out, provenance_lines(command_echo, cfg.seed));
  if (!cfg.schema_out.empty()) write_schema_file(data.columns(), cfg.schema_out);
  if (!cfg.latents_out.empty()) {
    std::ofstream out(cfg.latents_out);
    if (!out) throw std::runtime_error("cannot open for writing: " + cfg.latents_out);
    for (const auto& line : provenance_lines(command_echo, cfg.seed)) {
      out << "# " << line << "\n";
    }
    out << "# oracle-only: simulation latents, never an estimator input\n";
    out << "eps_y,true_ps,y0,y1\n";
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
      out << shortest(cohort.eps_y[i]) << ',' << shortest(cohort.true_ps[i]) << ','
          << int(cohort.y0[i]) << ',' << int(cohort.y1[i]) << "\n";
    }
  }
  std::cerr << "wrote " << data.n_rows() << " rows to " << cfg.out << "\n";
  return kExitOk;
}

int run_estimate(const EstimateConfig& cfg, const std::string& command_echo) {
  const auto schema = read_schema_file(cfg.schema_path);
  const auto data = read_csv_file(cfg.data_path, schema);
  const auto [method, requested_handling] = [&] {
    const auto m = parse_estimator_token(cfg.missing == "mi" ? "mi+" + cfg.ps_method
                                         : cfg.missing == "cca"
                                             ? "cca+" + cfg.ps_method
                                             : cfg.ps_method);
    return m;
  }();

  PsFitConfig fit_cfg;
  fit_cfg.boost = cfg.preset == "full" ? BoostConfig::full() : BoostConfig::desk();
  if (cfg.boost_iterations > 0) fit_cfg.boost.iterations = cfg.boost_iterations;
  if (cfg.boost_stride > 0) fit_cfg.boost.eval_stride = cfg.boost_stride;

  EffectEstimate est;
  const auto mode = cfg.mode == "ipw" ? EffectMode::ipw : EffectMode::match;
  bool generalised = false;
  std::vector<KsPoint> trace;

  if (requested_handling == MissingHandling::mi) {
    RngStream mice_rng(cfg.seed, 0, purpose::mice);
    auto mice_cfg = default_mice_config(data);
    mice_cfg.m = cfg.mice_m;
    mice_cfg.cycles = cfg.mice_cycles;
    const auto imputed = mice_impute(data, mice_cfg, mice_rng);
    if (!cfg.save_imputations.empty()) {
      write_imputed_set(imputed, cfg.save_imputations, "imputation");
    }
    RngStream mi_rng(cfg.seed, 0, purpose::generic);
    est = estimate_att_mi(imputed, method, mode, fit_cfg, mi_rng);
  } else {
    const Dataset& used =
        requested_handling == MissingHandling::cca ? complete_cases(data) : data;
    RngStream fit_rng(cfg.seed, 0, purpose::bootstrap);
    PropensityScores ps;
    if (method == PsMethod::bcart && !cfg.ks_trace.empty()) {
      auto boost_rng = fit_rng.substream(purpose::boost_subsample);
      const auto model = fit_boosted(used, used.exposure_index(), fit_cfg.boost, boost_rng);
      trace = model.ks_trace;
      bool missing_covariate = false;
      for (auto j : used.covariate_indices()) missing_covariate |= !used.column_complete(j);
      ps = truncate_scores(model.training_scores, method, missing_covariate);
    } else {
      ps = fit_propensity(used, method, fit_cfg, fit_rng);
    }
    generalised = ps.generalised;
    RngStream est_rng(cfg.seed, 0, purpose::match_order);
    est = estimate_att(used, ps, mode, est_rng);
  }

  // One-line CSV result.
  std::ostringstream row;
  row << "point,se,ci_low,ci_high\n"
      << shortest(est.point) << ',' << shortest(est.se) << ',' << shortest(est.ci_low)
      << ',' << shortest(est.ci_high) << "\n";
  if (cfg.out.empty()) {
    for (const auto& line : provenance_lines(command_echo, cfg.seed)) {
      std::cout << "# " << line << "\n";
    }
    std::cout << row.str();
  } else {
    std::ofstream out(cfg.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + cfg.out);
    for (const auto& line : provenance_lines(command_echo, cfg.seed)) {
      out << "# " << line << "\n";
    }
    out << row.str();
  }

  nlohmann::json diag{{"ps_method", cfg.ps_method},
                      {"missing", cfg.missing},
                      {"mode", cfg.mode},
                      {"seed", cfg.seed},
                      {"rows", data.n_rows()},
                      {"generalised_score", generalised},
                      {"effective_sample_size", est.effective_sample_size},
                      {"ridge_fallbacks", est.ridge_fallbacks}};
  if (est.matched_pairs >= 0) diag["matched_pairs"] = est.matched_pairs;
  if (std::isfinite(est.df)) diag["pooled_df"] = est.df;
  if (cfg.diagnostics.empty()) {
    std::cout << diag.dump(2) << "\n";
  } else {
    std::ofstream out(cfg.diagnostics);
    if (!out) throw std::runtime_error("cannot open for writing: " + cfg.diagnostics);
    out << diag.dump(2) << "\n";
  }

  if (!cfg.ks_trace.empty() && !trace.empty()) {
    std::ofstream out(cfg.ks_trace);
    if (!out) throw std::runtime_error("cannot open for writing: " + cfg.ks_trace);
    out << "iteration,mean_ks\n";
    for (const auto& pt : trace) out << pt.iteration << ',' << shortest(pt.mean_ks) << "\n";
  }
  return kExitOk;
}

int run_simulate(const SimulateConfig& cfg, const std::string& command_echo) {
  const auto scenario = ScenarioConfig::preset(cfg.scenario);
  auto options = options_for_preset(cfg.preset);
  options.n = cfg.n;
  options.threads = cfg.threads;
  if (cfg.boost_iterations > 0) options.ps.boost.iterations = cfg.boost_iterations;
  if (cfg.boost_stride > 0) options.ps.boost.eval_stride = cfg.boost_stride;
  options.progress = [](int done, int total) {
    if (done % 10 == 0 || done == total) {
      std::cerr << "rep " << done << "/" << total << "\n";
    }
  };

  std::vector<std::pair<PsMethod, MissingHandling>> methods;
  if (cfg.estimators.empty()) {
    methods = default_estimators();
  } else {
    for (const auto& token : cfg.estimators) methods.push_back(parse_estimator_token(token));
  }
  std::vector<EffectMode> modes;
  if (cfg.mode == "both") {
    modes = {EffectMode::ipw, EffectMode::match};
  } else {
    modes = {cfg.mode == "ipw" ? EffectMode::ipw : EffectMode::match};
  }
  std::vector<EstimatorSpec> specs;
  for (const auto mode : modes) {
    for (const auto& [m, h] : methods) specs.push_back({m, h, mode});
  }

  const auto report = run_scenario(scenario, specs, cfg.reps, cfg.seed, options);

  std::filesystem::create_directories(cfg.out_dir);
  const auto csv_path = cfg.out_dir + "/report.csv";
  const auto md_path = cfg.out_dir + "/report.md";
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + csv_path);
    emit_report_csv(report, out, provenance_lines(command_echo, cfg.seed));
  }
  {
    std::ofstream out(md_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + md_path);
    emit_report_markdown(report, out);
  }
  std::cerr << "report written to " << csv_path << " and " << md_path << "\n";
  return kExitOk;
}

int run_verify_appendix(const VerifyAppendixConfig& cfg) {
  struct Row {
    std::string name;
    double computed;
    double expected;
    bool ok;
  };
  std::vector<Row> rows;
  constexpr double tol = 1e-12;
  auto add = [&](const std::string& name, double computed, double expected) {
    rows.push_back({name, computed, expected, std::abs(computed - expected) <= tol});
  };

  int phi_failures = 0;
  int gamma_failures = 0;
  for (int k = 0; k < cfg.joints; ++k) {
    RngStream rng(cfg.seed + static_cast<std::uint64_t>(k), 0, purpose::generic);
    const auto phi = verify_phi_identities(random_exchangeable_joint(rng));
    if (!phi.pass(tol)) ++phi_failures;
    RngStream rng2(cfg.seed + static_cast<std::uint64_t>(k), 1, purpose::generic);
    const auto gamma = verify_gamma_identities(random_v_exchangeable_joint(rng2));
    if (!gamma.pass(tol)) ++gamma_failures;
  }
  rows.push_back({"usual-score identities on " + std::to_string(cfg.joints) +
                      " random exchangeable joints (failures)",
                  static_cast<double>(phi_failures), 0.0, phi_failures == 0});
  rows.push_back({"generalized-score identities on " + std::to_string(cfg.joints) +
                      " random joints (failures)",
                  static_cast<double>(gamma_failures), 0.0, gamma_failures == 0});

  const auto b = check_masked_noise_example();
  add("masked-noise Pr(eps<=1/2 | A=0, masked)", b.eps_le_half_a0, 2.0 / 3.0);
  add("masked-noise Pr(eps<=1/2 | A=1, masked)", b.eps_le_half_a1, 3.0 / 4.0);
  add("masked-noise e*(masked)", b.e_star_masked, 4.0 / 7.0);
  add("masked-noise covariate balance deviation", b.w_balance_dev, 0.0);
  rows.push_back({"masked-noise arm dependence of the noise law", 1.0, 1.0,
                  b.counterfactual_dependence});

  const auto c = check_pre_exposure_masking_example();
  add("pre-exposure-masking e(w=0)", c.e_w[0], 0.38);
  add("pre-exposure-masking e(w=1)", c.e_w[1], 0.38);
  add("pre-exposure-masking e*(masked)", c.e_star_masked, 0.20);
  add("pre-exposure-masking e*(observed)", c.e_star_observed, 0.40);
  add("pre-exposure-masking Pr(Y0=1 | A=0, e*=0.20)", c.y0_given_estar_masked[0], 0.10);
  add("pre-exposure-masking Pr(Y0=1 | A=1, e*=0.20)", c.y0_given_estar_masked[1], 0.10);
  add("pre-exposure-masking Pr(Y0=1 | A=0, e(W))", c.y0_given_ew[0], 0.170 / 0.62);
  add("pre-exposure-masking Pr(Y0=1 | A=1, e(W))", c.y0_given_ew[1], 0.110 / 0.38);
  rows.push_back({"pre-exposure-masking arm dependence given e(W)", 1.0, 1.0,
                  std::abs(c.y0_given_ew[0] - c.y0_given_ew[1]) > 1e-3});

  bool all_ok = true;
  std::printf("%-64s %-22s %-22s %s\n", "identity", "computed", "expected", "status");
  for (const auto& row : rows) {
    all_ok &= row.ok;
    std::printf("%-64s %-22.16g %-22.16g %s\n", row.name.c_str(), row.computed,
                row.expected, row.ok ? "pass" : "FAIL");
  }
  return all_ok ? kExitOk : kExitRuntime;
}

int run_cli(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Propensity-score estimation with trees under missing covariate data"};
  build_app(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  cfg.subcommand = subcommand_name(app);

  std::string echo = "pscart";
  for (int i = 1; i < argc; ++i) echo += std::string(" ") + argv[i];

  try {
    if (cfg.subcommand == "generate") return run_generate(cfg.generate, echo);
    if (cfg.subcommand == "estimate") return run_estimate(cfg.estimate, echo);
    if (cfg.subcommand == "simulate") return run_simulate(cfg.simulate, echo);
    if (cfg.subcommand == "verify-appendix") return run_verify_appendix(cfg.verify);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace pscart::cli
