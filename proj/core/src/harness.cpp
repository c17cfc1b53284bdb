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

#include "pscart/harness.hpp"

#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pscart/stats.hpp"

namespace pscart {

namespace {

constexpr std::uint64_t kFitPurposeBase = 100;
constexpr std::uint64_t kEstimatePurposeBase = 200;
constexpr std::uint64_t kMiPurposeBase = 300;

std::uint64_t fit_purpose(PsMethod m, MissingHandling h) {
  return kFitPurposeBase + static_cast<std::uint64_t>(m) * 8 +
         static_cast<std::uint64_t>(h);
}

std::uint64_t estimate_purpose(const EstimatorSpec& s) {
  return kEstimatePurposeBase + static_cast<std::uint64_t>(s.method) * 16 +
         static_cast<std::uint64_t>(s.handling) * 4 +
         static_cast<std::uint64_t>(s.mode);
}

std::uint64_t mi_purpose(PsMethod m, EffectMode mode) {
  return kMiPurposeBase + static_cast<std::uint64_t>(m) * 4 +
         static_cast<std::uint64_t>(mode);
}

struct RepResult {
  double point = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool ok = false;
};

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("read_report_csv: bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::pair<PsMethod, MissingHandling> parse_estimator_token(std::string_view token) {
  std::string t(token);
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  MissingHandling handling = MissingHandling::direct;
  std::string method = t;
  if (const auto plus = t.find('+'); plus != std::string::npos) {
    const std::string prefix = t.substr(0, plus);
    method = t.substr(plus + 1);
    if (prefix == "mi") {
      handling = MissingHandling::mi;
    } else if (prefix == "cca") {
      handling = MissingHandling::cca;
    } else if (prefix == "none") {
      handling = MissingHandling::none;
    } else {
      throw std::invalid_argument("unknown missing-data prefix: " + prefix);
    }
  }
  PsMethod m;
  if (method == "bacart") {
    m = PsMethod::bacart;
  } else if (method == "bcart") {
    m = PsMethod::bcart;
  } else if (method == "lrc") {
    m = PsMethod::lrc;
  } else if (method == "lrm") {
    m = PsMethod::lrm;
  } else {
    throw std::invalid_argument("unknown propensity method: " + method);
  }
  if ((m == PsMethod::lrc || m == PsMethod::lrm) &&
      (handling == MissingHandling::direct || handling == MissingHandling::cca)) {
    throw std::invalid_argument(
        "logistic propensity models require 'none' or 'mi' missing handling");
  }
  return {m, handling};
}

std::string estimator_label(PsMethod method, MissingHandling handling) {
  std::string m;
  switch (method) {
    case PsMethod::bacart: m = "baCART"; break;
    case PsMethod::bcart: m = "bCART"; break;
    case PsMethod::lrc: m = "LRc"; break;
    case PsMethod::lrm: m = "LRm"; break;
  }
  switch (handling) {
    case MissingHandling::none: return "none+" + m;
    case MissingHandling::direct: return m;
    case MissingHandling::cca: return "CCA+" + m;
    case MissingHandling::mi: return "MI+" + m;
  }
  return m;
}

std::string mode_label(EffectMode mode) { return mode == EffectMode::ipw ? "ipw" : "match"; }

std::vector<std::pair<PsMethod, MissingHandling>> default_estimators() {
  return {
      {PsMethod::bacart, MissingHandling::none},
      {PsMethod::bcart, MissingHandling::none},
      {PsMethod::bacart, MissingHandling::direct},
      {PsMethod::bcart, MissingHandling::direct},
      {PsMethod::bacart, MissingHandling::cca},
      {PsMethod::bcart, MissingHandling::cca},
      {PsMethod::bacart, MissingHandling::mi},
      {PsMethod::bcart, MissingHandling::mi},
      {PsMethod::lrc, MissingHandling::mi},
      {PsMethod::lrm, MissingHandling::mi},
  };
}

double coverage_mc_se(double coverage, int replications) {
  if (replications < 1) throw std::invalid_argument("coverage_mc_se: R must be >= 1");
  return std::sqrt(coverage * (1.0 - coverage) / replications);
}

namespace {

// All estimator work for one replication.  Propensity fits and imputations
// are shared across the specs that reuse them.
std::vector<RepResult> run_replication(const ScenarioConfig& cfg,
                                       const std::vector<EstimatorSpec>& specs, int rep,
                                       std::uint64_t seed, const HarnessOptions& opt) {
  const auto rep_id = static_cast<std::uint64_t>(rep) + 1;
  RngStream cohort_rng(seed, rep_id, purpose::covariates);
  const auto cohort = generate_cohort(opt.n, cfg.gamma, cfg.exposure_model, cohort_rng);
  RngStream miss_rng(seed, rep_id, purpose::missingness);
  const auto with_missing = inject_missingness(cohort, cfg, miss_rng);

  std::optional<Dataset> cca_data;
  std::optional<ImputedSet> imputed;
  std::map<int, PropensityScores> ps_cache;  // key = method*8 + handling

  auto data_for = [&](MissingHandling h) -> const Dataset& {
    switch (h) {
      case MissingHandling::none: return cohort.data;
      case MissingHandling::direct: return with_missing;
      case MissingHandling::cca:
        if (!cca_data) cca_data = complete_cases(with_missing);
        return *cca_data;
      default: throw std::logic_error("data_for: mi has no single dataset");
    }
  };

  auto scores_for = [&](PsMethod m, MissingHandling h) -> const PropensityScores& {
    const int key = static_cast<int>(m) * 8 + static_cast<int>(h);
    auto it = ps_cache.find(key);
    if (it == ps_cache.end()) {
      RngStream fit_rng(seed, rep_id, fit_purpose(m, h));
      it = ps_cache.emplace(key, fit_propensity(data_for(h), m, opt.ps, fit_rng)).first;
    }
    return it->second;
  };

  std::vector<RepResult> results(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& spec = specs[s];
    try {
      EffectEstimate est;
      if (spec.handling == MissingHandling::mi) {
        if (!imputed) {
          RngStream mice_rng(seed, rep_id, purpose::mice);
          MiceConfig mcfg = default_mice_config(with_missing);
          mcfg.m = opt.mice_m;
          mcfg.cycles = opt.mice_cycles;
          imputed = mice_impute(with_missing, mcfg, mice_rng);
        }
        RngStream mi_rng(seed, rep_id, mi_purpose(spec.method, spec.mode));
        est = estimate_att_mi(*imputed, spec.method, spec.mode, opt.ps, mi_rng,
                              opt.ci_level);
      } else {
        const auto& ps = scores_for(spec.method, spec.handling);
        RngStream est_rng(seed, rep_id, estimate_purpose(spec));
        est = estimate_att(data_for(spec.handling), ps, spec.mode, est_rng, opt.ci_level);
      }
      results[s] = {est.point, est.se, est.ci_low, est.ci_high, true};
    } catch (const std::exception&) {
      results[s].ok = false;
    }
  }
  return results;
}

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& cfg,
                           const std::vector<EstimatorSpec>& estimators, int replications,
                           std::uint64_t seed, const HarnessOptions& options) {
  if (replications < 2) {
    throw std::invalid_argument("run_scenario: need >= 2 replications");
  }
  if (estimators.empty()) {
    throw std::invalid_argument("run_scenario: no estimators requested");
  }

  MetricsReport report;
  report.scenario = cfg.id;
  report.replications = replications;
  report.seed = seed;
  report.n = options.n;
  {
    RngStream truth_rng(seed, 0, purpose::truth_oracle);
    report.truth =
        true_att_log_or(cfg.gamma, cfg.exposure_model, options.truth_draws, truth_rng);
  }

  std::vector<std::vector<RepResult>> all(static_cast<std::size_t>(replications));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  int n_threads = options.threads > 0
                      ? options.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, replications);

  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replications) return;
      all[static_cast<std::size_t>(r)] =
          run_replication(cfg, estimators, r, seed, options);
      const int d = done.fetch_add(1) + 1;
      if (options.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        options.progress(d, replications);
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Deterministic reduction in replication order.
  report.rows.resize(estimators.size());
  for (std::size_t s = 0; s < estimators.size(); ++s) {
    auto& row = report.rows[s];
    row.spec = estimators[s];
    std::vector<double> points;
    std::vector<double> ses;
    int covered = 0;
    for (int r = 0; r < replications; ++r) {
      const auto& res = all[static_cast<std::size_t>(r)][s];
      if (!res.ok) {
        ++row.failures;
        continue;
      }
      points.push_back(res.point);
      ses.push_back(res.se);
      if (res.ci_low <= report.truth && report.truth <= res.ci_high) ++covered;
    }
    row.reps_used = static_cast<int>(points.size());
    if (row.reps_used >= 2) {
      const double m = mean(points);
      row.bias = m - report.truth;
      row.empirical_se = empirical_sd(points);
      row.mean_se = mean(ses);
      double mse = 0.0;
      for (double pt : points) mse += (pt - report.truth) * (pt - report.truth);
      row.mse = mse / row.reps_used;
      row.coverage = static_cast<double>(covered) / row.reps_used;
    }
    row.bias_diff = std::numeric_limits<double>::quiet_NaN();
  }
  // Pair each with-missing row against its no-missing baseline.
  for (auto& row : report.rows) {
    if (row.spec.handling == MissingHandling::none) continue;
    for (const auto& base : report.rows) {
      if (base.spec.handling == MissingHandling::none &&
          base.spec.method == row.spec.method && base.spec.mode == row.spec.mode &&
          base.reps_used >= 2 && row.reps_used >= 2) {
        row.bias_diff = row.bias - base.bias;
      }
    }
  }
  return report;
}

void emit_report_csv(const MetricsReport& report, std::ostream& out,
                     const std::vector<std::string>& provenance) {
  for (const auto& line : provenance) out << "# " << line << "\n";
  out << "# scenario=" << report.scenario << " truth=" << format_double(report.truth)
      << " reps=" << report.replications << " seed=" << report.seed
      << " n=" << report.n << "\n";
  out << "scenario,method,handling,mode,bias,bias_diff,empirical_se,mean_se,mse,"
         "coverage,reps_used,failures\n";
  for (const auto& row : report.rows) {
    const char* handling = "";
    switch (row.spec.handling) {
      case MissingHandling::none: handling = "none"; break;
      case MissingHandling::direct: handling = "direct"; break;
      case MissingHandling::cca: handling = "cca"; break;
      case MissingHandling::mi: handling = "mi"; break;
    }
    const char* method = "";
    switch (row.spec.method) {
      case PsMethod::bacart: method = "bacart"; break;
      case PsMethod::bcart: method = "bcart"; break;
      case PsMethod::lrc: method = "lrc"; break;
      case PsMethod::lrm: method = "lrm"; break;
    }
    out << report.scenario << ',' << method << ',' << handling << ','
        << mode_label(row.spec.mode) << ',' << format_double(row.bias) << ','
        << (std::isnan(row.bias_diff) ? "" : format_double(row.bias_diff)) << ','
        << format_double(row.empirical_se) << ',' << format_double(row.mean_se) << ','
        << format_double(row.mse) << ',' << format_double(row.coverage) << ','
        << row.reps_used << ',' << row.failures << "\n";
  }
}

MetricsReport read_report_csv(std::istream& in) {
  MetricsReport report;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string kv;
      while (meta >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "scenario") report.scenario = val;
        if (key == "truth") report.truth = parse_double(val);
        if (key == "reps") report.replications = static_cast<int>(parse_double(val));
        if (key == "seed") report.seed = static_cast<std::uint64_t>(parse_double(val));
        if (key == "n") report.n = static_cast<std::size_t>(parse_double(val));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    if (f.size() != 12) throw std::runtime_error("read_report_csv: bad row");
    EstimatorMetrics row;
    row.spec.method = f[1] == "bacart"  ? PsMethod::bacart
                      : f[1] == "bcart" ? PsMethod::bcart
                      : f[1] == "lrc"   ? PsMethod::lrc
                                        : PsMethod::lrm;
    row.spec.handling = f[2] == "none"     ? MissingHandling::none
                        : f[2] == "direct" ? MissingHandling::direct
                        : f[2] == "cca"    ? MissingHandling::cca
                                           : MissingHandling::mi;
    row.spec.mode = f[3] == "ipw" ? EffectMode::ipw : EffectMode::match;
    row.bias = parse_double(f[4]);
    row.bias_diff =
        f[5].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[5]);
    row.empirical_se = parse_double(f[6]);
    row.mean_se = parse_double(f[7]);
    row.mse = parse_double(f[8]);
    row.coverage = parse_double(f[9]);
    row.reps_used = static_cast<int>(parse_double(f[10]));
    row.failures = static_cast<int>(parse_double(f[11]));
    report.rows.push_back(row);
  }
  return report;
}

void emit_report_markdown(const MetricsReport& report, std::ostream& out) {
  auto fmt3 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };
  out << "Scenario " << report.scenario << ": truth " << fmt3(report.truth) << ", "
      << report.replications << " replications, n = " << report.n << ", seed "
      << report.seed << "\n\n";
  out << "| Metric | Estimator | Mode | Value |\n";
  out << "|---|---|---|---|\n";
  struct Block {
    const char* name;
    double EstimatorMetrics::* field;
  };
  const Block blocks[] = {
      {"Bias", &EstimatorMetrics::bias},
      {"Bias dif.", &EstimatorMetrics::bias_diff},
      {"Empirical SE", &EstimatorMetrics::empirical_se},
      {"Mean SE-hat", &EstimatorMetrics::mean_se},
      {"MSE", &EstimatorMetrics::mse},
      {"Coverage", &EstimatorMetrics::coverage},
  };
  for (const auto& block : blocks) {
    for (const auto& row : report.rows) {
      const double v = row.*(block.field);
      if (std::isnan(v)) continue;
      out << "| " << block.name << " | "
          << estimator_label(row.spec.method, row.spec.handling) << " | "
          << mode_label(row.spec.mode) << " | " << fmt3(v) << " |\n";
    }
  }
  bool any_failures = false;
  for (const auto& row : report.rows) any_failures |= row.failures > 0;
  if (any_failures) {
    out << "\nFailures (excluded from the metrics):\n";
    for (const auto& row : report.rows) {
      if (row.failures == 0) continue;
      out << "- " << estimator_label(row.spec.method, row.spec.handling) << " ("
          << mode_label(row.spec.mode) << "): " << row.failures << " of "
          << report.replications;
      if (row.failures * 100 > report.replications) out << " — exceeds 1%, row invalid";
      out << "\n";
    }
  }
}

}  // namespace pscart
