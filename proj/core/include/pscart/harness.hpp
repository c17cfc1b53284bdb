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

#ifndef PSCART_HARNESS_HPP
#define PSCART_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pscart/causal.hpp"
#include "pscart/dgp.hpp"

namespace pscart {

enum class MissingHandling { none, direct, cca, mi };

struct EstimatorSpec {
  PsMethod method = PsMethod::bacart;
  MissingHandling handling = MissingHandling::direct;
  EffectMode mode = EffectMode::ipw;
};

/// "mi+bacart" -> (bacart, mi); "bcart" -> (bcart, direct); "none+lrm" is
/// the no-missing-data baseline.  Mode is orthogonal and set separately.
std::pair<PsMethod, MissingHandling> parse_estimator_token(std::string_view token);
std::string estimator_label(PsMethod method, MissingHandling handling);
std::string mode_label(EffectMode mode);

/// The ten estimator rows of the main results table (baselines first).
std::vector<std::pair<PsMethod, MissingHandling>> default_estimators();

struct EstimatorMetrics {
  EstimatorSpec spec;
  double bias = 0.0;
  double bias_diff = 0.0;  // vs the same method/mode without missing data; NaN if absent
  double empirical_se = 0.0;
  double mean_se = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  int reps_used = 0;
  int failures = 0;
};

struct MetricsReport {
  std::string scenario;
  double truth = 0.0;
  int replications = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<EstimatorMetrics> rows;
};

struct HarnessOptions {
  std::size_t n = 2000;
  int threads = 0;  // 0 = hardware concurrency
  PsFitConfig ps;
  int mice_m = 5;
  int mice_cycles = 5;
  std::size_t truth_draws = 4000000;
  double ci_level = 0.90;
  std::function<void(int done, int total)> progress;

  static HarnessOptions desk() {
    HarnessOptions o;
    o.ps.boost = BoostConfig::desk();
    return o;
  }
  static HarnessOptions full() {
    HarnessOptions o;
    o.ps.boost = BoostConfig::full();
    o.truth_draws = 10000000;
    return o;
  }
};

/// Per replication: generate a cohort, run every estimator, inject
/// missingness (same cohort), run every estimator again, score all of them
/// against the simulated truth.  Deterministic given the seed; failures are
/// recorded and excluded, never silently dropped.
MetricsReport run_scenario(const ScenarioConfig& cfg,
                           const std::vector<EstimatorSpec>& estimators, int replications,
                           std::uint64_t seed, const HarnessOptions& options);

/// sqrt(p(1-p)/R).
double coverage_mc_se(double coverage, int replications);

/// Lossless CSV (shortest round-trip doubles) and a 3-decimal markdown
/// rendering with the metric blocks ordered as in the results tables.
void emit_report_csv(const MetricsReport& report, std::ostream& out,
                     const std::vector<std::string>& provenance = {});
void emit_report_markdown(const MetricsReport& report, std::ostream& out);
MetricsReport read_report_csv(std::istream& in);

}  // namespace pscart

#endif  // PSCART_HARNESS_HPP
