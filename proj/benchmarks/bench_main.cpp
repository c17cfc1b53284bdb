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

#include <benchmark/benchmark.h>

#include "pscart/bagging.hpp"
#include "pscart/boosting.hpp"
#include "pscart/causal.hpp"
#include "pscart/dgp.hpp"
#include "pscart/mice.hpp"
#include "pscart/mvn.hpp"

namespace {

using namespace pscart;

// One scenario-1 cohort with missingness, shared across benchmarks.
const Dataset& scenario_data() {
  static const Dataset d = [] {
    const auto cfg = ScenarioConfig::preset("1");
    RngStream rng(1, 0, purpose::covariates);
    const auto cohort = generate_cohort(2000, cfg.gamma, cfg.exposure_model, rng);
    RngStream miss(1, 0, purpose::missingness);
    return inject_missingness(cohort, cfg, miss);
  }();
  return d;
}

void BM_MvnSample(benchmark::State& state) {
  const auto cov = covariate_covariance();
  RngStream rng(2, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_mvn(static_cast<std::size_t>(state.range(0)), cov, rng));
  }
}
BENCHMARK(BM_MvnSample)->Arg(2000)->Arg(100000);

void BM_CohortGeneration(benchmark::State& state) {
  RngStream rng(3, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate_cohort(static_cast<std::size_t>(state.range(0)), 1.0,
                        ExposureModel::nonlinear, rng));
  }
}
BENCHMARK(BM_CohortGeneration)->Arg(2000);

void BM_SurrogateTreeFit(benchmark::State& state) {
  const auto& d = scenario_data();
  const auto features = d.covariate_indices();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_tree(d, 10, {}, TreeControls{}, features));
  }
}
BENCHMARK(BM_SurrogateTreeFit);

void BM_BaggedFit(benchmark::State& state) {
  const auto& d = scenario_data();
  for (auto _ : state) {
    RngStream rng(4, 0, purpose::bootstrap);
    const auto model =
        fit_bagged(d, 10, static_cast<int>(state.range(0)), TreeControls{}, rng);
    benchmark::DoNotOptimize(predict_ps_bagged(model, d));
  }
}
BENCHMARK(BM_BaggedFit)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BoostedFit(benchmark::State& state) {
  const auto& d = scenario_data();
  BoostConfig cfg = BoostConfig::desk();
  cfg.iterations = static_cast<int>(state.range(0));
  cfg.eval_stride = 25;
  for (auto _ : state) {
    RngStream rng(5, 0, purpose::boost_subsample);
    benchmark::DoNotOptimize(fit_boosted(d, 10, cfg, rng));
  }
}
BENCHMARK(BM_BoostedFit)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_MeanKsBalance(benchmark::State& state) {
  const auto& d = scenario_data();
  std::vector<double> scores(d.n_rows());
  RngStream rng(6, 0, 0);
  for (auto& s : scores) s = 0.1 + 0.8 * rng.uniform01();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_ks_balance(d, scores));
  }
}
BENCHMARK(BM_MeanKsBalance);

void BM_GreedyMatch(benchmark::State& state) {
  const auto& d = scenario_data();
  std::vector<double> raw(d.n_rows());
  RngStream rng(7, 0, 0);
  for (auto& s : raw) s = 0.1 + 0.8 * rng.uniform01();
  const auto ps = truncate_scores(raw, PsMethod::lrm);
  const auto a_col = d.column_values(10);
  const std::vector<double> a(a_col.begin(), a_col.end());
  for (auto _ : state) {
    RngStream order_rng(8, 0, purpose::match_order);
    benchmark::DoNotOptimize(greedy_match(ps, a, 0.2, order_rng));
  }
}
BENCHMARK(BM_GreedyMatch);

void BM_WeightedLogisticAtt(benchmark::State& state) {
  const auto& d = scenario_data();
  const auto y_col = d.column_values(11);
  const auto a_col = d.column_values(10);
  const std::vector<double> y(y_col.begin(), y_col.end());
  const std::vector<double> a(a_col.begin(), a_col.end());
  std::vector<double> w(d.n_rows());
  RngStream rng(9, 0, 0);
  for (auto& v : w) v = 0.2 + rng.uniform01();
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_logistic(y, a, w));
  }
}
BENCHMARK(BM_WeightedLogisticAtt);

void BM_MiceImpute(benchmark::State& state) {
  const auto& d = scenario_data();
  const auto cfg = default_mice_config(d);
  for (auto _ : state) {
    RngStream rng(10, 0, purpose::mice);
    benchmark::DoNotOptimize(mice_impute(d, cfg, rng));
  }
}
BENCHMARK(BM_MiceImpute)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
