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

// Standalone property suite: the model-level invariants that hold by
// construction of the generator and the estimators, runnable on their own.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "pscart/causal.hpp"
#include "pscart/dgp.hpp"
#include "pscart/harness.hpp"
#include "pscart/mice.hpp"
#include "pscart/stats.hpp"

using namespace pscart;

TEST_CASE("property: consistency Y = Y_A on every generated row") {
  for (double gamma : {1.0, -1.0, 0.0}) {
    RngStream rng(7001, 0, purpose::covariates);
    const auto cohort = generate_cohort(20000, gamma, ExposureModel::nonlinear, rng);
    const auto a = cohort.data.column_values(10);
    const auto y = cohort.data.column_values(11);
    for (std::size_t i = 0; i < cohort.data.n_rows(); ++i) {
      REQUIRE(y[i] == (a[i] == 1.0 ? cohort.y1[i] : cohort.y0[i]));
    }
  }
}

TEST_CASE("property: binned exchangeability of Y0 across arms given the true score") {
  RngStream rng(7002, 0, purpose::covariates);
  const std::size_t n = 100000;
  const auto cohort = generate_cohort(n, 1.0, ExposureModel::nonlinear, rng);
  const auto a = cohort.data.column_values(10);

  // 20 equal-count bins by true score (ties split deterministically).
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (cohort.true_ps[x] != cohort.true_ps[y]) {
      return cohort.true_ps[x] < cohort.true_ps[y];
    }
    return x < y;
  });
  const int bins = 20;
  for (int b = 0; b < bins; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) / bins;
    const std::size_t hi = n * static_cast<std::size_t>(b + 1) / bins;
    double y0_sum[2] = {0, 0};
    double count[2] = {0, 0};
    for (std::size_t k = lo; k < hi; ++k) {
      const auto i = order[k];
      const int arm = a[i] == 1.0 ? 1 : 0;
      y0_sum[arm] += cohort.y0[i];
      count[arm] += 1.0;
    }
    REQUIRE(count[0] > 0);
    REQUIRE(count[1] > 0);
    const double p0 = y0_sum[0] / count[0];
    const double p1 = y0_sum[1] / count[1];
    const double pooled = (y0_sum[0] + y0_sum[1]) / (count[0] + count[1]);
    const double se =
        std::sqrt(pooled * (1.0 - pooled) * (1.0 / count[0] + 1.0 / count[1]));
    CHECK(std::abs(p1 - p0) < 4.0 * se);
  }
}

TEST_CASE("property: IPW with the true scores balances covariate means") {
  // The odds weights are heavy-tailed (a handful of rows carry weights in
  // the tens), so the weighted mean's sampling scale is set by the weights'
  // effective sample size, not by n.  Deviations are asserted in units of
  // that standard error; a systematically wrong weighting lands at z in the
  // tens, genuine balance stays in single digits.
  for (std::uint64_t seed : {7003ULL, 7013ULL}) {
    RngStream rng(seed, 0, purpose::covariates);
    const std::size_t n = 100000;
    const auto cohort = generate_cohort(n, 1.0, ExposureModel::nonlinear, rng);
    const auto a = cohort.data.column_values(10);

    std::vector<double> raw(cohort.true_ps);
    const auto ps = truncate_scores(std::move(raw), PsMethod::lrc);
    const auto w = att_weights(ps, a);

    for (std::size_t j = 0; j < 10; ++j) {
      const auto col = cohort.data.column_values(j);
      double es = 0.0, en = 0.0, us = 0.0, uw = 0.0, uw2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 1.0) {
          es += col[i];
          en += 1.0;
        } else {
          us += w[i] * col[i];
          uw += w[i];
          uw2 += w[i] * w[i];
        }
      }
      const double exposed_mean = es / en;
      const double weighted_mean = us / uw;
      double ve = 0.0, vu = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 1.0) {
          ve += (col[i] - exposed_mean) * (col[i] - exposed_mean);
        } else {
          vu += w[i] * (col[i] - weighted_mean) * (col[i] - weighted_mean);
        }
      }
      const double ess_unexposed = uw * uw / uw2;
      const double se = std::sqrt(vu / uw / ess_unexposed + ve / en / en);
      const double diff = std::abs(exposed_mean - weighted_mean);
      CHECK(diff < 6.0 * se);
      CHECK(diff < 0.1);
    }
  }
}

TEST_CASE("property: metrics identity MSE = bias^2 + (R-1)/R * empSE^2") {
  auto opt = HarnessOptions::desk();
  opt.n = 300;
  opt.truth_draws = 50000;
  opt.ps.bagged_trees = 10;
  opt.ps.boost.iterations = 40;
  opt.ps.boost.eval_stride = 20;
  opt.mice_m = 2;
  opt.mice_cycles = 2;
  opt.threads = 2;
  const std::vector<EstimatorSpec> specs = {
      {PsMethod::bacart, MissingHandling::direct, EffectMode::ipw},
      {PsMethod::bcart, MissingHandling::direct, EffectMode::ipw},
      {PsMethod::bacart, MissingHandling::mi, EffectMode::match},
  };
  const auto report =
      run_scenario(ScenarioConfig::preset("1"), specs, 6, 7004, opt);
  for (const auto& row : report.rows) {
    REQUIRE(row.reps_used == 6);
    const double r = row.reps_used;
    CHECK(row.mse == doctest::Approx(row.bias * row.bias +
                                     (r - 1.0) / r * row.empirical_se * row.empirical_se)
                         .epsilon(1e-10));
  }
}

TEST_CASE("property: observed cells are immutable under imputation") {
  const auto scenario = ScenarioConfig::preset("5");
  RngStream rng(7005, 0, purpose::covariates);
  const auto cohort = generate_cohort(1500, scenario.gamma, scenario.exposure_model, rng);
  RngStream miss_rng(7005, 0, purpose::missingness);
  const auto d = inject_missingness(cohort, scenario, miss_rng);
  RngStream mice_rng(7005, 0, purpose::mice);
  const auto imputed = mice_impute(d, default_mice_config(d), mice_rng);
  for (const auto& copy : imputed.completed) {
    REQUIRE(copy.missing_count() == 0);
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
      for (std::size_t j = 0; j < d.n_cols(); ++j) {
        if (d.observed(i, j)) REQUIRE(copy.value(i, j) == d.value(i, j));
      }
    }
  }
}

TEST_CASE("property: identical seeds give byte-identical reports") {
  auto opt = HarnessOptions::desk();
  opt.n = 300;
  opt.truth_draws = 50000;
  opt.ps.bagged_trees = 10;
  opt.ps.boost.iterations = 40;
  opt.ps.boost.eval_stride = 20;
  opt.mice_m = 2;
  opt.mice_cycles = 2;
  const std::vector<EstimatorSpec> specs = {
      {PsMethod::bacart, MissingHandling::none, EffectMode::ipw},
      {PsMethod::bcart, MissingHandling::direct, EffectMode::ipw},
      {PsMethod::bacart, MissingHandling::mi, EffectMode::ipw},
  };
  std::ostringstream first;
  std::ostringstream second;
  {
    auto threaded = opt;
    threaded.threads = 2;
    emit_report_csv(run_scenario(ScenarioConfig::preset("3"), specs, 4, 911, threaded),
                    first);
  }
  {
    auto serial = opt;
    serial.threads = 1;
    emit_report_csv(run_scenario(ScenarioConfig::preset("3"), specs, 4, 911, serial),
                    second);
  }
  CHECK(first.str() == second.str());
  CHECK(first.str().find("scenario=3") != std::string::npos);
}
