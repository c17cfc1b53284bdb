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

#include "pscart/dgp.hpp"

#include <cmath>
#include <stdexcept>

#include "pscart/stats.hpp"

namespace pscart {

ScenarioConfig ScenarioConfig::preset(std::string_view id) {
  ScenarioConfig cfg;
  cfg.id = std::string(id);
  if (id == "1") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mcar;
    cfg.p_w3 = 0.3;
  } else if (id == "2") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mcar;
    cfg.p_w3 = 0.6;
  } else if (id == "3") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mar;
    cfg.p_w3 = 0.0;
    cfg.alpha = {-0.7, 0.0, 0.0, 1.5};
  } else if (id == "4") {
    cfg.gamma = -1.0;
    cfg.mechanism = Mechanism::mar;
    cfg.p_w3 = 0.0;
    cfg.alpha = {-1.0, 0.0, 0.0, 1.5};
  } else if (id == "5") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mar;
    cfg.p_w3 = 0.1;
    cfg.alpha = {-1.6, 0.5, 0.5, 0.5};
  } else if (id == "6") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mar;
    cfg.p_w3 = 0.1;
    cfg.alpha = {-2.1, 0.5, 0.5, 1.5};
  } else if (id == "7") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mar;
    cfg.p_w3 = 0.1;
    cfg.alpha = {-2.3, 0.5, 1.5, 0.5};
  } else if (id == "8") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mar;
    cfg.p_w3 = 0.1;
    cfg.alpha = {-2.2, 1.5, 0.5, 0.5};
  } else if (id == "2L") {
    cfg.gamma = 1.0;
    cfg.mechanism = Mechanism::mcar;
    cfg.p_w3 = 0.6;
    cfg.exposure_model = ExposureModel::linear;
  } else {
    throw std::invalid_argument("unknown scenario id: " + std::string(id));
  }
  return cfg;
}

std::vector<std::string> ScenarioConfig::preset_ids() {
  return {"1", "2", "3", "4", "5", "6", "7", "8", "2L"};
}

std::vector<ColumnMeta> cohort_schema() {
  std::vector<ColumnMeta> schema;
  const bool binary[10] = {true, false, true, false, true, true, false, true, true, false};
  for (int k = 0; k < 10; ++k) {
    schema.push_back({"W" + std::to_string(k + 1),
                      binary[k] ? ColumnKind::binary : ColumnKind::continuous,
                      ColumnRole::covariate});
  }
  schema.push_back({"A", ColumnKind::binary, ColumnRole::exposure});
  schema.push_back({"Y", ColumnKind::binary, ColumnRole::outcome});
  return schema;
}

CovarianceSpec covariate_covariance() {
  CovarianceSpec cov;
  cov.dim = 10;
  cov.off_diagonal = {{0, 4, 0.2}, {1, 5, 0.9}, {2, 7, 0.2}, {3, 8, 0.9}};
  return cov;
}

std::vector<std::vector<double>> generate_covariates(std::size_t n, RngStream& rng) {
  auto cols = sample_mvn(n, covariate_covariance(), rng);
  for (const int k : {0, 2, 4, 5, 7, 8}) {
    for (auto& v : cols[static_cast<std::size_t>(k)]) v = v > 0.0 ? 1.0 : 0.0;
  }
  return cols;
}

double true_propensity(std::span<const double> w, ExposureModel model) {
  double eta = 0.8 * w[0] - 0.25 * w[1] + 0.6 * w[2] - 0.4 * w[3] - 0.8 * w[4] -
               0.5 * w[5] + 0.7 * w[6];
  if (model == ExposureModel::nonlinear) {
    eta += -0.25 * w[1] * w[1] - 0.4 * w[3] * w[3] + 0.7 * w[6] * w[6];
    eta += 0.4 * w[0] * w[2] - 0.175 * w[1] * w[3] + 0.3 * w[2] * w[4] -
           0.28 * w[3] * w[5] - 0.4 * w[4] * w[6] + 0.4 * w[0] * w[5] -
           0.175 * w[1] * w[2] + 0.3 * w[2] * w[3] - 0.2 * w[3] * w[4] -
           0.4 * w[4] * w[5];
  }
  return expit(eta);
}

double outcome_linear_predictor(std::span<const double> w, double a, double gamma) {
  return -1.0 + 0.3 * w[0] - 0.36 * w[1] - 0.73 * w[2] - 0.2 * w[3] + 0.71 * w[7] -
         0.19 * w[8] + 0.26 * w[9] + gamma * a;
}

GeneratedCohort generate_cohort(std::size_t n, double gamma, ExposureModel model,
                                RngStream& rng) {
  if (n == 0) throw std::invalid_argument("generate_cohort: n must be >= 1");
  const auto w_cols = generate_covariates(n, rng);

  GeneratedCohort cohort;
  cohort.data = Dataset(cohort_schema(), n);
  cohort.eps_y.resize(n);
  cohort.true_ps.resize(n);
  cohort.y0.resize(n);
  cohort.y1.resize(n);

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    double w[10];
    for (int k = 0; k < 10; ++k) w[k] = w_cols[static_cast<std::size_t>(k)][i];
    cohort.true_ps[i] = true_propensity(w, model);
    a[i] = rng.uniform01() < cohort.true_ps[i] ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double w[10];
    for (int k = 0; k < 10; ++k) w[k] = w_cols[static_cast<std::size_t>(k)][i];
    const double u = rng.open_uniform01();
    cohort.eps_y[i] = u;
    cohort.y0[i] = u < expit(outcome_linear_predictor(w, 0.0, gamma)) ? 1 : 0;
    cohort.y1[i] = u < expit(outcome_linear_predictor(w, 1.0, gamma)) ? 1 : 0;
  }

  for (std::size_t k = 0; k < 10; ++k) {
    for (std::size_t i = 0; i < n; ++i) cohort.data.set(i, k, w_cols[k][i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    cohort.data.set(i, 10, a[i]);
    cohort.data.set(i, 11, a[i] == 1.0 ? cohort.y1[i] : cohort.y0[i]);
  }
  return cohort;
}

double true_att_log_or(double gamma, ExposureModel model, std::size_t n_oracle,
                       RngStream& rng) {
  if (n_oracle < 1000) {
    throw std::invalid_argument("true_att_log_or: n_oracle too small");
  }
  constexpr std::size_t kChunk = 100000;
  std::size_t done = 0;
  double n_exposed = 0.0;
  double sum_y1 = 0.0;
  double sum_y0 = 0.0;
  while (done < n_oracle) {
    const std::size_t take = std::min(kChunk, n_oracle - done);
    const auto cohort = generate_cohort(take, gamma, model, rng);
    const auto a = cohort.data.column_values(10);
    for (std::size_t i = 0; i < take; ++i) {
      if (a[i] == 1.0) {
        n_exposed += 1.0;
        sum_y1 += cohort.y1[i];
        sum_y0 += cohort.y0[i];
      }
    }
    done += take;
  }
  const double p1 = sum_y1 / n_exposed;
  const double p0 = sum_y0 / n_exposed;
  return std::log(p1 / (1.0 - p1)) - std::log(p0 / (1.0 - p0));
}

Dataset inject_missingness(const GeneratedCohort& cohort, const ScenarioConfig& cfg,
                           RngStream& rng) {
  if (cfg.p_w3 < 0.0 || cfg.p_w3 > 1.0) {
    throw std::invalid_argument("inject_missingness: p outside [0,1]");
  }
  Dataset d = cohort.data;
  const std::size_t n = d.n_rows();
  constexpr std::size_t w1 = 0;
  constexpr std::size_t w3 = 2;
  constexpr std::size_t w4 = 3;
  constexpr std::size_t a_col = 10;
  constexpr std::size_t y_col = 11;

  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.p_w3 > 0.0 && rng.bernoulli(cfg.p_w3)) d.set_missing(i, w3);
    if (cfg.mechanism == Mechanism::mar) {
      const double eta = cfg.alpha[0] + cfg.alpha[1] * d.value(i, w1) +
                         cfg.alpha[2] * d.value(i, a_col) +
                         cfg.alpha[3] * d.value(i, y_col);
      if (rng.bernoulli(expit(eta))) d.set_missing(i, w4);
    }
  }
  return d;
}

}  // namespace pscart
