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

#ifndef PSCART_DGP_HPP
#define PSCART_DGP_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pscart/dataset.hpp"
#include "pscart/mvn.hpp"
#include "pscart/rng.hpp"

namespace pscart {

enum class Mechanism { mcar, mar };
enum class ExposureModel { nonlinear, linear };

/// One simulation scenario: effect size, missingness mechanism for W3
/// (probability p) and W4 (logistic in W1, A, Y), and the exposure model.
struct ScenarioConfig {
  std::string id;
  double gamma = 1.0;
  Mechanism mechanism = Mechanism::mcar;
  double p_w3 = 0.0;
  std::array<double, 4> alpha{0.0, 0.0, 0.0, 0.0};  // a0 + a1*W1 + a2*A + a3*Y
  ExposureModel exposure_model = ExposureModel::nonlinear;

  static ScenarioConfig preset(std::string_view id);
  static std::vector<std::string> preset_ids();
};

/// Simulated cohort plus the oracle-only latents.  The latents never enter
/// the estimator-facing dataset.
struct GeneratedCohort {
  Dataset data;  // W1..W10, A, Y
  std::vector<double> eps_y;
  std::vector<double> true_ps;
  std::vector<std::uint8_t> y0;
  std::vector<std::uint8_t> y1;
};

std::vector<ColumnMeta> cohort_schema();
CovarianceSpec covariate_covariance();

/// 10 covariate columns: correlated standard normals, with W1, W3, W5, W6,
/// W8, W9 dichotomized at zero.
std::vector<std::vector<double>> generate_covariates(std::size_t n, RngStream& rng);

/// Exposure allocation probability for one covariate row (w[0] = W1, ...);
/// the linear model zeroes every squared and interaction term.
double true_propensity(std::span<const double> w, ExposureModel model);

/// eta(a, w) of the outcome model.
double outcome_linear_predictor(std::span<const double> w, double a, double gamma);

GeneratedCohort generate_cohort(std::size_t n, double gamma, ExposureModel model,
                                RngStream& rng);

/// Marginal ATT log odds ratio by counterfactual simulation (streamed, so
/// n_oracle can be 1e7 without holding the cohort).
double true_att_log_or(double gamma, ExposureModel model, std::size_t n_oracle,
                       RngStream& rng);

/// Masks W3 (and W4 under MAR) per the scenario; never touches other
/// columns, A, Y, or the latents.
Dataset inject_missingness(const GeneratedCohort& cohort, const ScenarioConfig& cfg,
                           RngStream& rng);

}  // namespace pscart

#endif  // PSCART_DGP_HPP
