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

#ifndef PSCART_CAUSAL_HPP
#define PSCART_CAUSAL_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pscart/bagging.hpp"
#include "pscart/boosting.hpp"
#include "pscart/dataset.hpp"
#include "pscart/mice.hpp"
#include "pscart/rng.hpp"

namespace pscart {

enum class PsMethod { bacart, bcart, lrc, lrm };
enum class EffectMode { ipw, match };
enum class PsModelForm { main_effects, full_nonlinear };

inline constexpr double kScoreFloor = 0.001;
inline constexpr double kScoreCeiling = 0.999;

struct PropensityScores {
  std::vector<double> score;  // truncated into [0.001, 0.999]
  PsMethod method = PsMethod::bacart;
  // True when the scores condition on the missingness pattern (tree methods
  // applied directly to incomplete covariates).
  bool generalised = false;
};

/// Clamp raw probabilities into [0.001, 0.999].
PropensityScores truncate_scores(std::vector<double> raw, PsMethod method,
                                 bool generalised = false);

/// 1 for exposed rows, score/(1-score) for unexposed rows.
std::vector<double> att_weights(const PropensityScores& ps,
                                std::span<const double> exposure);

struct MatchedSample {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (exposed, unexposed)
  double caliper = 0.0;
};

/// Greedy 1:1 nearest-neighbour matching without replacement on the logit
/// score, caliper = caliper_mult * SD(logit scores); exposed rows are
/// visited in a random order drawn from rng, distance ties broken by lower
/// row index.
MatchedSample greedy_match(const PropensityScores& ps, std::span<const double> exposure,
                           double caliper_mult, RngStream& rng);

struct AttLogistic {
  double intercept = 0.0;
  double log_or = 0.0;
  double sandwich_se = 0.0;
  bool ridge_used = false;
};

/// Weighted logistic fit of outcome on {1, exposure} with the HC0 sandwich
/// standard error for the exposure coefficient.  Throws on separation /
/// non-convergence unless allow_ridge_fallback retries with a tiny penalty.
AttLogistic weighted_logistic(std::span<const double> outcome,
                              std::span<const double> exposure,
                              std::span<const double> weights,
                              bool allow_ridge_fallback = false);

struct EffectEstimate {
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double df = 0.0;        // +inf for single-dataset normal intervals
  int matched_pairs = -1;  // match mode only
  double effective_sample_size = 0.0;
  int ridge_fallbacks = 0;
};

/// ATT log odds ratio by IPW or matching, 90% CI.
EffectEstimate estimate_att(const Dataset& d, const PropensityScores& ps,
                            EffectMode mode, RngStream& rng, double level = 0.90);

/// MLE logistic propensity scores on complete covariate data: main effects,
/// or the full quadratic/interaction design of the simulated exposure model.
PropensityScores logistic_ps(const Dataset& d, PsModelForm form);

/// Everything needed to fit a propensity model of any supported method.
struct PsFitConfig {
  int bagged_trees = 100;
  TreeControls bag_controls;  // surrogate-mode rpart-style defaults
  BoostConfig boost = BoostConfig::full();
};

PropensityScores fit_propensity(const Dataset& d, PsMethod method,
                                const PsFitConfig& cfg, RngStream& rng);

/// Fit + estimate within each completed dataset, pooled by Rubin's rules.
EffectEstimate estimate_att_mi(const ImputedSet& imputed, PsMethod method,
                               EffectMode mode, const PsFitConfig& cfg, RngStream& rng,
                               double level = 0.90);

}  // namespace pscart

#endif  // PSCART_CAUSAL_HPP
