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

#include "pscart/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pscart/glm.hpp"
#include "pscart/pooling.hpp"
#include "pscart/stats.hpp"

namespace pscart {

namespace {

constexpr double kAttRidge = 1e-8;

void check_binary(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (x != 0.0 && x != 1.0) {
      throw std::invalid_argument(std::string(what) + " must be binary");
    }
  }
}

std::vector<double> column_copy(const Dataset& d, std::size_t j) {
  const auto span = d.column_values(j);
  return {span.begin(), span.end()};
}

}  // namespace

PropensityScores truncate_scores(std::vector<double> raw, PsMethod method,
                                 bool generalised) {
  for (double& s : raw) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("truncate_scores: raw score outside [0,1]");
    }
    s = std::clamp(s, kScoreFloor, kScoreCeiling);
  }
  PropensityScores ps;
  ps.score = std::move(raw);
  ps.method = method;
  ps.generalised = generalised;
  return ps;
}

std::vector<double> att_weights(const PropensityScores& ps,
                                std::span<const double> exposure) {
  if (ps.score.size() != exposure.size()) {
    throw std::invalid_argument("att_weights: score/exposure size mismatch");
  }
  check_binary(exposure, "att_weights: exposure");
  std::vector<double> w(exposure.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = exposure[i] == 1.0 ? 1.0 : ps.score[i] / (1.0 - ps.score[i]);
  }
  return w;
}

MatchedSample greedy_match(const PropensityScores& ps, std::span<const double> exposure,
                           double caliper_mult, RngStream& rng) {
  if (ps.score.size() != exposure.size()) {
    throw std::invalid_argument("greedy_match: score/exposure size mismatch");
  }
  check_binary(exposure, "greedy_match: exposure");
  if (caliper_mult < 0.0) {
    throw std::invalid_argument("greedy_match: caliper_mult must be >= 0");
  }
  const std::size_t n = exposure.size();
  std::vector<double> lg(n);
  for (std::size_t i = 0; i < n; ++i) lg[i] = logit(ps.score[i]);

  std::vector<std::uint32_t> exposed;
  std::vector<std::uint32_t> unexposed;
  for (std::uint32_t i = 0; i < n; ++i) {
    (exposure[i] == 1.0 ? exposed : unexposed).push_back(i);
  }
  if (exposed.empty() || unexposed.empty()) {
    throw std::invalid_argument("greedy_match: an exposure arm is empty");
  }

  MatchedSample out;
  out.caliper = caliper_mult * empirical_sd(lg);

  // Unexposed pool sorted by (logit, row); matched entries are flagged.
  std::sort(unexposed.begin(), unexposed.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (lg[a] != lg[b]) return lg[a] < lg[b];
    return a < b;
  });
  std::vector<double> pool_lg(unexposed.size());
  for (std::size_t k = 0; k < unexposed.size(); ++k) pool_lg[k] = lg[unexposed[k]];
  std::vector<std::uint8_t> taken(unexposed.size(), 0);

  const auto order = rng.permutation(static_cast<std::uint32_t>(exposed.size()));
  for (const auto oi : order) {
    const auto e = exposed[oi];
    const double target = lg[e];
    const auto it = std::lower_bound(pool_lg.begin(), pool_lg.end(), target);
    auto right = static_cast<std::ptrdiff_t>(it - pool_lg.begin());
    auto left = right - 1;
    while (right < static_cast<std::ptrdiff_t>(pool_lg.size()) && taken[right]) ++right;
    while (left >= 0 && taken[left]) --left;

    const double d_right = right < static_cast<std::ptrdiff_t>(pool_lg.size())
                               ? pool_lg[right] - target
                               : std::numeric_limits<double>::infinity();
    const double d_left =
        left >= 0 ? target - pool_lg[left] : std::numeric_limits<double>::infinity();
    const double best = std::min(d_left, d_right);
    if (!(best <= out.caliper)) continue;  // unmatched exposed row

    // Gather every unmatched candidate at the winning distance (whole tied
    // blocks on both sides) and take the lowest row index.
    std::uint32_t chosen = std::numeric_limits<std::uint32_t>::max();
    if (d_left == best) {
      for (auto k = left; k >= 0 && target - pool_lg[k] == best; --k) {
        if (!taken[k]) chosen = std::min(chosen, unexposed[k]);
      }
    }
    if (d_right == best) {
      for (auto k = right;
           k < static_cast<std::ptrdiff_t>(pool_lg.size()) && pool_lg[k] - target == best;
           ++k) {
        if (!taken[k]) chosen = std::min(chosen, unexposed[k]);
      }
    }
    // Flag the chosen row in the pool (sorted by logit then row index).
    const auto pos = std::lower_bound(pool_lg.begin(), pool_lg.end(), lg[chosen]) -
                     pool_lg.begin();
    for (auto k = pos; k < static_cast<std::ptrdiff_t>(unexposed.size()); ++k) {
      if (unexposed[k] == chosen) {
        taken[k] = 1;
        break;
      }
    }
    out.pairs.emplace_back(e, chosen);
  }
  return out;
}

AttLogistic weighted_logistic(std::span<const double> outcome,
                              std::span<const double> exposure,
                              std::span<const double> weights,
                              bool allow_ridge_fallback) {
  check_binary(outcome, "weighted_logistic: outcome");
  check_binary(exposure, "weighted_logistic: exposure");
  DesignColumns x(2);
  x[0].assign(outcome.size(), 1.0);
  x[1].assign(exposure.begin(), exposure.end());

  LogisticFit fit = fit_logistic(x, outcome, weights);
  AttLogistic out;
  if (fit.status != GlmStatus::ok) {
    if (!allow_ridge_fallback) {
      throw std::runtime_error(fit.status == GlmStatus::separation
                                   ? "weighted_logistic: separation"
                                   : "weighted_logistic: IRLS did not converge");
    }
    LogisticOptions opts;
    opts.ridge = kAttRidge;
    fit = fit_logistic(x, outcome, weights, opts);
    out.ridge_used = true;
    if (fit.status != GlmStatus::ok) {
      throw std::runtime_error("weighted_logistic: ridge fallback failed");
    }
  }
  out.intercept = fit.beta[0];
  out.log_or = fit.beta[1];
  const auto cov = sandwich_covariance(x, outcome, weights, fit.beta);
  out.sandwich_se = std::sqrt(std::max(0.0, cov[3]));
  return out;
}

EffectEstimate estimate_att(const Dataset& d, const PropensityScores& ps,
                            EffectMode mode, RngStream& rng, double level) {
  const auto outcome_col = d.outcome_index();
  if (!outcome_col) throw std::invalid_argument("estimate_att: no outcome column");
  if (!d.column_complete(*outcome_col) || !d.column_complete(d.exposure_index())) {
    throw std::invalid_argument("estimate_att: exposure/outcome must be complete");
  }
  const auto y = column_copy(d, *outcome_col);
  const auto a = column_copy(d, d.exposure_index());
  if (ps.score.size() != d.n_rows()) {
    throw std::invalid_argument("estimate_att: scores missing for some rows");
  }

  EffectEstimate out;
  AttLogistic fit;
  if (mode == EffectMode::ipw) {
    const auto w = att_weights(ps, a);
    fit = weighted_logistic(y, a, w, /*allow_ridge_fallback=*/true);
    double sw = 0.0;
    double sw2 = 0.0;
    for (double wi : w) {
      sw += wi;
      sw2 += wi * wi;
    }
    out.effective_sample_size = sw * sw / sw2;
  } else {
    const auto matched = greedy_match(ps, a, 0.2, rng);
    if (matched.pairs.empty()) {
      throw std::runtime_error("estimate_att: no matched pairs within caliper");
    }
    std::vector<double> ym;
    std::vector<double> am;
    ym.reserve(2 * matched.pairs.size());
    am.reserve(2 * matched.pairs.size());
    for (const auto& [e, u] : matched.pairs) {
      ym.push_back(y[e]);
      am.push_back(1.0);
      ym.push_back(y[u]);
      am.push_back(0.0);
    }
    fit = weighted_logistic(ym, am, {}, /*allow_ridge_fallback=*/true);
    out.matched_pairs = static_cast<int>(matched.pairs.size());
    out.effective_sample_size = static_cast<double>(2 * matched.pairs.size());
  }
  out.point = fit.log_or;
  out.se = fit.sandwich_se;
  out.df = std::numeric_limits<double>::infinity();
  out.ridge_fallbacks = fit.ridge_used ? 1 : 0;
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - level));
  out.ci_low = out.point - z * out.se;
  out.ci_high = out.point + z * out.se;
  return out;
}

PropensityScores logistic_ps(const Dataset& d, PsModelForm form) {
  const auto covars = d.covariate_indices();
  for (auto j : covars) {
    if (!d.column_complete(j)) {
      throw std::invalid_argument("logistic_ps: covariates must be complete");
    }
  }
  const std::size_t n = d.n_rows();
  DesignColumns x;
  x.emplace_back(n, 1.0);
  if (form == PsModelForm::main_effects) {
    for (auto j : covars) x.push_back(column_copy(d, j));
  } else {
    if (covars.size() < 7) {
      throw std::invalid_argument("logistic_ps: full design needs >= 7 covariates");
    }
    std::vector<std::vector<double>> w;
    for (auto j : covars) w.push_back(column_copy(d, j));
    for (std::size_t k = 0; k < 7; ++k) x.push_back(w[k]);
    for (std::size_t k : {1, 3, 6}) {
      std::vector<double> sq(n);
      for (std::size_t i = 0; i < n; ++i) sq[i] = w[k][i] * w[k][i];
      x.push_back(std::move(sq));
    }
    constexpr std::pair<int, int> prods[] = {{0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6},
                                             {0, 5}, {1, 2}, {2, 3}, {3, 4}, {4, 5}};
    for (const auto& [p, q] : prods) {
      std::vector<double> pr(n);
      for (std::size_t i = 0; i < n; ++i) pr[i] = w[p][i] * w[q][i];
      x.push_back(std::move(pr));
    }
  }

  const auto a = column_copy(d, d.exposure_index());
  LogisticFit fit = fit_logistic(x, a, {});
  if (fit.status != GlmStatus::ok) {
    LogisticOptions opts;
    opts.ridge = kAttRidge;
    fit = fit_logistic(x, a, {}, opts);
    if (fit.status != GlmStatus::ok) {
      throw std::runtime_error("logistic_ps: separation (ridge fallback failed)");
    }
  }
  auto eta = linear_predictor(x, fit.beta);
  for (double& e : eta) e = expit(e);
  return truncate_scores(std::move(eta),
                         form == PsModelForm::main_effects ? PsMethod::lrm : PsMethod::lrc,
                         /*generalised=*/false);
}

PropensityScores fit_propensity(const Dataset& d, PsMethod method,
                                const PsFitConfig& cfg, RngStream& rng) {
  bool any_missing_covariate = false;
  for (auto j : d.covariate_indices()) {
    if (!d.column_complete(j)) {
      any_missing_covariate = true;
      break;
    }
  }
  switch (method) {
    case PsMethod::bacart: {
      // Surrogate routing replaces missing values rather than conditioning
      // on the missingness pattern, so these scores are never generalized.
      auto bag_rng = rng.substream(purpose::bootstrap);
      const auto model =
          fit_bagged(d, d.exposure_index(), cfg.bagged_trees, cfg.bag_controls, bag_rng);
      return truncate_scores(predict_ps_bagged(model, d), method,
                             /*generalised=*/false);
    }
    case PsMethod::bcart: {
      // Missing-branch trees split on missingness itself: with incomplete
      // covariates the fitted score conditions on the pattern.
      auto boost_rng = rng.substream(purpose::boost_subsample);
      const auto model = fit_boosted(d, d.exposure_index(), cfg.boost, boost_rng);
      return truncate_scores(model.training_scores, method, any_missing_covariate);
    }
    case PsMethod::lrc:
      return logistic_ps(d, PsModelForm::full_nonlinear);
    case PsMethod::lrm:
      return logistic_ps(d, PsModelForm::main_effects);
  }
  throw std::logic_error("fit_propensity: unknown method");
}

EffectEstimate estimate_att_mi(const ImputedSet& imputed, PsMethod method,
                               EffectMode mode, const PsFitConfig& cfg, RngStream& rng,
                               double level) {
  if (imputed.completed.size() < 2) {
    throw std::invalid_argument("estimate_att_mi: need >= 2 completed datasets");
  }
  std::vector<std::pair<double, double>> per_imputation;
  EffectEstimate out;
  for (std::size_t k = 0; k < imputed.completed.size(); ++k) {
    auto imp_rng = rng.substream(2000 + k);
    const auto& dk = imputed.completed[k];
    const auto ps = fit_propensity(dk, method, cfg, imp_rng);
    auto est_rng = imp_rng.substream(purpose::match_order);
    const auto est = estimate_att(dk, ps, mode, est_rng, level);
    per_imputation.emplace_back(est.point, est.se * est.se);
    out.ridge_fallbacks += est.ridge_fallbacks;
    if (mode == EffectMode::match) {
      out.matched_pairs = std::max(out.matched_pairs, 0) + est.matched_pairs;
    }
    out.effective_sample_size += est.effective_sample_size;
  }
  const auto pooled = rubin_pool(per_imputation, level);
  out.point = pooled.point;
  out.se = std::sqrt(pooled.total);
  out.df = pooled.df;
  out.ci_low = pooled.ci_low;
  out.ci_high = pooled.ci_high;
  out.effective_sample_size /= static_cast<double>(imputed.completed.size());
  return out;
}

}  // namespace pscart
