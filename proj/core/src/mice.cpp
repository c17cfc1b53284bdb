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

#include "pscart/mice.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "pscart/csv.hpp"
#include "pscart/glm.hpp"
#include "pscart/linalg.hpp"
#include "pscart/stats.hpp"
#include "pscart/tree.hpp"

namespace pscart {

namespace {

constexpr double kLogisticFallbackRidge = 0.1;
constexpr double kGaussianRidge = 1e-5;

std::vector<std::size_t> incomplete_columns(const Dataset& d) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (!d.column_complete(j)) out.push_back(j);
  }
  return out;
}

void validate_config(const Dataset& d, const MiceConfig& cfg) {
  if (cfg.m < 2) throw std::invalid_argument("mice_impute: m must be >= 2");
  if (cfg.cycles < 1) throw std::invalid_argument("mice_impute: cycles must be >= 1");
  if (cfg.method.size() != d.n_cols() || cfg.predictors.size() != d.n_cols()) {
    throw std::invalid_argument("mice_impute: config width does not match dataset");
  }
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (!d.column_complete(j)) {
      if (!cfg.method[j]) {
        throw std::invalid_argument("mice_impute: incomplete column '" +
                                    d.column(j).name + "' has no method");
      }
      for (auto p : cfg.predictors[j]) {
        if (p == j) {
          throw std::invalid_argument("mice_impute: column '" + d.column(j).name +
                                      "' lists itself as predictor");
        }
      }
    }
    const auto role = d.column(j).role;
    if ((role == ColumnRole::exposure || role == ColumnRole::outcome) &&
        !d.column_complete(j)) {
      throw std::invalid_argument("mice_impute: exposure/outcome must be complete");
    }
  }
}

MiceConfig base_config(const Dataset& d) {
  MiceConfig cfg;
  cfg.method.resize(d.n_cols());
  cfg.predictors.resize(d.n_cols());
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (d.column_complete(j)) continue;
    for (std::size_t k = 0; k < d.n_cols(); ++k) {
      if (k != j) cfg.predictors[j].push_back(k);
    }
  }
  return cfg;
}

struct ColumnTask {
  std::size_t col;
  ImputeMethod method;
  std::vector<std::uint32_t> obs_rows;  // per the original mask
  std::vector<std::uint32_t> mis_rows;
};

// Design columns: intercept plus the predictors' current working values.
DesignColumns build_design(const Dataset& working, const std::vector<std::size_t>& preds,
                           std::span<const std::uint32_t> rows) {
  DesignColumns x;
  x.emplace_back(rows.size(), 1.0);
  for (auto p : preds) {
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = working.value(rows[i], p);
    x.push_back(std::move(col));
  }
  return x;
}

std::vector<double> row_design(const Dataset& working, const std::vector<std::size_t>& preds,
                               std::uint32_t row) {
  std::vector<double> x(preds.size() + 1);
  x[0] = 1.0;
  for (std::size_t k = 0; k < preds.size(); ++k) x[k + 1] = working.value(row, preds[k]);
  return x;
}

// Posterior-draw logistic imputation: beta* ~ N(beta_hat, (X'WX)^-1), then
// Bernoulli draws at expit(x beta*).
void impute_logistic(Dataset& working, const ColumnTask& task,
                     const std::vector<std::size_t>& preds, RngStream& rng,
                     int& ridge_fallbacks) {
  const auto x_obs = build_design(working, preds, task.obs_rows);
  std::vector<double> y_obs(task.obs_rows.size());
  for (std::size_t i = 0; i < task.obs_rows.size(); ++i) {
    y_obs[i] = working.value(task.obs_rows[i], task.col);
  }
  LogisticFit fit = fit_logistic(x_obs, y_obs, {});
  if (fit.status != GlmStatus::ok) {
    LogisticOptions opts;
    opts.ridge = kLogisticFallbackRidge;
    fit = fit_logistic(x_obs, y_obs, {}, opts);
    ++ridge_fallbacks;
    if (fit.status != GlmStatus::ok) {
      throw std::runtime_error("mice_impute: logistic sub-fit failed for column '" +
                               working.column(task.col).name + "'");
    }
  }
  const std::size_t p = fit.beta.size();
  auto chol = fit.covariance;
  std::vector<double> beta_star = fit.beta;
  if (cholesky_in_place(chol, p)) {
    std::vector<double> z(p);
    for (auto& v : z) v = rng.normal();
    const auto delta = lower_times(chol, p, z);
    for (std::size_t k = 0; k < p; ++k) beta_star[k] += delta[k];
  }
  for (const auto row : task.mis_rows) {
    const auto x = row_design(working, preds, row);
    double eta = 0.0;
    for (std::size_t k = 0; k < p; ++k) eta += beta_star[k] * x[k];
    working.set(row, task.col, rng.bernoulli(expit(eta)) ? 1.0 : 0.0);
  }
}

// Bayesian linear regression draws of (beta, sigma^2), then predictive
// normal draws for the missing entries; small ridge on the cross-products.
void impute_gaussian(Dataset& working, const ColumnTask& task,
                     const std::vector<std::size_t>& preds, RngStream& rng) {
  const auto x_obs = build_design(working, preds, task.obs_rows);
  const std::size_t n_obs = task.obs_rows.size();
  const std::size_t p = x_obs.size();
  std::vector<double> y_obs(n_obs);
  for (std::size_t i = 0; i < n_obs; ++i) {
    y_obs[i] = working.value(task.obs_rows[i], task.col);
  }

  std::vector<double> xtx(p * p, 0.0);
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n_obs; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      xty[j] += x_obs[j][i] * y_obs[i];
      for (std::size_t k = 0; k <= j; ++k) xtx[j * p + k] += x_obs[j][i] * x_obs[k][i];
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) xtx[j * p + k] = xtx[k * p + j];
  }
  for (std::size_t j = 0; j < p; ++j) xtx[j * p + j] *= 1.0 + kGaussianRidge;

  auto chol = xtx;
  if (!cholesky_in_place(chol, p)) {
    throw std::runtime_error("mice_impute: singular gaussian sub-fit for column '" +
                             working.column(task.col).name + "'");
  }
  const auto beta_hat = cholesky_solve(chol, p, xty);

  double rss = 0.0;
  for (std::size_t i = 0; i < n_obs; ++i) {
    double fitted = 0.0;
    for (std::size_t j = 0; j < p; ++j) fitted += beta_hat[j] * x_obs[j][i];
    rss += (y_obs[i] - fitted) * (y_obs[i] - fitted);
  }
  const double df = std::max<double>(1.0, static_cast<double>(n_obs) - p);
  const double sigma_star = std::sqrt(rss / rng.chisq(df));

  // beta* = beta_hat + sigma* L^-T z with (X'X) = L L^T.
  const auto cov = cholesky_inverse(chol, p);
  auto cov_chol = cov;
  std::vector<double> beta_star = beta_hat;
  if (cholesky_in_place(cov_chol, p)) {
    std::vector<double> z(p);
    for (auto& v : z) v = rng.normal();
    const auto delta = lower_times(cov_chol, p, z);
    for (std::size_t k = 0; k < p; ++k) beta_star[k] += sigma_star * delta[k];
  }
  for (const auto row : task.mis_rows) {
    const auto x = row_design(working, preds, row);
    double mu = 0.0;
    for (std::size_t k = 0; k < p; ++k) mu += beta_star[k] * x[k];
    working.set(row, task.col, mu + sigma_star * rng.normal());
  }
}

// Tree-donor imputation: fit on the observed rows (predictors are complete
// inside the chained sweep) and draw uniformly from the landing leaf's
// observed target values.
void impute_cart(Dataset& working, const ColumnTask& task,
                 const std::vector<std::size_t>& preds, RngStream& rng) {
  TreeControls controls;
  controls.min_bucket = 5;
  controls.min_split = 10;
  controls.cp = 1e-4;

  // Fit on the originally observed rows only.
  const bool binary = working.column(task.col).kind == ColumnKind::binary;
  const std::vector<std::size_t> features(preds.begin(), preds.end());
  const Tree tree =
      binary ? fit_tree_resampled(working, task.col, task.obs_rows, controls, features)
             : fit_regression_tree_resampled(working, task.col, task.obs_rows, controls,
                                             features);

  // Leaf membership of the observed rows.
  std::vector<std::vector<double>> leaf_values(tree.nodes.size());
  std::vector<double> x(working.n_cols());
  std::vector<std::uint8_t> obs(working.n_cols());
  auto fill_row = [&](std::uint32_t row) {
    for (std::size_t j = 0; j < working.n_cols(); ++j) {
      obs[j] = working.observed(row, j) ? 1 : 0;
      x[j] = obs[j] ? working.value(row, j) : 0.0;
    }
  };
  for (const auto row : task.obs_rows) {
    fill_row(row);
    leaf_values[static_cast<std::size_t>(tree.leaf_for_row(x, obs))].push_back(
        working.value(row, task.col));
  }
  for (const auto row : task.mis_rows) {
    fill_row(row);
    const auto leaf = static_cast<std::size_t>(tree.leaf_for_row(x, obs));
    const auto& donors = leaf_values[leaf];
    if (donors.empty()) {
      throw std::runtime_error("mice_impute: empty donor leaf for column '" +
                               working.column(task.col).name + "'");
    }
    working.set(row, task.col, donors[rng.index_below(donors.size())]);
  }
}

}  // namespace

MiceConfig default_mice_config(const Dataset& d) {
  MiceConfig cfg = base_config(d);
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (d.column_complete(j)) continue;
    cfg.method[j] = d.column(j).kind == ColumnKind::binary ? ImputeMethod::logistic
                                                           : ImputeMethod::gaussian;
  }
  return cfg;
}

MiceConfig cart_mice_config(const Dataset& d) {
  MiceConfig cfg = base_config(d);
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (!d.column_complete(j)) cfg.method[j] = ImputeMethod::cart;
  }
  return cfg;
}

ImputedSet mice_impute(const Dataset& d, const MiceConfig& cfg, RngStream& rng) {
  validate_config(d, cfg);

  ImputedSet out;
  out.config = cfg;
  out.provenance_seed = rng.seed();
  out.completed.reserve(static_cast<std::size_t>(cfg.m));

  std::vector<ColumnTask> tasks;
  for (const auto j : incomplete_columns(d)) {
    ColumnTask task;
    task.col = j;
    task.method = *cfg.method[j];
    const auto obs = d.column_observed(j);
    for (std::uint32_t i = 0; i < d.n_rows(); ++i) {
      (obs[i] ? task.obs_rows : task.mis_rows).push_back(i);
    }
    if (task.obs_rows.empty()) {
      throw std::runtime_error("mice_impute: column '" + d.column(j).name +
                               "' has no observed values");
    }
    tasks.push_back(std::move(task));
  }

  for (int k = 0; k < cfg.m; ++k) {
    auto imp_rng = rng.substream(1000 + static_cast<std::uint64_t>(k));
    Dataset working = d;

    // Initialize the chain from the observed marginals.
    for (const auto& task : tasks) {
      for (const auto row : task.mis_rows) {
        const auto donor = task.obs_rows[imp_rng.index_below(task.obs_rows.size())];
        working.set(row, task.col, d.value(donor, task.col));
      }
    }

    for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
      for (const auto& task : tasks) {
        const auto& preds = cfg.predictors[task.col];
        switch (task.method) {
          case ImputeMethod::logistic:
            impute_logistic(working, task, preds, imp_rng, out.ridge_fallbacks);
            break;
          case ImputeMethod::gaussian:
            impute_gaussian(working, task, preds, imp_rng);
            break;
          case ImputeMethod::cart:
            impute_cart(working, task, preds, imp_rng);
            break;
        }
      }
    }
    out.completed.push_back(std::move(working));
  }
  return out;
}

void write_imputed_set(const ImputedSet& imputed, const std::string& dir,
                       const std::string& basename) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t k = 0; k < imputed.completed.size(); ++k) {
    const std::string name = basename + "_" + std::to_string(k + 1) + ".csv";
    write_csv_file(imputed.completed[k], dir + "/" + name);
    files.push_back(name);
  }
  const char* method_names[] = {"logistic", "gaussian", "cart"};
  nlohmann::json methods = nlohmann::json::object();
  for (std::size_t j = 0; j < imputed.config.method.size(); ++j) {
    if (imputed.config.method[j]) {
      methods[imputed.completed.front().column(j).name] =
          method_names[static_cast<int>(*imputed.config.method[j])];
    }
  }
  const nlohmann::json manifest{{"files", files},
                                {"m", imputed.config.m},
                                {"cycles", imputed.config.cycles},
                                {"methods", methods},
                                {"seed", imputed.provenance_seed},
                                {"ridge_fallbacks", imputed.ridge_fallbacks}};
  std::ofstream out(dir + "/" + basename + "_manifest.json");
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + dir + "/" + basename +
                             "_manifest.json");
  }
  out << manifest.dump(2) << "\n";
}

}  // namespace pscart
