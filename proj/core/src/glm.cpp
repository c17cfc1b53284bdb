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

#include "pscart/glm.hpp"

#include <cmath>
#include <stdexcept>

#include "pscart/linalg.hpp"
#include "pscart/stats.hpp"

namespace pscart {

namespace {

void check_inputs(const DesignColumns& x, std::span<const double> y,
                  std::span<const double> w) {
  if (x.empty()) throw std::invalid_argument("fit_logistic: empty design");
  const std::size_t n = y.size();
  for (const auto& col : x) {
    if (col.size() != n) {
      throw std::invalid_argument("fit_logistic: design column length mismatch");
    }
  }
  if (!w.empty() && w.size() != n) {
    throw std::invalid_argument("fit_logistic: weight length mismatch");
  }
  for (double yi : y) {
    if (yi != 0.0 && yi != 1.0) {
      throw std::invalid_argument("fit_logistic: outcome must be binary");
    }
  }
}

}  // namespace

std::vector<double> linear_predictor(const DesignColumns& x,
                                     std::span<const double> beta) {
  const std::size_t n = x.front().size();
  const std::size_t p = x.size();
  std::vector<double> eta(n, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const double b = beta[j];
    if (b == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) eta[i] += b * x[j][i];
  }
  return eta;
}

LogisticFit fit_logistic(const DesignColumns& x, std::span<const double> y,
                         std::span<const double> w, const LogisticOptions& opts) {
  check_inputs(x, y, w);
  const std::size_t n = y.size();
  const std::size_t p = x.size();

  LogisticFit fit;
  fit.beta.assign(p, 0.0);
  fit.ridge_used = opts.ridge > 0.0;

  std::vector<double> eta(n, 0.0);
  std::vector<double> prob(n, 0.5);
  std::vector<double> info(p * p, 0.0);
  std::vector<double> score(p, 0.0);

  auto weight_at = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    fit.iterations = it;
    // Score and expected information at the current beta.
    std::fill(score.begin(), score.end(), 0.0);
    std::fill(info.begin(), info.end(), 0.0);
    double max_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weight_at(i);
      if (wi == 0.0) continue;
      const double pi = prob[i];
      const double resid = wi * (y[i] - pi);
      const double curv = wi * pi * (1.0 - pi);
      for (std::size_t j = 0; j < p; ++j) {
        const double xj = x[j][i];
        score[j] += resid * xj;
        for (std::size_t k = 0; k <= j; ++k) {
          info[j * p + k] += curv * xj * x[k][i];
        }
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = j + 1; k < p; ++k) info[j * p + k] = info[k * p + j];
    }
    if (opts.ridge > 0.0) {
      for (std::size_t j = 0; j < p; ++j) {
        info[j * p + j] += opts.ridge;
        score[j] -= opts.ridge * fit.beta[j];
      }
    }
    for (std::size_t j = 0; j < p; ++j) max_score = std::max(max_score, std::abs(score[j]));
    if (max_score < opts.score_tol) {
      fit.status = GlmStatus::ok;
      auto chol = info;
      if (cholesky_in_place(chol, p)) {
        fit.covariance = cholesky_inverse(chol, p);
      } else {
        fit.covariance.assign(p * p, 0.0);
        fit.status = GlmStatus::separation;
      }
      return fit;
    }

    auto chol = info;
    if (!cholesky_in_place(chol, p)) {
      fit.status = GlmStatus::separation;
      fit.covariance.assign(p * p, 0.0);
      return fit;
    }
    const auto step = cholesky_solve(chol, p, score);
    for (std::size_t j = 0; j < p; ++j) fit.beta[j] += step[j];

    eta = linear_predictor(x, fit.beta);
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = std::min(1.0 - 1e-12, std::max(1e-12, expit(eta[i])));
    }
    // Runaway coefficients signal separated data: the likelihood has no
    // interior maximum and the score cannot vanish.
    if (opts.ridge == 0.0) {
      double max_beta = 0.0;
      for (double b : fit.beta) max_beta = std::max(max_beta, std::abs(b));
      if (max_beta > 30.0) {
        fit.status = GlmStatus::separation;
        fit.covariance.assign(p * p, 0.0);
        return fit;
      }
    }
  }
  fit.status = GlmStatus::not_converged;
  fit.covariance.assign(p * p, 0.0);
  return fit;
}

std::vector<double> sandwich_covariance(const DesignColumns& x, std::span<const double> y,
                                        std::span<const double> w,
                                        std::span<const double> beta) {
  check_inputs(x, y, w);
  const std::size_t n = y.size();
  const std::size_t p = x.size();
  const auto eta = linear_predictor(x, beta);

  std::vector<double> bread(p * p, 0.0);  // A = sum w p(1-p) x x'
  std::vector<double> meat(p * p, 0.0);   // M = sum w^2 (y-p)^2 x x'
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (wi == 0.0) continue;
    const double pi = expit(eta[i]);
    const double a = wi * pi * (1.0 - pi);
    const double r = wi * (y[i] - pi);
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k <= j; ++k) {
        bread[j * p + k] += a * x[j][i] * x[k][i];
        meat[j * p + k] += r * r * x[j][i] * x[k][i];
      }
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) {
      bread[j * p + k] = bread[k * p + j];
      meat[j * p + k] = meat[k * p + j];
    }
  }

  auto chol = bread;
  if (!cholesky_in_place(chol, p)) {
    throw std::runtime_error("sandwich_covariance: singular information matrix");
  }
  const auto bread_inv = cholesky_inverse(chol, p);

  // A^-1 M A^-1
  std::vector<double> tmp(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += bread_inv[i * p + k] * meat[k * p + j];
      tmp[i * p + j] = s;
    }
  }
  std::vector<double> out(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += tmp[i * p + k] * bread_inv[k * p + j];
      out[i * p + j] = s;
    }
  }
  return out;
}

}  // namespace pscart
