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

#ifndef PSCART_GLM_HPP
#define PSCART_GLM_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pscart {

/// Design matrix as a list of column vectors, all of equal length.
using DesignColumns = std::vector<std::vector<double>>;

enum class GlmStatus { ok, separation, not_converged };

struct LogisticFit {
  std::vector<double> beta;
  std::vector<double> covariance;  // model-based (X'WX)^-1, row-major
  GlmStatus status = GlmStatus::ok;
  int iterations = 0;
  bool ridge_used = false;
};

struct LogisticOptions {
  int max_iterations = 50;
  double score_tol = 1e-8;  // convergence on max |score|
  double ridge = 0.0;       // L2 penalty on coefficients
};

/// Weighted logistic IRLS of y on the given columns (no implicit intercept;
/// include a ones column if wanted).  Weights empty means unit weights.
LogisticFit fit_logistic(const DesignColumns& x, std::span<const double> y,
                         std::span<const double> w, const LogisticOptions& opts = {});

/// HC0 sandwich covariance A^-1 M A^-1 around the weighted score equations:
/// A = sum w p(1-p) x x', M = sum w^2 (y-p)^2 x x'.
std::vector<double> sandwich_covariance(const DesignColumns& x, std::span<const double> y,
                                        std::span<const double> w,
                                        std::span<const double> beta);

/// Linear predictor x_i' beta for every row.
std::vector<double> linear_predictor(const DesignColumns& x, std::span<const double> beta);

}  // namespace pscart

#endif  // PSCART_GLM_HPP
