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

#ifndef PSCART_POOLING_HPP
#define PSCART_POOLING_HPP

#include <span>
#include <utility>

namespace pscart {

/// Combined estimate over m imputations: T = W + (1 + 1/m) B with the
/// Barnard-Rubin-free classic df (m-1)(1 + W/((1+1/m)B))^2; B = 0 collapses
/// to the normal quantile.
struct PooledEstimate {
  double point = 0.0;
  double within = 0.0;   // mean of the per-imputation variances
  double between = 0.0;  // sample variance of the points
  double total = 0.0;
  double df = 0.0;  // +inf when between-variance is zero
  double ci_low = 0.0;
  double ci_high = 0.0;
  int m = 0;
};

/// estimates = (point, variance) per imputation; m >= 2 required.
PooledEstimate rubin_pool(std::span<const std::pair<double, double>> estimates,
                          double level = 0.90);

}  // namespace pscart

#endif  // PSCART_POOLING_HPP
