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

#ifndef PSCART_STATS_HPP
#define PSCART_STATS_HPP

#include <cmath>
#include <span>
#include <vector>

namespace pscart {

/// Inverse logit 1/(1+exp(-x)), evaluated stably for large |x|.
inline double expit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

double mean(std::span<const double> x);

/// Sample standard deviation with divisor (n-1); throws for n < 2.
double empirical_sd(std::span<const double> x);

double weighted_mean(std::span<const double> x, std::span<const double> w);

/// Weighted standard deviation with the reliability-weight correction
/// sum(w) - sum(w^2)/sum(w) in the divisor; reduces to empirical_sd for
/// equal weights.
double weighted_sd(std::span<const double> x, std::span<const double> w);

/// Sup distance between the weighted empirical CDFs of two samples.
/// Weights must be nonnegative with positive sum; result lies in [0, 1].
double ks_statistic(std::span<const double> x, std::span<const double> xw,
                    std::span<const double> y, std::span<const double> yw);

/// Standard normal quantile; Newton iteration on erfc, accurate to ~1e-14.
double normal_quantile(double p);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Student-t CDF and quantile for arbitrary (possibly fractional) df > 0.
double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);

}  // namespace pscart

#endif  // PSCART_STATS_HPP
