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

#include "pscart/pooling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pscart/stats.hpp"

namespace pscart {

PooledEstimate rubin_pool(std::span<const std::pair<double, double>> estimates,
                          double level) {
  const int m = static_cast<int>(estimates.size());
  if (m < 2) throw std::invalid_argument("rubin_pool: need m >= 2 estimates");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("rubin_pool: level must be in (0,1)");
  }
  for (const auto& [q, v] : estimates) {
    if (!std::isfinite(q) || !std::isfinite(v)) {
      throw std::invalid_argument("rubin_pool: non-finite estimate");
    }
  }

  PooledEstimate out;
  out.m = m;
  double sum_q = 0.0;
  double sum_v = 0.0;
  for (const auto& [q, v] : estimates) {
    sum_q += q;
    sum_v += v;
  }
  out.point = sum_q / m;
  out.within = sum_v / m;
  double ssb = 0.0;
  for (const auto& [q, v] : estimates) ssb += (q - out.point) * (q - out.point);
  out.between = ssb / (m - 1);
  const double infl = 1.0 + 1.0 / m;
  out.total = out.within + infl * out.between;

  const double alpha = 1.0 - level;
  double quantile;
  if (out.between == 0.0) {
    out.df = std::numeric_limits<double>::infinity();
    quantile = normal_quantile(1.0 - 0.5 * alpha);
  } else {
    const double r = out.within / (infl * out.between);
    out.df = (m - 1) * (1.0 + r) * (1.0 + r);
    quantile = student_t_quantile(1.0 - 0.5 * alpha, out.df);
  }
  const double half = quantile * std::sqrt(out.total);
  out.ci_low = out.point - half;
  out.ci_high = out.point + half;
  return out;
}

}  // namespace pscart
