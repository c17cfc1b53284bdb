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

#include "pscart/mvn.hpp"

#include <stdexcept>

#include "pscart/linalg.hpp"

namespace pscart {

std::vector<double> cholesky_factor(const CovarianceSpec& cov) {
  const std::size_t p = cov.dim;
  std::vector<double> a(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) a[i * p + i] = 1.0;
  for (const auto& [i, j, v] : cov.off_diagonal) {
    if (i >= p || j >= p || i == j) {
      throw std::invalid_argument("CovarianceSpec: bad off-diagonal entry");
    }
    a[i * p + j] = v;
    a[j * p + i] = v;
  }
  if (!cholesky_in_place(a, p)) {
    throw std::runtime_error("sample_mvn: covariance is not positive definite");
  }
  return a;
}

std::vector<std::vector<double>> sample_mvn(std::size_t n, const CovarianceSpec& cov,
                                            RngStream& rng) {
  const std::size_t p = cov.dim;
  const auto chol = cholesky_factor(cov);
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  std::vector<double> z(p);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
    for (std::size_t i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += chol[i * p + k] * z[k];
      cols[i][row] = s;
    }
  }
  return cols;
}

}  // namespace pscart
