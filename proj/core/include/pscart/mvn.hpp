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

#ifndef PSCART_MVN_HPP
#define PSCART_MVN_HPP

#include <cstddef>
#include <tuple>
#include <vector>

#include "pscart/rng.hpp"

namespace pscart {

/// Correlation structure with unit diagonal and a sparse list of
/// off-diagonal entries; must be symmetric positive definite.
struct CovarianceSpec {
  std::size_t dim = 0;
  // (i, j, value) with i != j; symmetry is implied.
  std::vector<std::tuple<std::size_t, std::size_t, double>> off_diagonal;
};

/// Lower Cholesky factor of the requested matrix; throws on non-PD input.
std::vector<double> cholesky_factor(const CovarianceSpec& cov);

/// n i.i.d. zero-mean draws with the given covariance, returned as
/// column-major columns[j][row].  Implemented as L * standard normals.
std::vector<std::vector<double>> sample_mvn(std::size_t n, const CovarianceSpec& cov,
                                            RngStream& rng);

}  // namespace pscart

#endif  // PSCART_MVN_HPP
