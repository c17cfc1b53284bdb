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

#ifndef PSCART_LINALG_HPP
#define PSCART_LINALG_HPP

#include <cstddef>
#include <vector>

namespace pscart {

/// Dense symmetric matrix helpers for the small systems that appear in the
/// logistic fits and posterior draws (dimension <= ~25).  Row-major storage.

/// In-place lower Cholesky factor of a symmetric positive definite matrix.
/// Returns false if the factorization breaks down.
bool cholesky_in_place(std::vector<double>& a, std::size_t n);

/// Solve L L^T x = b given the lower factor from cholesky_in_place.
std::vector<double> cholesky_solve(const std::vector<double>& chol, std::size_t n,
                                   const std::vector<double>& b);

/// Inverse of the factored matrix (returns full symmetric inverse).
std::vector<double> cholesky_inverse(const std::vector<double>& chol, std::size_t n);

/// y = L z for the lower factor (used for correlated normal draws).
std::vector<double> lower_times(const std::vector<double>& chol, std::size_t n,
                                const std::vector<double>& z);

}  // namespace pscart

#endif  // PSCART_LINALG_HPP
