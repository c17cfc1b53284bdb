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

#ifndef PSCART_BAGGING_HPP
#define PSCART_BAGGING_HPP

#include <vector>

#include "pscart/dataset.hpp"
#include "pscart/rng.hpp"
#include "pscart/tree.hpp"

namespace pscart {

/// Bootstrap-aggregated classification trees; the score for a row is the
/// mean of the per-tree exposed proportions.
struct BaggedModel {
  std::vector<Tree> trees;
};

/// Fit one surrogate-mode tree per n-row with-replacement resample.
/// Features default to the covariate-role columns of d.
BaggedModel fit_bagged(const Dataset& d, std::size_t exposure_col, int n_trees,
                       const TreeControls& controls, RngStream& rng);

/// Test seam: caller supplies the resamples explicitly.
BaggedModel fit_bagged_resampled(const Dataset& d, std::size_t exposure_col,
                                 const std::vector<std::vector<std::uint32_t>>& resamples,
                                 const TreeControls& controls);

std::vector<double> predict_ps_bagged(const BaggedModel& m, const Dataset& d);

}  // namespace pscart

#endif  // PSCART_BAGGING_HPP
