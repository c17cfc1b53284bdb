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

#include "pscart/bagging.hpp"

#include <stdexcept>

namespace pscart {

namespace {

void check_exposure(const Dataset& d, std::size_t exposure_col) {
  if (!d.column_complete(exposure_col)) {
    throw std::invalid_argument("fit_bagged: exposure must be fully observed");
  }
  const auto vals = d.column_values(exposure_col);
  for (double v : vals) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument("fit_bagged: exposure must be binary");
    }
  }
}

}  // namespace

BaggedModel fit_bagged_resampled(const Dataset& d, std::size_t exposure_col,
                                 const std::vector<std::vector<std::uint32_t>>& resamples,
                                 const TreeControls& controls) {
  if (resamples.empty()) throw std::invalid_argument("fit_bagged: need >= 1 resample");
  check_exposure(d, exposure_col);
  const auto features = d.covariate_indices();
  BaggedModel model;
  model.trees.reserve(resamples.size());
  for (const auto& rows : resamples) {
    model.trees.push_back(
        fit_tree_resampled(d, exposure_col, rows, controls, features));
  }
  return model;
}

BaggedModel fit_bagged(const Dataset& d, std::size_t exposure_col, int n_trees,
                       const TreeControls& controls, RngStream& rng) {
  if (n_trees < 1) throw std::invalid_argument("fit_bagged: need >= 1 tree");
  const auto n = d.n_rows();
  std::vector<std::vector<std::uint32_t>> resamples(static_cast<std::size_t>(n_trees));
  for (auto& rows : resamples) {
    rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = static_cast<std::uint32_t>(rng.index_below(n));
    }
  }
  return fit_bagged_resampled(d, exposure_col, resamples, controls);
}

std::vector<double> predict_ps_bagged(const BaggedModel& m, const Dataset& d) {
  if (m.trees.empty()) throw std::invalid_argument("predict_ps_bagged: empty model");
  const std::size_t n = d.n_rows();
  std::vector<double> scores(n, 0.0);
  std::vector<double> x(d.n_cols());
  std::vector<std::uint8_t> obs(d.n_cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      obs[j] = d.observed(i, j) ? 1 : 0;
      x[j] = obs[j] ? d.value(i, j) : 0.0;
    }
    double s = 0.0;
    for (const auto& tree : m.trees) s += tree.predict_row(x, obs);
    scores[i] = s / static_cast<double>(m.trees.size());
  }
  return scores;
}

}  // namespace pscart
