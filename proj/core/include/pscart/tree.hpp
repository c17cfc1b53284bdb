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

#ifndef PSCART_TREE_HPP
#define PSCART_TREE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pscart/dataset.hpp"

namespace pscart {

/// How a tree treats a row whose splitting variable is missing:
///  - surrogate: route by ranked backup splits, falling back to the side
///    that received the majority of observed training rows;
///  - branch: missingness is a level of its own and routes to a third child.
enum class MissingMode { surrogate, branch };

struct TreeControls {
  int min_split = 20;
  int min_bucket = 7;
  double cp = 0.01;
  int max_depth = 30;
  int max_surrogates = 5;
  MissingMode missing_mode = MissingMode::surrogate;
};

struct Surrogate {
  int var = -1;            // dataset column index
  double threshold = 0.0;  // x <= threshold routes toward...
  bool low_goes_left = true;
  double agreement = 0.0;  // weighted fraction agreeing with the primary split
};

struct SplitRule {
  int var = -1;
  double threshold = 0.0;  // observed x <= threshold -> left child
  bool default_left = true;
  std::vector<Surrogate> surrogates;
};

struct TreeNode {
  double prediction = 0.0;  // class-1 proportion or weighted mean of target
  double weight = 0.0;
  int count = 0;
  int depth = 0;
  SplitRule split;
  int left = -1;
  int right = -1;
  int miss = -1;  // branch mode only; -1 when no training row was missing here

  bool is_leaf() const { return left < 0; }
};

class Tree {
 public:
  MissingMode mode = MissingMode::surrogate;
  std::size_t schema_cols = 0;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Leaf prediction for a row given raw per-column values and observedness
  /// flags (indexed by dataset column).
  double predict_row(std::span<const double> x,
                     std::span<const std::uint8_t> obs) const;
  int leaf_for_row(std::span<const double> x,
                   std::span<const std::uint8_t> obs) const;

  double predict(const Dataset& d, std::size_t row) const;
  std::vector<double> predict_all(const Dataset& d) const;

  /// Indented text rendering for inspection.
  std::string dump() const;
};

/// Classification tree for a binary target: weighted Gini splitting over
/// rows whose candidate variable is observed, rpart-style growth controls.
/// Empty weights mean unit weights; empty features mean all non-target
/// columns.
Tree fit_tree(const Dataset& d, std::size_t target_col, std::span<const double> weights,
              const TreeControls& controls, std::span<const std::size_t> features = {});

/// Same, fit to a row multiset (bootstrap resample), unit weights.
Tree fit_tree_resampled(const Dataset& d, std::size_t target_col,
                        std::span<const std::uint32_t> rows, const TreeControls& controls,
                        std::span<const std::size_t> features = {});

/// Regression tree: sum-of-squares impurity, weighted-mean leaves.
Tree fit_regression_tree(const Dataset& d, std::size_t target_col,
                         std::span<const double> weights, const TreeControls& controls,
                         std::span<const std::size_t> features = {});

Tree fit_regression_tree_resampled(const Dataset& d, std::size_t target_col,
                                   std::span<const std::uint32_t> rows,
                                   const TreeControls& controls,
                                   std::span<const std::size_t> features = {});

}  // namespace pscart

#endif  // PSCART_TREE_HPP
