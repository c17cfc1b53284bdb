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

#ifndef PSCART_MICE_HPP
#define PSCART_MICE_HPP

#include <optional>
#include <vector>

#include "pscart/dataset.hpp"
#include "pscart/rng.hpp"

namespace pscart {

enum class ImputeMethod { logistic, gaussian, cart };

/// Chained-equations configuration.  Imputation models regress each
/// incomplete column on all its predictors as untransformed main effects.
struct MiceConfig {
  int m = 5;
  int cycles = 5;
  // Per column; nullopt for columns that need no imputation.
  std::vector<std::optional<ImputeMethod>> method;
  // Per column; must exclude the column itself.
  std::vector<std::vector<std::size_t>> predictors;
};

/// logistic for incomplete binary columns, gaussian for incomplete
/// continuous ones; predictors are all other columns (outcome included).
MiceConfig default_mice_config(const Dataset& d);

/// Same, but trees draw the imputations for every incomplete column.
MiceConfig cart_mice_config(const Dataset& d);

struct ImputedSet {
  std::vector<Dataset> completed;  // m datasets, no missing cells
  MiceConfig config;
  std::uint64_t provenance_seed = 0;
  int ridge_fallbacks = 0;  // separated logistic sub-fits that were stabilized
};

/// Chained-equations imputation: marginal-draw initialization, then `cycles`
/// sweeps of per-column conditional redraws (posterior-draw logistic /
/// Bayesian gaussian / tree-donor).
ImputedSet mice_impute(const Dataset& d, const MiceConfig& cfg, RngStream& rng);

/// Persist the m completed datasets as <basename>_1.csv .. <basename>_m.csv
/// under dir, plus a JSON manifest with the provenance.
void write_imputed_set(const ImputedSet& imputed, const std::string& dir,
                       const std::string& basename);

}  // namespace pscart

#endif  // PSCART_MICE_HPP
