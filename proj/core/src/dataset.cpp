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

#include "pscart/dataset.hpp"

#include <stdexcept>

namespace pscart {

Dataset::Dataset(std::vector<ColumnMeta> columns, std::size_t n_rows)
    : columns_(std::move(columns)),
      n_rows_(n_rows),
      values_(columns_.size() * n_rows, kPoison),
      observed_(columns_.size() * n_rows, 0) {
  std::size_t n_exposure = 0;
  std::size_t n_outcome = 0;
  for (const auto& c : columns_) {
    if (c.role == ColumnRole::exposure) ++n_exposure;
    if (c.role == ColumnRole::outcome) ++n_outcome;
  }
  if (n_exposure > 1) {
    throw std::invalid_argument("dataset may have at most one exposure column");
  }
  if (n_outcome > 1) {
    throw std::invalid_argument("dataset may have at most one outcome column");
  }
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return j;
  }
  return std::nullopt;
}

std::size_t Dataset::exposure_index() const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].role == ColumnRole::exposure) return j;
  }
  throw std::runtime_error("dataset has no exposure column");
}

std::optional<std::size_t> Dataset::outcome_index() const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].role == ColumnRole::outcome) return j;
  }
  return std::nullopt;
}

std::vector<std::size_t> Dataset::covariate_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].role == ColumnRole::covariate) out.push_back(j);
  }
  return out;
}

void Dataset::set(std::size_t i, std::size_t j, double v) {
  if (columns_[j].kind == ColumnKind::binary && v != 0.0 && v != 1.0) {
    throw std::invalid_argument("binary column '" + columns_[j].name +
                                "' assigned value outside {0,1}");
  }
  values_[j * n_rows_ + i] = v;
  observed_[j * n_rows_ + i] = 1;
}

void Dataset::set_missing(std::size_t i, std::size_t j) {
  values_[j * n_rows_ + i] = kPoison;
  observed_[j * n_rows_ + i] = 0;
}

bool Dataset::row_complete(std::size_t i) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (!observed(i, j)) return false;
  }
  return true;
}

bool Dataset::column_complete(std::size_t j) const {
  auto obs = column_observed(j);
  for (auto o : obs) {
    if (!o) return false;
  }
  return true;
}

std::size_t Dataset::missing_count() const {
  std::size_t n = 0;
  for (auto o : observed_) n += (o == 0);
  return n;
}

Dataset complete_cases(const Dataset& d) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    if (d.row_complete(i)) keep.push_back(i);
  }
  if (keep.empty()) {
    throw std::runtime_error("complete_cases: no complete rows remain");
  }
  Dataset out(d.columns(), keep.size());
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    for (std::size_t k = 0; k < keep.size(); ++k) {
      out.set(k, j, d.value(keep[k], j));
    }
  }
  return out;
}

std::vector<std::size_t> incomplete_rows(const Dataset& d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    if (!d.row_complete(i)) out.push_back(i);
  }
  return out;
}

MissingPattern missing_indicators(const Dataset& d) {
  MissingPattern m;
  m.n_rows = d.n_rows();
  m.n_cols = d.n_cols();
  m.indicator.resize(m.n_rows * m.n_cols, 0);
  for (std::size_t j = 0; j < m.n_cols; ++j) {
    auto obs = d.column_observed(j);
    for (std::size_t i = 0; i < m.n_rows; ++i) {
      m.indicator[j * m.n_rows + i] = obs[i] ? 0 : 1;
    }
  }
  return m;
}

}  // namespace pscart
