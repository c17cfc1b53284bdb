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

#ifndef PSCART_DATASET_HPP
#define PSCART_DATASET_HPP

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pscart {

enum class ColumnKind { binary, continuous };
enum class ColumnRole { covariate, exposure, outcome, auxiliary };

struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  ColumnRole role = ColumnRole::covariate;
};

/// Rectangular numeric table with an explicit per-cell missingness mask.
///
/// Missing cells carry a NaN payload, but all numeric code is required to
/// consult the mask first; value() asserts observedness in debug builds so
/// that a read of a masked cell trips immediately.  Datasets are treated as
/// immutable once fully constructed and are safe for concurrent reads.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ColumnMeta> columns, std::size_t n_rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }

  const ColumnMeta& column(std::size_t j) const { return columns_[j]; }
  const std::vector<ColumnMeta>& columns() const { return columns_; }

  std::optional<std::size_t> find_column(std::string_view name) const;

  /// Index of the unique exposure-role column; throws if the dataset has none.
  std::size_t exposure_index() const;
  std::optional<std::size_t> outcome_index() const;
  std::vector<std::size_t> covariate_indices() const;

  bool observed(std::size_t i, std::size_t j) const {
    return observed_[j * n_rows_ + i] != 0;
  }
  double value(std::size_t i, std::size_t j) const {
    assert(observed(i, j) && "read of a masked cell");
    return values_[j * n_rows_ + i];
  }

  void set(std::size_t i, std::size_t j, double v);
  void set_missing(std::size_t i, std::size_t j);

  /// Raw column storage; masked slots hold the NaN poison payload.
  std::span<const double> column_values(std::size_t j) const {
    return {values_.data() + j * n_rows_, n_rows_};
  }
  std::span<const std::uint8_t> column_observed(std::size_t j) const {
    return {observed_.data() + j * n_rows_, n_rows_};
  }

  bool row_complete(std::size_t i) const;
  bool column_complete(std::size_t j) const;
  std::size_t missing_count() const;

 private:
  std::vector<ColumnMeta> columns_;
  std::size_t n_rows_ = 0;
  std::vector<double> values_;          // column-major
  std::vector<std::uint8_t> observed_;  // column-major, 1 = observed

  static constexpr double kPoison = std::numeric_limits<double>::quiet_NaN();
};

struct MissingPattern {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::uint8_t> indicator;  // column-major, 1 = missing

  std::uint8_t at(std::size_t i, std::size_t j) const {
    return indicator[j * n_rows + i];
  }
};

/// Rows with no missing cell, in original order; throws if none remain.
Dataset complete_cases(const Dataset& d);

/// Vector of row indices with at least one missing cell.
std::vector<std::size_t> incomplete_rows(const Dataset& d);

/// M[i,j] = 1 exactly where the mask marks (i,j) missing.
MissingPattern missing_indicators(const Dataset& d);

}  // namespace pscart

#endif  // PSCART_DATASET_HPP
