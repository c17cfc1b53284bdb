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

#ifndef PSCART_CSV_HPP
#define PSCART_CSV_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pscart/dataset.hpp"

namespace pscart {

/// Parse or type failure with 1-based row/column position (row 0 = header).
class CsvError : public std::runtime_error {
 public:
  CsvError(std::string msg, std::size_t row, std::size_t col);
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Write with a header row; missing cells as "NA"; doubles in shortest
/// round-trip form so a write/read cycle is bit-exact.  Any provenance
/// lines are emitted first, each prefixed with "# ".
void write_csv(const Dataset& d, std::ostream& out,
               const std::vector<std::string>& provenance = {});
void write_csv_file(const Dataset& d, const std::string& path,
                    const std::vector<std::string>& provenance = {});

/// Read a CSV whose header matches the schema column names (same order).
/// Empty fields and "NA" mark missing cells; leading '#' lines are skipped.
Dataset read_csv(std::istream& in, const std::vector<ColumnMeta>& schema);
Dataset read_csv_file(const std::string& path, const std::vector<ColumnMeta>& schema);

/// Column schema as JSON: {"columns":[{"name","kind","role"},...]}.
std::string schema_to_json(const std::vector<ColumnMeta>& schema);
std::vector<ColumnMeta> schema_from_json(const std::string& text);
void write_schema_file(const std::vector<ColumnMeta>& schema, const std::string& path);
std::vector<ColumnMeta> read_schema_file(const std::string& path);

}  // namespace pscart

#endif  // PSCART_CSV_HPP
