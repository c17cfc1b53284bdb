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

#include "pscart/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace pscart {

CsvError::CsvError(std::string msg, std::size_t row, std::size_t col)
    : std::runtime_error(msg + " (row " + std::to_string(row) + ", column " +
                         std::to_string(col) + ")"),
      row_(row),
      col_(col) {}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

void write_csv(const Dataset& d, std::ostream& out,
               const std::vector<std::string>& provenance) {
  for (const auto& line : provenance) out << "# " << line << "\n";
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (j) out << ',';
    out << d.column(j).name;
  }
  out << '\n';
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      if (j) out << ',';
      if (d.observed(i, j)) {
        out << format_double(d.value(i, j));
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

void write_csv_file(const Dataset& d, const std::string& path,
                    const std::vector<std::string>& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(d, out, provenance);
}

Dataset read_csv(std::istream& in, const std::vector<ColumnMeta>& schema) {
  std::string line;
  std::size_t lineno = 0;

  // Skip provenance comments, find the header.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw CsvError("missing header row", lineno, 0);
  if (header.size() != schema.size()) {
    throw CsvError("header has " + std::to_string(header.size()) +
                       " columns, schema expects " + std::to_string(schema.size()),
                   lineno, 0);
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (header[j] != schema[j].name) {
      throw CsvError("header column '" + header[j] + "' does not match schema '" +
                         schema[j].name + "'",
                     lineno, j + 1);
    }
  }

  struct Cell {
    double v;
    bool missing;
  };
  std::vector<std::vector<Cell>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != schema.size()) {
      throw CsvError("expected " + std::to_string(schema.size()) + " fields, got " +
                         std::to_string(fields.size()),
                     lineno, 0);
    }
    std::vector<Cell> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      if (f.empty() || f == "NA") {
        row[j] = {0.0, true};
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
        throw CsvError("cannot parse '" + f + "' as a number", lineno, j + 1);
      }
      if (schema[j].kind == ColumnKind::binary && v != 0.0 && v != 1.0) {
        throw CsvError("binary column holds non-{0,1} value '" + f + "'", lineno,
                       j + 1);
      }
      row[j] = {v, false};
    }
    rows.push_back(std::move(row));
  }

  Dataset d(schema, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (!rows[i][j].missing) d.set(i, j, rows[i][j].v);
    }
  }
  return d;
}

Dataset read_csv_file(const std::string& path, const std::vector<ColumnMeta>& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv(in, schema);
}

namespace {

const char* kind_name(ColumnKind k) {
  return k == ColumnKind::binary ? "binary" : "continuous";
}

const char* role_name(ColumnRole r) {
  switch (r) {
    case ColumnRole::covariate: return "covariate";
    case ColumnRole::exposure: return "exposure";
    case ColumnRole::outcome: return "outcome";
    case ColumnRole::auxiliary: return "auxiliary";
  }
  return "covariate";
}

ColumnKind kind_from(const std::string& s) {
  if (s == "binary") return ColumnKind::binary;
  if (s == "continuous") return ColumnKind::continuous;
  throw std::runtime_error("unknown column kind: " + s);
}

ColumnRole role_from(const std::string& s) {
  if (s == "covariate") return ColumnRole::covariate;
  if (s == "exposure") return ColumnRole::exposure;
  if (s == "outcome") return ColumnRole::outcome;
  if (s == "auxiliary") return ColumnRole::auxiliary;
  throw std::runtime_error("unknown column role: " + s);
}

}  // namespace

std::string schema_to_json(const std::vector<ColumnMeta>& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema) {
    cols.push_back({{"name", c.name}, {"kind", kind_name(c.kind)}, {"role", role_name(c.role)}});
  }
  return nlohmann::json{{"columns", cols}}.dump(2);
}

std::vector<ColumnMeta> schema_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<ColumnMeta> schema;
  for (const auto& c : j.at("columns")) {
    ColumnMeta m;
    m.name = c.at("name").get<std::string>();
    m.kind = kind_from(c.at("kind").get<std::string>());
    m.role = role_from(c.at("role").get<std::string>());
    schema.push_back(std::move(m));
  }
  return schema;
}

void write_schema_file(const std::vector<ColumnMeta>& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << schema_to_json(schema) << "\n";
}

std::vector<ColumnMeta> read_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return schema_from_json(ss.str());
}

}  // namespace pscart
