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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pscart/rng.hpp"
#include "pscart/tree.hpp"
#include "split_oracle.hpp"
#include "test_util.hpp"

using namespace pscart;
using testing::kNaN;
using testing::make_dataset;
using testing::oracle_all_splits;
using testing::oracle_impurity;
using testing::oracle_optimal_set;

namespace {

// Recursively re-derive node membership by replaying the stored rules, so
// the growth-time bookkeeping can be checked from scratch.
void oracle_route(const Tree& tree, const Dataset& d, int node,
                  const std::vector<std::size_t>& rows,
                  std::vector<std::vector<std::size_t>>& membership) {
  membership[static_cast<std::size_t>(node)] = rows;
  const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
  if (nd.is_leaf()) return;
  std::vector<std::size_t> left, right, miss;
  for (const auto i : rows) {
    const auto v = static_cast<std::size_t>(nd.split.var);
    if (d.observed(i, v)) {
      (d.value(i, v) <= nd.split.threshold ? left : right).push_back(i);
      continue;
    }
    if (tree.mode == MissingMode::branch) {
      miss.push_back(i);
      continue;
    }
    bool routed = false;
    for (const auto& s : nd.split.surrogates) {
      const auto u = static_cast<std::size_t>(s.var);
      if (!d.observed(i, u)) continue;
      const bool low = d.value(i, u) <= s.threshold;
      ((low == s.low_goes_left) ? left : right).push_back(i);
      routed = true;
      break;
    }
    if (!routed) (nd.split.default_left ? left : right).push_back(i);
  }
  oracle_route(tree, d, nd.left, left, membership);
  oracle_route(tree, d, nd.right, right, membership);
  if (nd.miss >= 0) oracle_route(tree, d, nd.miss, miss, membership);
}

std::vector<std::vector<std::size_t>> oracle_membership(const Tree& tree,
                                                        const Dataset& d) {
  std::vector<std::vector<std::size_t>> membership(tree.nodes.size());
  std::vector<std::size_t> all(d.n_rows());
  for (std::size_t i = 0; i < d.n_rows(); ++i) all[i] = i;
  oracle_route(tree, d, 0, all, membership);
  return membership;
}

double expit_like(double x) { return 1.0 / (1.0 + std::exp(-1.2 * x)); }

Dataset random_classification_dataset(RngStream& rng, std::size_t n, int p,
                                      double missing_rate) {
  auto schema = testing::continuous_schema(p);
  schema.push_back({"target", ColumnKind::binary, ColumnRole::exposure});
  Dataset d(schema, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      if (rng.uniform01() < missing_rate) continue;
      d.set(i, static_cast<std::size_t>(j), rng.normal());
    }
    const double signal = d.observed(i, 0) ? d.value(i, 0) : 0.0;
    d.set(i, static_cast<std::size_t>(p), rng.bernoulli(expit_like(signal)) ? 1.0 : 0.0);
  }
  return d;
}

}  // namespace

TEST_CASE("pure target stops at a single leaf") {
  auto schema = testing::continuous_schema(1);
  schema.push_back({"t", ColumnKind::binary, ColumnRole::exposure});
  const auto d = make_dataset(schema, {{0.1, 0.2, 0.3, 0.4}, {1, 1, 1, 1}});
  const auto tree = fit_tree(d, 1, {}, TreeControls{});
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].prediction == 1.0);
}

TEST_CASE("root split equals the exhaustive-enumeration optimum") {
  RngStream rng(101, 0, 0);
  TreeControls controls;
  controls.min_split = 2;
  controls.min_bucket = 1;
  controls.cp = 0.0;
  controls.max_depth = 1;
  int splits_checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const auto n = 4 + rng.index_below(9);  // up to 12 rows
    const int p = 1 + static_cast<int>(rng.index_below(3));
    const auto d = random_classification_dataset(rng, n, p, 0.0);
    const auto target = static_cast<std::size_t>(p);
    const auto ties =
        oracle_optimal_set(oracle_all_splits(d, target, controls.min_bucket, true), 1e-12);
    const auto tree = fit_tree(d, target, {}, controls);
    if (ties.empty()) continue;  // degenerate data may legitimately stay a leaf
    REQUIRE_FALSE(tree.nodes[0].is_leaf());
    bool matches_a_tie = false;
    for (const auto& c : ties) {
      matches_a_tie |= tree.nodes[0].split.var == c.var &&
                       std::abs(tree.nodes[0].split.threshold - c.threshold) < 1e-12;
    }
    CHECK(matches_a_tie);
    if (ties.size() == 1) {
      CHECK(tree.nodes[0].split.var == ties[0].var);
      CHECK(tree.nodes[0].split.threshold ==
            doctest::Approx(ties[0].threshold).epsilon(1e-12));
      ++splits_checked;
    }
  }
  CHECK(splits_checked > 30);
}

TEST_CASE("exact split ties break toward the lower variable index") {
  // Two bit-identical covariate columns: their candidate gains are computed
  // from the same numbers, so the earlier column must win.
  auto schema = testing::continuous_schema(2);
  schema.push_back({"t", ColumnKind::binary, ColumnRole::exposure});
  std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const auto d = make_dataset(schema, {x, x, y});
  TreeControls controls;
  controls.min_split = 2;
  controls.min_bucket = 1;
  controls.cp = 0.0;
  controls.max_depth = 1;
  const auto tree = fit_tree(d, 2, {}, controls);
  REQUIRE_FALSE(tree.nodes[0].is_leaf());
  CHECK(tree.nodes[0].split.var == 0);
  CHECK(tree.nodes[0].split.threshold == doctest::Approx(4.5));
}

TEST_CASE("no-signal data with cp in force stays a single leaf") {
  // Each covariate arm holds exactly half the exposed rows, so every split
  // improvement is identically zero.
  auto schema = testing::continuous_schema(1);
  schema.push_back({"t", ColumnKind::binary, ColumnRole::exposure});
  std::vector<double> x(20), y(20);
  for (int i = 0; i < 20; ++i) {
    x[i] = i % 4 < 2 ? 0.0 : 1.0;
    y[i] = i % 2;
  }
  const auto d = make_dataset(schema, {x, y});
  TreeControls controls;  // min_split 20 allows one attempt at n = 20
  const auto tree = fit_tree(d, 1, {}, controls);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].prediction == 0.5);
}

TEST_CASE("perfectly correlated copy acts as a surrogate") {
  auto schema = testing::continuous_schema(2);
  schema.push_back({"t", ColumnKind::binary, ColumnRole::exposure});
  const std::size_t n = 60;
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = static_cast<double>(i) / n - 0.5;
    x2[i] = x1[i];  // exact copy
    y[i] = x1[i] > 0.0 ? 1.0 : 0.0;
  }
  const auto d = make_dataset(schema, {x1, x2, y});
  TreeControls controls;
  controls.min_split = 4;
  controls.min_bucket = 2;
  const auto tree = fit_tree(d, 2, {}, controls);
  REQUIRE_FALSE(tree.nodes[0].is_leaf());
  REQUIRE_FALSE(tree.nodes[0].split.surrogates.empty());
  CHECK(tree.nodes[0].split.surrogates[0].agreement == doctest::Approx(1.0));

  // A row missing the primary variable routes exactly as if it were present.
  for (double v : {-0.4, -0.01, 0.01, 0.4}) {
    const std::vector<double> full = {v, v, 0.0};
    const std::vector<std::uint8_t> all_obs = {1, 1, 1};
    const std::vector<std::uint8_t> missing_primary = {0, 1, 1};
    CHECK(tree.predict_row(full, missing_primary) ==
          tree.predict_row(full, all_obs));
  }
}

TEST_CASE("branch mode routes missing rows to a third child") {
  auto schema = testing::continuous_schema(2);
  schema.push_back({"t", ColumnKind::binary, ColumnRole::exposure});
  std::vector<double> x1, x2, y;
  for (int i = 0; i < 20; ++i) {  // observed, strongly predictive
    x1.push_back(0.0);
    x2.push_back(0.5);
    y.push_back(0.0);
  }
  for (int i = 0; i < 20; ++i) {
    x1.push_back(1.0);
    x2.push_back(0.5);
    y.push_back(1.0);
  }
  for (int i = 0; i < 10; ++i) {  // missing the splitter, 7/10 exposed
    x1.push_back(kNaN);
    x2.push_back(0.5);
    y.push_back(i < 7 ? 1.0 : 0.0);
  }
  const auto d = make_dataset(schema, {x1, x2, y});
  TreeControls controls;
  controls.min_split = 10;
  controls.min_bucket = 5;
  controls.missing_mode = MissingMode::branch;
  const auto tree = fit_tree(d, 2, {}, controls);
  REQUIRE_FALSE(tree.nodes[0].is_leaf());
  REQUIRE(tree.nodes[0].miss >= 0);
  CHECK(tree.nodes[static_cast<std::size_t>(tree.nodes[0].miss)].prediction ==
        doctest::Approx(0.7));

  const std::vector<double> row = {0.0, 0.5, 0.0};
  const std::vector<std::uint8_t> missing_primary = {0, 1, 1};
  CHECK(tree.predict_row(row, missing_primary) == doctest::Approx(0.7));
}

TEST_CASE("regression tree basics") {
  auto schema = testing::continuous_schema(1);
  schema.push_back({"t", ColumnKind::continuous, ColumnRole::auxiliary});

  SUBCASE("constant target is a single leaf at the constant") {
    const auto d = make_dataset(schema, {{1, 2, 3, 4}, {2.5, 2.5, 2.5, 2.5}});
    const auto tree = fit_regression_tree(d, 1, {}, TreeControls{});
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].prediction == 2.5);
  }

  SUBCASE("noise-free step function splits at the step") {
    const std::size_t n = 30;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i) / n;
      y[i] = x[i] > 0.35 ? 1.0 : 0.0;
    }
    const auto d = make_dataset(schema, {x, y});
    TreeControls controls;
    controls.min_split = 4;
    controls.min_bucket = 2;
    const auto tree = fit_regression_tree(d, 1, {}, controls);
    REQUIRE_FALSE(tree.nodes[0].is_leaf());
    // The step lies between x = 10/30 and x = 11/30.
    CHECK(tree.nodes[0].split.threshold == doctest::Approx((10.0 / 30 + 11.0 / 30) / 2));
    const auto ties =
        oracle_optimal_set(oracle_all_splits(d, 1, controls.min_bucket, false), 1e-12);
    REQUIRE(ties.size() == 1);
    CHECK(tree.nodes[0].split.var == ties[0].var);
    CHECK(tree.nodes[0].split.threshold == doctest::Approx(ties[0].threshold));
  }

  SUBCASE("branch-mode third child carries the mean of the missing rows") {
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) {
      x.push_back(i < 6 ? 0.0 : 1.0);
      y.push_back(i < 6 ? 1.0 : 3.0);
    }
    x.push_back(kNaN);
    y.push_back(10.0);
    x.push_back(kNaN);
    y.push_back(20.0);
    const auto d = make_dataset(schema, {x, y});
    TreeControls controls;
    controls.min_split = 4;
    controls.min_bucket = 2;
    controls.cp = 1e-6;
    controls.missing_mode = MissingMode::branch;
    const auto tree = fit_regression_tree(d, 1, {}, controls);
    REQUIRE_FALSE(tree.nodes[0].is_leaf());
    REQUIRE(tree.nodes[0].miss >= 0);
    CHECK(tree.nodes[static_cast<std::size_t>(tree.nodes[0].miss)].prediction ==
          doctest::Approx(15.0));
  }
}

TEST_CASE("fitted-tree structural invariants hold on random data") {
  RngStream rng(202, 0, 0);
  for (int rep = 0; rep < 12; ++rep) {
    const bool branch = rep % 2 == 0;
    const auto d = random_classification_dataset(rng, 150, 3, 0.25);
    TreeControls controls;
    controls.min_split = 15;
    controls.min_bucket = 5;
    controls.cp = 0.005;
    controls.missing_mode = branch ? MissingMode::branch : MissingMode::surrogate;
    const auto target = static_cast<std::size_t>(3);
    const auto tree = fit_tree(d, target, {}, controls);

    const auto membership = oracle_membership(tree, d);

    // Every training row lands in exactly one leaf.
    std::size_t leaf_total = 0;
    double weighted_leaf_sum = 0.0;
    double target_sum = 0.0;
    for (std::size_t i = 0; i < d.n_rows(); ++i) target_sum += d.value(i, target);
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const auto& node = tree.nodes[id];
      CHECK(node.count == static_cast<int>(membership[id].size()));
      if (node.is_leaf()) {
        leaf_total += membership[id].size();
        weighted_leaf_sum += node.weight * node.prediction;
      }
    }
    CHECK(leaf_total == d.n_rows());
    // Leaf-average identity: weighted leaf predictions recover the mean.
    CHECK(weighted_leaf_sum == doctest::Approx(target_sum).epsilon(1e-10));

    // Accepted splits clear the cp gate relative to the root.
    std::vector<double> root_y, root_w;
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
      root_y.push_back(d.value(i, target));
      root_w.push_back(1.0);
    }
    const double root_impurity = oracle_impurity(root_y, root_w, true);
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const auto& node = tree.nodes[id];
      if (node.is_leaf()) continue;
      const auto v = static_cast<std::size_t>(node.split.var);
      std::vector<double> py, pw, ly, lw, ry, rw;
      for (const auto i : membership[id]) {
        if (!d.observed(i, v)) continue;
        py.push_back(d.value(i, target));
        pw.push_back(1.0);
        if (d.value(i, v) <= node.split.threshold) {
          ly.push_back(d.value(i, target));
          lw.push_back(1.0);
        } else {
          ry.push_back(d.value(i, target));
          rw.push_back(1.0);
        }
      }
      const double gain = oracle_impurity(py, pw, true) - oracle_impurity(ly, lw, true) -
                          oracle_impurity(ry, rw, true);
      CHECK(gain >= controls.cp * root_impurity - 1e-9);

      // Surrogate admission: stored agreement beats the majority rule.
      if (!branch) {
        const double wl = static_cast<double>(ly.size());
        const double wr = static_cast<double>(ry.size());
        const double majority = std::max(wl, wr) / (wl + wr);
        double previous = 1.1;
        for (const auto& s : node.split.surrogates) {
          CHECK(s.agreement >= majority - 1e-12);
          CHECK(s.agreement <= previous + 1e-12);  // sorted descending
          previous = s.agreement;
        }
      }
    }
  }
}

TEST_CASE("prediction of a fully observed training row matches its leaf") {
  RngStream rng(303, 0, 0);
  const auto d = random_classification_dataset(rng, 80, 2, 0.0);
  TreeControls controls;
  controls.min_split = 10;
  controls.min_bucket = 4;
  const auto tree = fit_tree(d, 2, {}, controls);
  const auto membership = oracle_membership(tree, d);
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    if (!tree.nodes[id].is_leaf()) continue;
    for (const auto i : membership[id]) {
      CHECK(tree.predict(d, i) == tree.nodes[id].prediction);
    }
  }
}

TEST_CASE("tree input validation") {
  auto schema = testing::continuous_schema(1);
  schema.push_back({"t", ColumnKind::continuous, ColumnRole::auxiliary});
  const auto d = make_dataset(schema, {{1, 2, 3}, {0, 1, 2}});
  CHECK_THROWS(fit_tree(d, 1, {}, TreeControls{}));  // target not binary

  const auto d2 = make_dataset(schema, {{1, 2, 3}, {0, 1, 1}});
  const std::vector<double> negative = {-1.0, 1.0, 1.0};
  CHECK_THROWS(fit_tree(d2, 1, negative, TreeControls{}));

  TreeControls bad;
  bad.min_bucket = 50;
  bad.min_split = 10;
  CHECK_THROWS(fit_tree(d2, 1, {}, bad));

  const auto tree = fit_tree(d2, 1, {}, TreeControls{});
  const std::vector<double> short_row = {1.0};
  const std::vector<std::uint8_t> short_obs = {1};
  CHECK_THROWS(tree.predict_row(short_row, short_obs));
}

TEST_CASE("tree dump renders every node") {
  RngStream rng(404, 0, 0);
  const auto d = random_classification_dataset(rng, 100, 2, 0.0);
  TreeControls controls;
  controls.min_split = 10;
  controls.min_bucket = 4;
  const auto tree = fit_tree(d, 2, {}, controls);
  const auto text = tree.dump();
  std::size_t leaves = 0;
  for (const auto& node : tree.nodes) leaves += node.is_leaf();
  std::size_t seen = 0;
  for (std::size_t pos = 0; (pos = text.find("leaf", pos)) != std::string::npos; ++pos) {
    ++seen;
  }
  CHECK(seen == leaves);
}
