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

#include "pscart/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pscart {

namespace {

enum class Task { classification, regression };

// Per-fit working copy of the (possibly resampled) training data.  Each
// resample instance becomes its own row so bootstrap duplicates stay
// independent of dataset row identity.
struct FitData {
  std::size_t n = 0;
  std::vector<int> feature_cols;              // dataset column per feature
  std::vector<std::vector<double>> x;         // [feature][instance]
  std::vector<std::vector<std::uint8_t>> ob;  // [feature][instance]
  std::vector<double> y;
  std::vector<double> w;
};

FitData build_fit_data(const Dataset& d, std::size_t target_col,
                       std::span<const std::uint32_t> rows,
                       std::span<const double> weights,
                       std::span<const std::size_t> features, Task task) {
  FitData f;
  f.n = rows.size();
  if (features.empty()) {
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      if (j != target_col) f.feature_cols.push_back(static_cast<int>(j));
    }
  } else {
    for (auto j : features) {
      if (j == target_col) {
        throw std::invalid_argument("fit_tree: target listed among features");
      }
      f.feature_cols.push_back(static_cast<int>(j));
    }
  }
  const std::size_t p = f.feature_cols.size();
  f.x.assign(p, std::vector<double>(f.n));
  f.ob.assign(p, std::vector<std::uint8_t>(f.n));
  for (std::size_t k = 0; k < p; ++k) {
    const auto col = static_cast<std::size_t>(f.feature_cols[k]);
    const auto vals = d.column_values(col);
    const auto obs = d.column_observed(col);
    for (std::size_t i = 0; i < f.n; ++i) {
      f.x[k][i] = vals[rows[i]];
      f.ob[k][i] = obs[rows[i]];
    }
  }
  const auto tvals = d.column_values(target_col);
  const auto tobs = d.column_observed(target_col);
  f.y.resize(f.n);
  for (std::size_t i = 0; i < f.n; ++i) {
    if (!tobs[rows[i]]) {
      throw std::invalid_argument("fit_tree: target has missing values");
    }
    f.y[i] = tvals[rows[i]];
    if (task == Task::classification && f.y[i] != 0.0 && f.y[i] != 1.0) {
      throw std::invalid_argument("fit_tree: classification target is not binary");
    }
  }
  f.w.assign(f.n, 1.0);
  if (!weights.empty()) {
    if (weights.size() != f.n) {
      throw std::invalid_argument("fit_tree: weights/rows size mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < f.n; ++i) {
      if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
        throw std::invalid_argument("fit_tree: weights must be finite and >= 0");
      }
      f.w[i] = weights[i];
      total += weights[i];
    }
    if (total <= 0.0) throw std::invalid_argument("fit_tree: weights sum to zero");
  }
  return f;
}

struct NodeStats {
  double weight = 0.0;
  double wsum = 0.0;   // sum w*y
  double wsum2 = 0.0;  // sum w*y^2
  int count = 0;
};

NodeStats stats_of(const FitData& f, std::span<const std::uint32_t> members) {
  NodeStats s;
  for (auto i : members) {
    const double w = f.w[i];
    const double y = f.y[i];
    s.weight += w;
    s.wsum += w * y;
    s.wsum2 += w * y * y;
    s.count += 1;
  }
  return s;
}

// Weighted impurity sum: W*Gini for classification, weighted SSE for
// regression.  Both are >= 0 and additive over a partition's deficit.
double impurity_sum(const NodeStats& s, Task task) {
  if (s.weight <= 0.0) return 0.0;
  if (task == Task::classification) {
    const double w1 = s.wsum;
    const double w0 = s.weight - s.wsum;
    return s.weight - (w1 * w1 + w0 * w0) / s.weight;
  }
  return s.wsum2 - s.wsum * s.wsum / s.weight;
}

struct BestSplit {
  bool found = false;
  int var = -1;  // dataset column
  std::size_t feature = 0;
  double threshold = 0.0;
  double improvement = 0.0;
};

struct ScanEntry {
  double x;
  double y;
  double w;
};

// Best threshold on one feature, over node members with that feature
// observed.  Candidates are midpoints between consecutive distinct values.
void scan_feature(const FitData& f, Task task, std::size_t k,
                  std::span<const std::uint32_t> members, int min_bucket,
                  std::vector<ScanEntry>& buf, BestSplit& best) {
  buf.clear();
  for (auto i : members) {
    if (f.ob[k][i]) buf.push_back({f.x[k][i], f.y[i], f.w[i]});
  }
  const int n_obs = static_cast<int>(buf.size());
  if (n_obs < 2 * min_bucket) return;
  std::sort(buf.begin(), buf.end(),
            [](const ScanEntry& a, const ScanEntry& b) { return a.x < b.x; });

  NodeStats total;
  for (const auto& e : buf) {
    total.weight += e.w;
    total.wsum += e.w * e.y;
    total.wsum2 += e.w * e.y * e.y;
    total.count += 1;
  }
  const double parent = impurity_sum(total, task);

  NodeStats left;
  for (int i = 0; i + 1 < n_obs; ++i) {
    left.weight += buf[i].w;
    left.wsum += buf[i].w * buf[i].y;
    left.wsum2 += buf[i].w * buf[i].y * buf[i].y;
    left.count += 1;
    if (buf[i].x == buf[i + 1].x) continue;  // not a boundary
    if (left.count < min_bucket) continue;
    if (n_obs - left.count < min_bucket) break;
    NodeStats right;
    right.weight = total.weight - left.weight;
    right.wsum = total.wsum - left.wsum;
    right.wsum2 = total.wsum2 - left.wsum2;
    right.count = total.count - left.count;
    const double gain = parent - impurity_sum(left, task) - impurity_sum(right, task);
    if (gain > best.improvement) {
      best.found = true;
      best.feature = k;
      best.var = f.feature_cols[k];
      best.threshold = 0.5 * (buf[i].x + buf[i + 1].x);
      best.improvement = gain;
    }
  }
}

// Best backup split on feature u for reproducing the primary assignment.
struct SurrogateCandidate {
  bool found = false;
  double threshold = 0.0;
  bool low_goes_left = true;
  double agreement = 0.0;
};

SurrogateCandidate scan_surrogate(const FitData& f, std::size_t u,
                                  std::span<const std::uint32_t> members,
                                  std::span<const std::int8_t> side) {
  // Entries where both the primary variable (side != -1) and u are observed.
  struct Ent {
    double x;
    double w;
    std::int8_t side;  // 0 = left, 1 = right
  };
  std::vector<Ent> buf;
  double wl_total = 0.0;
  double wr_total = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto i = members[m];
    if (side[m] < 0 || !f.ob[u][i]) continue;
    buf.push_back({f.x[u][i], f.w[i], side[m]});
    (side[m] == 0 ? wl_total : wr_total) += f.w[i];
  }
  SurrogateCandidate cand;
  if (buf.size() < 2) return cand;
  const double w_total = wl_total + wr_total;
  if (w_total <= 0.0) return cand;
  std::sort(buf.begin(), buf.end(), [](const Ent& a, const Ent& b) { return a.x < b.x; });

  double wl_low = 0.0;  // weight of primary-left entries with x <= threshold
  double wr_low = 0.0;
  for (std::size_t i = 0; i + 1 < buf.size(); ++i) {
    (buf[i].side == 0 ? wl_low : wr_low) += buf[i].w;
    if (buf[i].x == buf[i + 1].x) continue;
    // low->left pairs lows with primary-left and highs with primary-right.
    const double agree_ll = wl_low + (wr_total - wr_low);
    const double agree_lr = wr_low + (wl_total - wl_low);
    const double thr = 0.5 * (buf[i].x + buf[i + 1].x);
    if (agree_ll / w_total > cand.agreement) {
      cand = {true, thr, true, agree_ll / w_total};
    }
    if (agree_lr / w_total > cand.agreement) {
      cand = {true, thr, false, agree_lr / w_total};
    }
  }
  return cand;
}

class TreeFitter {
 public:
  TreeFitter(const FitData& f, const TreeControls& c, Task task)
      : f_(f), c_(c), task_(task) {}

  Tree run(std::size_t schema_cols) {
    Tree tree;
    tree.mode = c_.missing_mode;
    tree.schema_cols = schema_cols;
    std::vector<std::uint32_t> all(f_.n);
    std::iota(all.begin(), all.end(), 0u);
    root_impurity_ = impurity_sum(stats_of(f_, all), task_);
    grow(tree, std::move(all), 0);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<std::uint32_t> members, int depth) {
    const auto stats = stats_of(f_, members);
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    {
      auto& node = tree.nodes[id];
      // Class-1 proportion and regression mean share the same weighted form.
      node.prediction = stats.weight > 0.0 ? stats.wsum / stats.weight : 0.0;
      node.weight = stats.weight;
      node.count = stats.count;
      node.depth = depth;
    }

    const double node_impurity = impurity_sum(stats, task_);
    const bool pure = node_impurity <= 1e-12 * std::max(stats.weight, 1.0);
    if (stats.count < c_.min_split || depth >= c_.max_depth || pure) return id;

    BestSplit best;
    std::vector<ScanEntry> buf;
    for (std::size_t k = 0; k < f_.feature_cols.size(); ++k) {
      scan_feature(f_, task_, k, members, c_.min_bucket, buf, best);
    }
    // Relative-improvement rule: gains are measured against the root.
    const double gate = std::max(c_.cp, 1e-12) * root_impurity_;
    if (!best.found || best.improvement < gate) return id;

    // Primary side assignment for observed rows; -1 where the variable is
    // missing.
    std::vector<std::int8_t> side(members.size(), -1);
    int n_left = 0;
    int n_right = 0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto i = members[m];
      if (!f_.ob[best.feature][i]) continue;
      side[m] = f_.x[best.feature][i] <= best.threshold ? 0 : 1;
      (side[m] == 0 ? n_left : n_right) += 1;
    }

    SplitRule rule;
    rule.var = best.var;
    rule.threshold = best.threshold;
    rule.default_left = n_left >= n_right;

    if (c_.missing_mode == MissingMode::surrogate) {
      rule.surrogates = find_surrogates(members, side, best.feature);
    }

    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    std::vector<std::uint32_t> miss_rows;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto i = members[m];
      if (side[m] == 0) {
        left_rows.push_back(i);
      } else if (side[m] == 1) {
        right_rows.push_back(i);
      } else if (c_.missing_mode == MissingMode::branch) {
        miss_rows.push_back(i);
      } else {
        // Surrogate routing for training rows missing the primary variable.
        bool routed = false;
        for (const auto& s : rule.surrogates) {
          const auto u = feature_of(s.var);
          if (!f_.ob[u][i]) continue;
          const bool low = f_.x[u][i] <= s.threshold;
          const bool to_left = low == s.low_goes_left;
          (to_left ? left_rows : right_rows).push_back(i);
          routed = true;
          break;
        }
        if (!routed) (rule.default_left ? left_rows : right_rows).push_back(i);
      }
    }
    members.clear();
    members.shrink_to_fit();

    tree.nodes[id].split = std::move(rule);
    const int left_id = grow(tree, std::move(left_rows), depth + 1);
    tree.nodes[id].left = left_id;
    const int right_id = grow(tree, std::move(right_rows), depth + 1);
    tree.nodes[id].right = right_id;
    if (!miss_rows.empty()) {
      const int miss_id = grow(tree, std::move(miss_rows), depth + 1);
      tree.nodes[id].miss = miss_id;
    }
    return id;
  }

  std::size_t feature_of(int var) const {
    for (std::size_t k = 0; k < f_.feature_cols.size(); ++k) {
      if (f_.feature_cols[k] == var) return k;
    }
    throw std::logic_error("unknown split variable");
  }

  std::vector<Surrogate> find_surrogates(std::span<const std::uint32_t> members,
                                         std::span<const std::int8_t> side,
                                         std::size_t primary_feature) const {
    double wl = 0.0;
    double wr = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (side[m] == 0) {
        wl += f_.w[members[m]];
      } else if (side[m] == 1) {
        wr += f_.w[members[m]];
      }
    }
    if (wl + wr <= 0.0) return {};
    const double majority = std::max(wl, wr) / (wl + wr);

    std::vector<Surrogate> out;
    for (std::size_t u = 0; u < f_.feature_cols.size(); ++u) {
      if (u == primary_feature) continue;
      const auto cand = scan_surrogate(f_, u, members, side);
      // Admission: must beat blindly following the majority direction.
      if (!cand.found || cand.agreement <= majority) continue;
      out.push_back({f_.feature_cols[u], cand.threshold, cand.low_goes_left,
                     cand.agreement});
    }
    std::stable_sort(out.begin(), out.end(), [](const Surrogate& a, const Surrogate& b) {
      if (a.agreement != b.agreement) return a.agreement > b.agreement;
      return a.var < b.var;
    });
    if (out.size() > static_cast<std::size_t>(c_.max_surrogates)) {
      out.resize(static_cast<std::size_t>(c_.max_surrogates));
    }
    return out;
  }

  const FitData& f_;
  const TreeControls& c_;
  Task task_;
  double root_impurity_ = 0.0;
};

void validate_controls(const TreeControls& c) {
  if (c.min_bucket > c.min_split) {
    throw std::invalid_argument("TreeControls: min_bucket must be <= min_split");
  }
  if (c.cp < 0.0) throw std::invalid_argument("TreeControls: cp must be >= 0");
  if (c.max_depth < 0) throw std::invalid_argument("TreeControls: max_depth < 0");
}

std::vector<std::uint32_t> all_rows(const Dataset& d) {
  std::vector<std::uint32_t> rows(d.n_rows());
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

Tree fit_impl(const Dataset& d, std::size_t target_col,
              std::span<const std::uint32_t> rows, std::span<const double> weights,
              const TreeControls& controls, std::span<const std::size_t> features,
              Task task) {
  validate_controls(controls);
  if (rows.empty()) throw std::invalid_argument("fit_tree: no training rows");
  const auto f = build_fit_data(d, target_col, rows, weights, features, task);
  TreeFitter fitter(f, controls, task);
  return fitter.run(d.n_cols());
}

}  // namespace

Tree fit_tree(const Dataset& d, std::size_t target_col, std::span<const double> weights,
              const TreeControls& controls, std::span<const std::size_t> features) {
  const auto rows = all_rows(d);
  return fit_impl(d, target_col, rows, weights, controls, features,
                  Task::classification);
}

Tree fit_tree_resampled(const Dataset& d, std::size_t target_col,
                        std::span<const std::uint32_t> rows, const TreeControls& controls,
                        std::span<const std::size_t> features) {
  return fit_impl(d, target_col, rows, {}, controls, features, Task::classification);
}

Tree fit_regression_tree(const Dataset& d, std::size_t target_col,
                         std::span<const double> weights, const TreeControls& controls,
                         std::span<const std::size_t> features) {
  const auto rows = all_rows(d);
  return fit_impl(d, target_col, rows, weights, controls, features, Task::regression);
}

Tree fit_regression_tree_resampled(const Dataset& d, std::size_t target_col,
                                   std::span<const std::uint32_t> rows,
                                   const TreeControls& controls,
                                   std::span<const std::size_t> features) {
  return fit_impl(d, target_col, rows, {}, controls, features, Task::regression);
}

int Tree::leaf_for_row(std::span<const double> x,
                       std::span<const std::uint8_t> obs) const {
  if (x.size() != schema_cols) {
    throw std::invalid_argument("predict: row width does not match training schema");
  }
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    const auto& rule = node.split;
    const auto v = static_cast<std::size_t>(rule.var);
    if (obs[v]) {
      id = x[v] <= rule.threshold ? node.left : node.right;
      continue;
    }
    if (mode == MissingMode::branch) {
      if (node.miss < 0) return id;  // no missing child grown; stop here
      id = node.miss;
      continue;
    }
    bool routed = false;
    for (const auto& s : rule.surrogates) {
      const auto u = static_cast<std::size_t>(s.var);
      if (!obs[u]) continue;
      const bool low = x[u] <= s.threshold;
      id = (low == s.low_goes_left) ? node.left : node.right;
      routed = true;
      break;
    }
    if (!routed) id = rule.default_left ? node.left : node.right;
  }
  return id;
}

double Tree::predict_row(std::span<const double> x,
                         std::span<const std::uint8_t> obs) const {
  return nodes[leaf_for_row(x, obs)].prediction;
}

double Tree::predict(const Dataset& d, std::size_t row) const {
  std::vector<double> x(d.n_cols());
  std::vector<std::uint8_t> obs(d.n_cols());
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    obs[j] = d.observed(row, j) ? 1 : 0;
    x[j] = obs[j] ? d.value(row, j) : 0.0;
  }
  return predict_row(x, obs);
}

std::vector<double> Tree::predict_all(const Dataset& d) const {
  std::vector<double> out(d.n_rows());
  std::vector<double> x(d.n_cols());
  std::vector<std::uint8_t> obs(d.n_cols());
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      obs[j] = d.observed(i, j) ? 1 : 0;
      x[j] = obs[j] ? d.value(i, j) : 0.0;
    }
    out[i] = predict_row(x, obs);
  }
  return out;
}

namespace {

void dump_node(const Tree& tree, int id, int indent, std::ostringstream& out) {
  const auto& node = tree.nodes[id];
  for (int i = 0; i < indent; ++i) out << "  ";
  if (node.is_leaf()) {
    out << "leaf pred=" << node.prediction << " n=" << node.count
        << " w=" << node.weight << "\n";
    return;
  }
  out << "x" << node.split.var << " <= " << node.split.threshold
      << " n=" << node.count << " pred=" << node.prediction;
  if (!node.split.surrogates.empty()) {
    out << " surrogates=[";
    for (std::size_t s = 0; s < node.split.surrogates.size(); ++s) {
      const auto& sr = node.split.surrogates[s];
      if (s) out << ", ";
      out << "x" << sr.var << (sr.low_goes_left ? "<=" : ">") << sr.threshold << " ("
          << sr.agreement << ")";
    }
    out << "]";
  }
  out << "\n";
  dump_node(tree, node.left, indent + 1, out);
  dump_node(tree, node.right, indent + 1, out);
  if (node.miss >= 0) {
    for (int i = 0; i < indent + 1; ++i) out << "  ";
    out << "(missing)\n";
    dump_node(tree, node.miss, indent + 2, out);
  }
}

}  // namespace

std::string Tree::dump() const {
  std::ostringstream out;
  dump_node(*this, 0, 0, out);
  return out.str();
}

}  // namespace pscart
