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

#include "pscart/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pscart/stats.hpp"

namespace pscart {

namespace {

// Covariate columns pre-extracted and pre-sorted once per fit; every stage
// and every balance evaluation walks these fixed orders.
struct BoostData {
  std::size_t n = 0;
  std::vector<int> feature_cols;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<std::uint8_t>> ob;
  std::vector<std::vector<std::uint32_t>> sorted_obs;
  std::vector<std::vector<std::uint32_t>> missing;
};

BoostData build_boost_data(const Dataset& d, std::span<const std::size_t> features) {
  BoostData bd;
  bd.n = d.n_rows();
  for (auto j : features) bd.feature_cols.push_back(static_cast<int>(j));
  const std::size_t p = bd.feature_cols.size();
  bd.x.resize(p);
  bd.ob.resize(p);
  bd.sorted_obs.resize(p);
  bd.missing.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    const auto col = static_cast<std::size_t>(bd.feature_cols[k]);
    const auto vals = d.column_values(col);
    const auto obs = d.column_observed(col);
    bd.x[k].assign(vals.begin(), vals.end());
    bd.ob[k].assign(obs.begin(), obs.end());
    for (std::uint32_t i = 0; i < bd.n; ++i) {
      (obs[i] ? bd.sorted_obs[k] : bd.missing[k]).push_back(i);
    }
    std::sort(bd.sorted_obs[k].begin(), bd.sorted_obs[k].end(),
              [&](std::uint32_t a, std::uint32_t b) { return bd.x[k][a] < bd.x[k][b]; });
  }
  return bd;
}

struct StageNode {
  double prediction = 0.0;
  int count = 0;
  int feature = -1;  // index into bd.feature_cols
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  int miss = -1;
  int parent = -1;
  bool is_leaf() const { return left < 0; }
};

// One depth-limited branch-mode regression tree on the rows flagged
// in_sample, grown level-wise over the pre-sorted feature orders.
std::vector<StageNode> grow_stage_tree(const BoostData& bd,
                                       std::span<const std::uint8_t> in_sample,
                                       std::span<const double> target,
                                       std::vector<std::int32_t>& node_of, int max_depth,
                                       int min_leaf) {
  const std::size_t p = bd.feature_cols.size();
  std::vector<StageNode> nodes(1);
  for (std::size_t i = 0; i < bd.n; ++i) node_of[i] = in_sample[i] ? 0 : -1;

  double root_impurity = 0.0;
  int level_begin = 0;
  int level_end = 1;

  for (int level = 0; level < max_depth && level_begin < level_end; ++level) {
    const int width = level_end - level_begin;
    // Node totals over the subsample.
    std::vector<int> cnt(width, 0);
    std::vector<double> sum(width, 0.0);
    std::vector<double> ss(width, 0.0);
    for (std::size_t i = 0; i < bd.n; ++i) {
      const int id = node_of[i];
      if (id < level_begin) continue;
      const int s = id - level_begin;
      cnt[s] += 1;
      sum[s] += target[i];
      ss[s] += target[i] * target[i];
    }
    if (level == 0) {
      root_impurity = cnt[0] > 0 ? ss[0] - sum[0] * sum[0] / cnt[0] : 0.0;
    }
    const double gate = 1e-12 * root_impurity;

    struct Best {
      double gain = 0.0;
      int feature = -1;
      double threshold = 0.0;
    };
    std::vector<Best> best(width);
    std::vector<std::uint8_t> eligible(width, 0);
    for (int s = 0; s < width; ++s) {
      const double impurity = cnt[s] > 0 ? ss[s] - sum[s] * sum[s] / cnt[s] : 0.0;
      eligible[s] = cnt[s] >= 2 * min_leaf && impurity > 1e-12 * std::max(cnt[s], 1);
    }

    // Scan state per (node, feature pass).
    std::vector<int> tot_cnt(width);
    std::vector<double> tot_sum(width);
    std::vector<int> left_cnt(width);
    std::vector<double> left_sum(width);
    std::vector<double> prev_val(width);
    std::vector<std::uint8_t> has_prev(width);

    for (std::size_t k = 0; k < p; ++k) {
      std::fill(tot_cnt.begin(), tot_cnt.end(), 0);
      std::fill(tot_sum.begin(), tot_sum.end(), 0.0);
      for (const auto i : bd.sorted_obs[k]) {
        const int id = node_of[i];
        if (id < level_begin) continue;
        const int s = id - level_begin;
        if (!eligible[s]) continue;
        tot_cnt[s] += 1;
        tot_sum[s] += target[i];
      }
      std::fill(left_cnt.begin(), left_cnt.end(), 0);
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(has_prev.begin(), has_prev.end(), std::uint8_t{0});
      for (const auto i : bd.sorted_obs[k]) {
        const int id = node_of[i];
        if (id < level_begin) continue;
        const int s = id - level_begin;
        if (!eligible[s] || tot_cnt[s] < 2 * min_leaf) continue;
        const double v = bd.x[k][i];
        if (has_prev[s] && v > prev_val[s] && left_cnt[s] >= min_leaf &&
            tot_cnt[s] - left_cnt[s] >= min_leaf) {
          const double nl = left_cnt[s];
          const double nr = tot_cnt[s] - left_cnt[s];
          const double sl = left_sum[s];
          const double sr = tot_sum[s] - left_sum[s];
          const double gain =
              sl * sl / nl + sr * sr / nr - tot_sum[s] * tot_sum[s] / tot_cnt[s];
          if (gain > best[s].gain && gain > gate) {
            best[s] = {gain, static_cast<int>(k), 0.5 * (prev_val[s] + v)};
          }
        }
        left_cnt[s] += 1;
        left_sum[s] += target[i];
        prev_val[s] = v;
        has_prev[s] = 1;
      }
    }

    // Materialize the chosen splits.
    const int next_begin = static_cast<int>(nodes.size());
    for (int s = 0; s < width; ++s) {
      if (best[s].feature < 0) continue;
      const int id = level_begin + s;
      const auto k = static_cast<std::size_t>(best[s].feature);
      int miss_cnt = 0;
      for (const auto i : bd.missing[k]) {
        if (node_of[i] == id) ++miss_cnt;
      }
      int n_left = 0;
      for (const auto i : bd.sorted_obs[k]) {
        if (node_of[i] == id && bd.x[k][i] <= best[s].threshold) ++n_left;
      }
      const int n_obs = tot_cnt[s];
      nodes[id].feature = best[s].feature;
      nodes[id].threshold = best[s].threshold;
      nodes[id].default_left = n_left >= n_obs - n_left;
      nodes[id].left = static_cast<int>(nodes.size());
      nodes.push_back({});
      nodes.back().parent = id;
      nodes[id].right = static_cast<int>(nodes.size());
      nodes.push_back({});
      nodes.back().parent = id;
      if (miss_cnt > 0) {
        nodes[id].miss = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes.back().parent = id;
      }
    }
    const int next_end = static_cast<int>(nodes.size());
    if (next_begin == next_end) break;

    // Route subsample rows of split nodes to their children.
    for (std::size_t i = 0; i < bd.n; ++i) {
      const int id = node_of[i];
      if (id < level_begin || id >= level_end) continue;
      const auto& node = nodes[id];
      if (node.is_leaf()) continue;
      const auto k = static_cast<std::size_t>(node.feature);
      if (bd.ob[k][i]) {
        node_of[i] = bd.x[k][i] <= node.threshold ? node.left : node.right;
      } else {
        node_of[i] = node.miss;
      }
    }
    level_begin = next_begin;
    level_end = next_end;
  }

  // Node statistics: every node accumulates the subsample rows under it.
  std::vector<double> wsum(nodes.size(), 0.0);
  for (std::size_t i = 0; i < bd.n; ++i) {
    int id = node_of[i];
    while (id >= 0) {
      nodes[id].count += 1;
      wsum[id] += target[i];
      id = nodes[id].parent;
    }
  }
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    nodes[id].prediction = nodes[id].count > 0 ? wsum[id] / nodes[id].count : 0.0;
  }
  return nodes;
}

Tree stage_to_tree(const BoostData& bd, const std::vector<StageNode>& nodes,
                   std::size_t schema_cols) {
  Tree tree;
  tree.mode = MissingMode::branch;
  tree.schema_cols = schema_cols;
  tree.nodes.resize(nodes.size());
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    auto& out = tree.nodes[id];
    const auto& in = nodes[id];
    out.prediction = in.prediction;
    out.count = in.count;
    out.weight = in.count;
    out.left = in.left;
    out.right = in.right;
    out.miss = in.miss;
    if (!in.is_leaf()) {
      out.split.var = bd.feature_cols[static_cast<std::size_t>(in.feature)];
      out.split.threshold = in.threshold;
      out.split.default_left = in.default_left;
    }
  }
  return tree;
}

// Route any row (not just subsample) through the stage structure; missing
// values go to the missing child, or stop at the node when none was grown.
int route_stage(const BoostData& bd, const std::vector<StageNode>& nodes,
                std::size_t i) {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    const auto k = static_cast<std::size_t>(node.feature);
    if (bd.ob[k][i]) {
      id = bd.x[k][i] <= node.threshold ? node.left : node.right;
    } else if (node.miss >= 0) {
      id = node.miss;
    } else {
      return id;
    }
  }
  return id;
}

// Weighted KS over one pre-sorted covariate order: exposed rows carry unit
// weight, unexposed rows carry their odds weight.
double ks_one_covariate(const std::vector<std::uint32_t>& sorted_obs,
                        const std::vector<double>& values,
                        std::span<const double> exposure,
                        std::span<const double> unexposed_weight) {
  double tot_e = 0.0;
  double tot_u = 0.0;
  for (const auto i : sorted_obs) {
    if (exposure[i] == 1.0) {
      tot_e += 1.0;
    } else {
      tot_u += unexposed_weight[i];
    }
  }
  if (tot_e <= 0.0 || tot_u <= 0.0) return 1.0;
  double fe = 0.0;
  double fu = 0.0;
  double d = 0.0;
  for (std::size_t m = 0; m < sorted_obs.size(); ++m) {
    const auto i = sorted_obs[m];
    if (exposure[i] == 1.0) {
      fe += 1.0;
    } else {
      fu += unexposed_weight[i];
    }
    const bool boundary =
        m + 1 == sorted_obs.size() || values[sorted_obs[m + 1]] != values[i];
    if (boundary) d = std::max(d, std::abs(fe / tot_e - fu / tot_u));
  }
  return d;
}

double mean_ks_over(const BoostData& bd, std::span<const double> exposure,
                    std::span<const double> scores) {
  std::vector<double> uw(bd.n, 0.0);
  for (std::size_t i = 0; i < bd.n; ++i) {
    if (exposure[i] == 0.0) uw[i] = scores[i] / (1.0 - scores[i]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < bd.feature_cols.size(); ++k) {
    total += ks_one_covariate(bd.sorted_obs[k], bd.x[k], exposure, uw);
  }
  return total / static_cast<double>(bd.feature_cols.size());
}

}  // namespace

double bernoulli_deviance(std::span<const double> a, std::span<const double> f) {
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // -2 [a f - log(1+e^f)], stable for both signs of f.
    const double log1pef = f[i] > 0.0 ? f[i] + std::log1p(std::exp(-f[i]))
                                      : std::log1p(std::exp(f[i]));
    dev += -2.0 * (a[i] * f[i] - log1pef);
  }
  return dev;
}

double mean_ks_balance(const Dataset& d, std::span<const double> scores) {
  if (scores.size() != d.n_rows()) {
    throw std::invalid_argument("mean_ks_balance: score/row count mismatch");
  }
  for (double s : scores) {
    if (!(s > 0.0 && s < 1.0)) {
      throw std::invalid_argument("mean_ks_balance: scores must lie in (0,1)");
    }
  }
  const auto covars = d.covariate_indices();
  const auto bd = build_boost_data(d, covars);
  const auto a_col = d.column_values(d.exposure_index());
  std::size_t n1 = 0;
  for (double a : a_col) n1 += (a == 1.0);
  if (n1 == 0 || n1 == d.n_rows()) {
    throw std::invalid_argument("mean_ks_balance: an exposure group is empty");
  }
  return mean_ks_over(bd, a_col, scores);
}

BoostedModel fit_boosted(const Dataset& d, std::size_t exposure_col,
                         const BoostConfig& cfg, RngStream& rng) {
  if (cfg.iterations < 0 || cfg.shrinkage <= 0.0) {
    throw std::invalid_argument("fit_boosted: bad iterations/shrinkage");
  }
  if (!d.column_complete(exposure_col)) {
    throw std::invalid_argument("fit_boosted: exposure must be fully observed");
  }
  const auto a_col = d.column_values(exposure_col);
  const std::size_t n = d.n_rows();
  std::size_t n1 = 0;
  for (double a : a_col) {
    if (a != 0.0 && a != 1.0) {
      throw std::invalid_argument("fit_boosted: exposure must be binary");
    }
    n1 += (a == 1.0);
  }
  if (n1 == 0 || n1 == n) {
    throw std::invalid_argument("fit_boosted: exposure is degenerate");
  }

  const auto covars = d.covariate_indices();
  const auto bd = build_boost_data(d, covars);

  BoostedModel model;
  model.schema_cols = d.n_cols();
  model.shrinkage = cfg.shrinkage;
  model.f0 = logit(static_cast<double>(n1) / static_cast<double>(n));

  std::vector<double> f(n, model.f0);
  std::vector<double> prob(n, static_cast<double>(n1) / static_cast<double>(n));
  std::vector<double> resid(n);
  std::vector<std::uint8_t> in_sample(n, 1);
  std::vector<std::int32_t> node_of(n, -1);
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  const auto bag_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.subsample * n));

  double best_ks = std::numeric_limits<double>::infinity();
  std::vector<double> best_f = f;

  auto evaluate = [&](int iteration) {
    const double ks = mean_ks_over(bd, a_col, prob);
    model.ks_trace.push_back({iteration, ks});
    if (ks < best_ks) {
      best_ks = ks;
      best_f = f;
      model.selected_iteration = iteration;
    }
  };

  evaluate(0);
  if (cfg.record_deviance) model.deviance_trace.push_back(bernoulli_deviance(a_col, f));

  for (int it = 1; it <= cfg.iterations; ++it) {
    // Stage subsample (without replacement) and working residuals.
    if (bag_size < n) {
      std::fill(in_sample.begin(), in_sample.end(), std::uint8_t{0});
      for (std::size_t j = 0; j < bag_size; ++j) {
        const auto r = j + rng.index_below(n - j);
        std::swap(pool[j], pool[r]);
        in_sample[pool[j]] = 1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) resid[i] = a_col[i] - prob[i];

    auto nodes = grow_stage_tree(bd, in_sample, resid, node_of, cfg.depth, cfg.min_leaf);

    // Newton increments per node over the subsample, clamped.
    {
      std::vector<double> num(nodes.size(), 0.0);
      std::vector<double> den(nodes.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        int id = node_of[i];
        if (id < 0) continue;
        const double h = prob[i] * (1.0 - prob[i]);
        while (id >= 0) {
          num[id] += resid[i];
          den[id] += h;
          id = nodes[id].parent;
        }
      }
      for (std::size_t id = 0; id < nodes.size(); ++id) {
        const double step = num[id] / std::max(den[id], 1e-12);
        nodes[id].prediction = std::clamp(step, -cfg.max_increment, cfg.max_increment);
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      f[i] += cfg.shrinkage * nodes[route_stage(bd, nodes, i)].prediction;
      prob[i] = expit(f[i]);
    }

    model.stages.push_back(stage_to_tree(bd, nodes, d.n_cols()));
    if (cfg.record_deviance) model.deviance_trace.push_back(bernoulli_deviance(a_col, f));
    if (it % cfg.eval_stride == 0 || it == cfg.iterations) evaluate(it);
  }

  model.training_scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) model.training_scores[i] = expit(best_f[i]);
  return model;
}

std::vector<double> predict_ps_boosted(const BoostedModel& m, const Dataset& d) {
  if (d.n_cols() != m.schema_cols) {
    throw std::invalid_argument("predict_ps_boosted: schema mismatch");
  }
  const std::size_t n = d.n_rows();
  std::vector<double> out(n);
  std::vector<double> x(d.n_cols());
  std::vector<std::uint8_t> obs(d.n_cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      obs[j] = d.observed(i, j) ? 1 : 0;
      x[j] = obs[j] ? d.value(i, j) : 0.0;
    }
    double f = m.f0;
    for (int k = 0; k < m.selected_iteration; ++k) {
      f += m.shrinkage * m.stages[static_cast<std::size_t>(k)].predict_row(x, obs);
    }
    out[i] = expit(f);
  }
  return out;
}

namespace detail {

Tree fit_stage_regression_tree(const Dataset& d, std::span<const double> target,
                               std::span<const std::size_t> features, int depth,
                               int min_leaf) {
  const auto bd = build_boost_data(d, features);
  if (target.size() != bd.n) {
    throw std::invalid_argument("fit_stage_regression_tree: target size mismatch");
  }
  std::vector<std::uint8_t> in_sample(bd.n, 1);
  std::vector<std::int32_t> node_of(bd.n, -1);
  const auto nodes = grow_stage_tree(bd, in_sample, target, node_of, depth, min_leaf);
  return stage_to_tree(bd, nodes, d.n_cols());
}

}  // namespace detail

}  // namespace pscart
