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

#include "pscart/stats.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pscart {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double empirical_sd(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("empirical_sd: need >= 2 obs");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double weighted_mean(std::span<const double> x, std::span<const double> w) {
  if (x.size() != w.size() || x.empty()) {
    throw std::invalid_argument("weighted_mean: bad input sizes");
  }
  double sw = 0.0;
  double sxw = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] < 0.0) throw std::invalid_argument("weighted_mean: negative weight");
    sw += w[i];
    sxw += w[i] * x[i];
  }
  if (sw <= 0.0) throw std::invalid_argument("weighted_mean: zero total weight");
  return sxw / sw;
}

double weighted_sd(std::span<const double> x, std::span<const double> w) {
  if (x.size() < 2) throw std::invalid_argument("weighted_sd: need >= 2 obs");
  const double m = weighted_mean(x, w);
  double sw = 0.0;
  double sw2 = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sw2 += w[i] * w[i];
    ss += w[i] * (x[i] - m) * (x[i] - m);
  }
  const double divisor = sw - sw2 / sw;
  if (divisor <= 0.0) throw std::invalid_argument("weighted_sd: degenerate weights");
  return std::sqrt(ss / divisor);
}

double ks_statistic(std::span<const double> x, std::span<const double> xw,
                    std::span<const double> y, std::span<const double> yw) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("ks_statistic: empty sample");
  }
  if (x.size() != xw.size() || y.size() != yw.size()) {
    throw std::invalid_argument("ks_statistic: value/weight size mismatch");
  }
  auto order_of = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
  };
  const auto ox = order_of(x);
  const auto oy = order_of(y);

  double wx_total = 0.0;
  double wy_total = 0.0;
  for (double w : xw) {
    if (w < 0.0) throw std::invalid_argument("ks_statistic: negative weight");
    wx_total += w;
  }
  for (double w : yw) {
    if (w < 0.0) throw std::invalid_argument("ks_statistic: negative weight");
    wy_total += w;
  }
  if (wx_total <= 0.0 || wy_total <= 0.0) {
    throw std::invalid_argument("ks_statistic: zero total weight");
  }

  // Merge-walk the two sorted samples; at each distinct value absorb the
  // full mass tied at that value from both sides before comparing CDFs.
  double fx = 0.0;
  double fy = 0.0;
  double d = 0.0;
  std::size_t ix = 0;
  std::size_t iy = 0;
  while (ix < ox.size() || iy < oy.size()) {
    double t;
    if (ix < ox.size() && iy < oy.size()) {
      t = std::min(x[ox[ix]], y[oy[iy]]);
    } else if (ix < ox.size()) {
      t = x[ox[ix]];
    } else {
      t = y[oy[iy]];
    }
    while (ix < ox.size() && x[ox[ix]] == t) fx += xw[ox[ix++]];
    while (iy < oy.size() && y[oy[iy]] == t) fy += yw[oy[iy++]];
    d = std::max(d, std::abs(fx / wx_total - fy / wy_total));
  }
  return d;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  }
  // Crude logistic-style start, then safeguarded Newton on
  // Phi(x) = erfc(-x/sqrt(2))/2, which cmath evaluates to near full precision.
  double x = 0.0;
  if (p != 0.5) {
    const double t = std::sqrt(-2.0 * std::log(std::min(p, 1.0 - p)));
    x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    if (p < 0.5) x = -x;
  }
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  for (int it = 0; it < 60; ++it) {
    const double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
    const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    if (pdf <= 0.0) break;
    const double step = (cdf - p) / pdf;
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("incomplete_beta: a,b must be > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("student_t_cdf: df must be > 0");
  if (std::isinf(df)) return 0.5 * std::erfc(-t * 0.7071067811865475244);
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("student_t_quantile: p must be in (0,1)");
  }
  if (df <= 0.0) throw std::invalid_argument("student_t_quantile: df must be > 0");
  if (std::isinf(df) || df > 1e8) return normal_quantile(p);
  if (p == 0.5) return 0.0;

  // Bisection bracket, then Newton polish with the t density.
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = student_t_cdf(x, df) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double ln_pdf = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                          0.5 * std::log(df * 3.14159265358979323846) -
                          0.5 * (df + 1.0) * std::log1p(x * x / df);
    const double pdf = std::exp(ln_pdf);
    double next = x - f / pdf;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-14 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace pscart
