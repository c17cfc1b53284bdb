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
#include <numbers>
#include <vector>

#include "pscart/mvn.hpp"
#include "pscart/rng.hpp"
#include "pscart/stats.hpp"

using namespace pscart;

namespace {

// Brute-force weighted two-sample KS: evaluate both CDFs on the pooled grid.
double ks_brute_force(const std::vector<double>& x, const std::vector<double>& xw,
                      const std::vector<double>& y, const std::vector<double>& yw) {
  std::vector<double> grid;
  grid.insert(grid.end(), x.begin(), x.end());
  grid.insert(grid.end(), y.begin(), y.end());
  std::sort(grid.begin(), grid.end());
  auto cdf = [](const std::vector<double>& v, const std::vector<double>& w, double t) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      den += w[i];
      if (v[i] <= t) num += w[i];
    }
    return num / den;
  };
  double d = 0.0;
  for (double t : grid) d = std::max(d, std::abs(cdf(x, xw, t) - cdf(y, yw, t)));
  return d;
}

}  // namespace

TEST_CASE("expit basics") {
  CHECK(expit(0.0) == 0.5);
  CHECK(expit(-1.0) == doctest::Approx(0.2689414213699951).epsilon(1e-14));
  RngStream rng(4, 0, 0);
  for (int i = 0; i < 200; ++i) {
    const double x = (rng.uniform01() - 0.5) * 60.0;
    CHECK(expit(x) + expit(-x) == doctest::Approx(1.0).epsilon(1e-14));
    // Round trip: tight where the probability representation allows it; for
    // larger |x| the best achievable error grows like eps * e^|x| because
    // 1-p collapses toward the spacing of doubles near 1.
    const double tol =
        std::abs(x) <= 9.0 ? 1e-12 : 4.0e-16 * std::exp(std::abs(x));
    CHECK(std::abs(logit(expit(x)) - x) <= tol);
  }
}

TEST_CASE("weighted and unweighted moments") {
  const std::vector<double> zero_one = {0.0, 1.0};
  const std::vector<double> unit = {1.0, 1.0};
  CHECK(weighted_mean(zero_one, unit) == 0.5);
  CHECK(empirical_sd(zero_one) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(weighted_sd(zero_one, unit) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  const std::vector<double> constant = {3.0, 3.0, 3.0};
  CHECK(empirical_sd(constant) == 0.0);

  RngStream rng(5, 0, 0);
  std::vector<double> x(13);
  for (auto& v : x) v = rng.normal();
  const std::vector<double> equal(x.size(), 2.5);
  CHECK(weighted_mean(x, equal) == doctest::Approx(mean(x)).epsilon(1e-13));
  CHECK(weighted_sd(x, equal) == doctest::Approx(empirical_sd(x)).epsilon(1e-12));

  CHECK_THROWS(empirical_sd(std::vector<double>{1.0}));
}

TEST_CASE("ks statistic matches the brute-force CDF walk") {
  SUBCASE("identical samples") {
    const std::vector<double> x = {1.0, 2.0, 3.0};
    const std::vector<double> w = {1.0, 1.0, 1.0};
    CHECK(ks_statistic(x, w, x, w) == 0.0);
  }
  SUBCASE("disjoint supports") {
    const std::vector<double> x = {0.0, 1.0};
    const std::vector<double> y = {5.0, 6.0};
    const std::vector<double> w = {1.0, 1.0};
    CHECK(ks_statistic(x, w, y, w) == 1.0);
  }
  SUBCASE("hand-enumerated two-point example") {
    const std::vector<double> x = {1.0, 2.0};
    const std::vector<double> y = {1.0, 3.0};
    const std::vector<double> w = {1.0, 1.0};
    const double expected = ks_brute_force(x, w, y, w);
    CHECK(expected == 0.5);
    CHECK(ks_statistic(x, w, y, w) == doctest::Approx(expected).epsilon(1e-15));
  }
  SUBCASE("random weighted samples agree with the oracle") {
    RngStream rng(9, 0, 0);
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> x(8), xw(8), y(11), yw(11);
      for (auto& v : x) v = rng.normal();
      for (auto& v : y) v = rng.normal() + 0.3;
      for (auto& v : xw) v = 0.1 + rng.uniform01();
      for (auto& v : yw) v = 0.1 + rng.uniform01();
      // Occasional exact ties across the samples.
      y[0] = x[0];
      const double got = ks_statistic(x, xw, y, yw);
      CHECK(got == doctest::Approx(ks_brute_force(x, xw, y, yw)).epsilon(1e-12));
      CHECK(got == doctest::Approx(ks_statistic(y, yw, x, xw)).epsilon(1e-15));
      // Invariance under a common strictly monotone transform.
      auto ex = x;
      auto ey = y;
      for (auto& v : ex) v = std::exp(v);
      for (auto& v : ey) v = std::exp(v);
      CHECK(ks_statistic(ex, xw, ey, yw) == doctest::Approx(got).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    const std::vector<double> x = {1.0};
    const std::vector<double> w = {1.0};
    CHECK_THROWS(ks_statistic({}, {}, x, w));
  }
}

TEST_CASE("normal quantile against reference values") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-12));
  CHECK(normal_quantile(0.2) == doctest::Approx(-normal_quantile(0.8)).epsilon(1e-13));
}

TEST_CASE("incomplete beta closed forms") {
  RngStream rng(3, 0, 0);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform01();
    const double a = 0.5 + 4.0 * rng.uniform01();
    const double b = 0.5 + 4.0 * rng.uniform01();
    CHECK(incomplete_beta(a, 1.0, x) == doctest::Approx(std::pow(x, a)).epsilon(1e-10));
    CHECK(incomplete_beta(1.0, b, x) ==
          doctest::Approx(1.0 - std::pow(1.0 - x, b)).epsilon(1e-10));
  }
}

TEST_CASE("student t quantile against closed forms and tables") {
  // df = 1: quantile(p) = tan(pi (p - 1/2)); df = 2 has a closed form too.
  const double p = 0.95;
  CHECK(student_t_quantile(p, 1.0) ==
        doctest::Approx(std::tan(std::numbers::pi * (p - 0.5))).epsilon(1e-10));
  const double alpha = p - 0.5;
  const double df2 = 2.0 * std::numbers::sqrt2 * alpha / std::sqrt(1.0 - 4.0 * alpha * alpha);
  CHECK(student_t_quantile(p, 2.0) == doctest::Approx(df2).epsilon(1e-10));
  CHECK(student_t_quantile(0.95, 5.0) == doctest::Approx(2.015048373).epsilon(1e-8));
  CHECK(student_t_quantile(0.95, 10.0) == doctest::Approx(1.812461123).epsilon(1e-8));
  // Monotone in df toward the normal quantile.
  CHECK(student_t_quantile(0.95, 5.4444) < student_t_quantile(0.95, 5.0));
  CHECK(student_t_quantile(0.95, 5.4444) > student_t_quantile(0.95, 6.0));
  CHECK(student_t_quantile(0.95, 1e9) ==
        doctest::Approx(normal_quantile(0.95)).epsilon(1e-9));
  // Round trip through the CDF.
  for (double df : {1.5, 3.0, 7.7, 24.0}) {
    const double q = student_t_quantile(0.9, df);
    CHECK(student_t_cdf(q, df) == doctest::Approx(0.9).epsilon(1e-12));
  }
}

TEST_CASE("rng streams are deterministic and key-sensitive") {
  RngStream a(42, 3, 7);
  RngStream b(42, 3, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 3, 8);
  bool any_different = false;
  RngStream a2(42, 3, 7);
  for (int i = 0; i < 10; ++i) any_different |= a2.next_u64() != c.next_u64();
  CHECK(any_different);

  RngStream u(1, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform01();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    const double o = u.open_uniform01();
    CHECK(o > 0.0);
    CHECK(o < 1.0);
  }
}

TEST_CASE("gamma and chi-square draws have the right moments") {
  RngStream rng(21, 0, 0);
  for (double shape : {0.7, 2.5, 9.0}) {
    double sum = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) sum += rng.gamma(shape);
    CHECK(sum / n == doctest::Approx(shape).epsilon(0.05));
  }
  double sum = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) sum += rng.chisq(7.0);
  CHECK(sum / n == doctest::Approx(7.0).epsilon(0.05));
}

TEST_CASE("mvn sampling hits the requested correlations") {
  SUBCASE("identity covariance gives near-zero correlations") {
    CovarianceSpec cov;
    cov.dim = 3;
    RngStream rng(17, 0, 0);
    const std::size_t n = 20000;
    const auto cols = sample_mvn(n, cov, rng);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cols[a][i] * cols[b][i];
        CHECK(std::abs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
      }
    }
  }
  SUBCASE("fixed seed reproduces bit-identical draws") {
    CovarianceSpec cov;
    cov.dim = 2;
    cov.off_diagonal = {{0, 1, 0.5}};
    RngStream r1(5, 1, 2);
    RngStream r2(5, 1, 2);
    const auto c1 = sample_mvn(50, cov, r1);
    const auto c2 = sample_mvn(50, cov, r2);
    CHECK(c1 == c2);
  }
  SUBCASE("non positive definite input fails") {
    CovarianceSpec cov;
    cov.dim = 2;
    cov.off_diagonal = {{0, 1, 1.5}};
    RngStream rng(1, 0, 0);
    CHECK_THROWS(sample_mvn(10, cov, rng));
  }
}
