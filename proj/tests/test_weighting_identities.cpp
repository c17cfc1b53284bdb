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

#include <cmath>

#include "pscart/discrete_scm.hpp"
#include "pscart/rng.hpp"

using namespace pscart;

TEST_CASE("odds-weighting identities hold on random exchangeable joints") {
  for (int seed = 0; seed < 100; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), 0, purpose::generic);
    const auto joint = random_exchangeable_joint(rng);
    const auto report = verify_phi_identities(joint);
    CHECK(report.positivity_ok);
    CHECK(report.exchangeable_given_conditioner);
    CHECK(report.pass(1e-12));
  }
}

TEST_CASE("constant score reduces balance to raw distribution equality") {
  // One arm-assignment probability for every w: no confounding at all.
  DiscreteJoint joint;
  const double pw[2] = {0.3, 0.7};
  const double e = 0.4;
  for (int w = 0; w < 2; ++w) {
    for (int a = 0; a < 2; ++a) {
      for (int y = 0; y < 2; ++y) {
        joint.atoms.push_back(
            {w, a, y, y, 1, pw[w] * (a == 1 ? e : 1 - e) * (y == 1 ? 0.2 : 0.8)});
      }
    }
  }
  const auto report = verify_phi_identities(joint);
  CHECK(report.pass(1e-12));
  // Pr(W=w|A=0) already equals Pr(W=w|A=1) before weighting.
  double p_w1_a0 = 0.0, p_a0 = 0.0, p_w1_a1 = 0.0, p_a1 = 0.0;
  for (const auto& atom : joint.atoms) {
    if (atom.a == 0) {
      p_a0 += atom.p;
      if (atom.w == 1) p_w1_a0 += atom.p;
    } else {
      p_a1 += atom.p;
      if (atom.w == 1) p_w1_a1 += atom.p;
    }
  }
  CHECK(p_w1_a0 / p_a0 == doctest::Approx(p_w1_a1 / p_a1).epsilon(1e-12));
}

TEST_CASE("non-exchangeable joints keep identities i-iii but break iv") {
  int broken = 0;
  for (int seed = 0; seed < 50; ++seed) {
    RngStream rng(1000 + static_cast<std::uint64_t>(seed), 0, purpose::generic);
    const auto joint = random_joint(rng);
    const auto report = verify_phi_identities(joint);
    CHECK(report.positivity_ok);
    CHECK(report.dev_exposed_expectation <= 1e-12);
    CHECK(report.dev_unexposed_expectation <= 1e-12);
    CHECK(report.dev_balance <= 1e-12);
    if (!report.exchangeable_given_conditioner && report.dev_counterfactual > 1e-9) {
      ++broken;
    }
  }
  CHECK(broken > 40);  // generic joints are not exchangeable
}

TEST_CASE("generalized-score identities mirror the usual ones without masking") {
  for (int seed = 0; seed < 30; ++seed) {
    RngStream rng(2000 + static_cast<std::uint64_t>(seed), 0, purpose::generic);
    auto joint = random_exchangeable_joint(rng);
    for (auto& atom : joint.atoms) atom.r = 1;  // nothing masked: V = W
    // Merging the r-split atoms leaves the law unchanged, so both checks
    // see the same distribution.
    const auto phi = verify_phi_identities(joint);
    const auto gamma = verify_gamma_identities(joint);
    CHECK(phi.pass(1e-12));
    CHECK(gamma.pass(1e-12));
    CHECK(gamma.dev_balance == doctest::Approx(phi.dev_balance).epsilon(1e-13));
  }
}

TEST_CASE("generalized-score identities hold on random masked joints") {
  for (int seed = 0; seed < 100; ++seed) {
    RngStream rng(3000 + static_cast<std::uint64_t>(seed), 0, purpose::generic);
    const auto joint = random_joint(rng);
    const auto report = verify_gamma_identities(joint);
    CHECK(report.positivity_ok);
    CHECK(report.dev_exposed_expectation <= 1e-12);
    CHECK(report.dev_unexposed_expectation <= 1e-12);
    CHECK(report.dev_balance <= 1e-12);
  }
  for (int seed = 0; seed < 50; ++seed) {
    RngStream rng(4000 + static_cast<std::uint64_t>(seed), 0, purpose::generic);
    const auto joint = random_v_exchangeable_joint(rng);
    const auto report = verify_gamma_identities(joint);
    CHECK(report.exchangeable_given_conditioner);
    CHECK(report.pass(1e-12));
  }
}

TEST_CASE("outcome-dependent masking example: balance without exchangeability") {
  const auto joint = masked_noise_example_joint();
  joint.validate();
  const auto gamma = verify_gamma_identities(joint);
  // V is balanced by the generalized-score weights...
  CHECK(gamma.positivity_ok);
  CHECK(gamma.dev_exposed_expectation <= 1e-12);
  CHECK(gamma.dev_unexposed_expectation <= 1e-12);
  CHECK(gamma.dev_balance <= 1e-12);
  // ...but the counterfactual laws do not line up.
  CHECK_FALSE(gamma.exchangeable_given_conditioner);
  CHECK(gamma.dev_counterfactual > 1e-3);
}

TEST_CASE("masked-noise conditional law: exact 2/3 and 3/4") {
  const auto report = check_masked_noise_example();
  CHECK(std::abs(report.eps_le_half_a0 - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(report.eps_le_half_a1 - 3.0 / 4.0) <= 1e-12);
  CHECK(std::abs(report.e_star_masked - 4.0 / 7.0) <= 1e-12);
  CHECK(std::abs(report.e_star_observed - 16.0 / 33.0) <= 1e-12);
  CHECK(report.w_balance_dev <= 1e-12);
  CHECK(report.counterfactual_dependence);
}

TEST_CASE("masked-noise conditional law agrees with a large simulation") {
  RngStream rng(99, 0, purpose::generic);
  const std::size_t n = 10000000;
  double count_le_half[2] = {0, 0};
  double count_masked[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int a = rng.bernoulli(0.5) ? 1 : 0;
    const double eps = rng.open_uniform01();
    const int y = eps < (1.0 + a) / 10.0 ? 1 : 0;
    const bool masked = rng.bernoulli(0.1 + 0.5 * y);
    if (!masked) continue;
    count_masked[a] += 1.0;
    if (eps <= 0.5) count_le_half[a] += 1.0;
  }
  const auto exact = check_masked_noise_example();
  for (int a = 0; a < 2; ++a) {
    const double p_hat = count_le_half[a] / count_masked[a];
    const double expected = a == 0 ? exact.eps_le_half_a0 : exact.eps_le_half_a1;
    const double se = std::sqrt(expected * (1.0 - expected) / count_masked[a]);
    CHECK(std::abs(p_hat - expected) < 3.0 * se);
  }
}

TEST_CASE("pre-exposure masking example: scores and arm dependence") {
  const auto report = check_pre_exposure_masking_example();
  CHECK(std::abs(report.e_w[0] - 0.38) <= 1e-12);
  CHECK(std::abs(report.e_w[1] - 0.38) <= 1e-12);
  CHECK(std::abs(report.e_star_masked - 0.20) <= 1e-12);
  CHECK(std::abs(report.e_star_observed - 0.40) <= 1e-12);
  // Exchangeability within each generalized-score stratum.
  CHECK(std::abs(report.y0_given_estar_masked[0] - 0.10) <= 1e-12);
  CHECK(std::abs(report.y0_given_estar_masked[1] - 0.10) <= 1e-12);
  CHECK(std::abs(report.y0_given_estar_observed[0] - report.y0_given_estar_observed[1]) <=
        1e-12);
  // Conditioning on the constant usual score leaves arm dependence behind.
  CHECK(std::abs(report.y0_given_ew[0] - 0.170 / 0.62) <= 1e-12);
  CHECK(std::abs(report.y0_given_ew[1] - 0.110 / 0.38) <= 1e-12);
  CHECK(std::abs(report.y0_given_ew[0] - report.y0_given_ew_closed_form[0]) <= 1e-12);
  CHECK(std::abs(report.y0_given_ew[1] - report.y0_given_ew_closed_form[1]) <= 1e-12);
  CHECK(std::abs(report.y0_given_ew[0] - report.y0_given_ew[1]) > 1e-3);
}

TEST_CASE("identity checks reject broken inputs") {
  DiscreteJoint bad;
  bad.atoms.push_back({0, 0, 0, 0, 1, 0.5});
  CHECK_THROWS(verify_phi_identities(bad));  // mass 0.5 only

  // Positivity violation: one w level never exposed.
  DiscreteJoint no_pos;
  no_pos.atoms.push_back({0, 0, 0, 0, 1, 0.5});
  no_pos.atoms.push_back({1, 0, 0, 0, 1, 0.25});
  no_pos.atoms.push_back({1, 1, 0, 0, 1, 0.25});
  const auto report = verify_phi_identities(no_pos);
  CHECK_FALSE(report.positivity_ok);
  CHECK_FALSE(report.pass(1e-12));
}
