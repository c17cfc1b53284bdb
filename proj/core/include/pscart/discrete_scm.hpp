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

#ifndef PSCART_DISCRETE_SCM_HPP
#define PSCART_DISCRETE_SCM_HPP

#include <array>
#include <vector>

#include "pscart/rng.hpp"

namespace pscart {

/// Finite joint law over (W, A, Y0, Y1, R); the exhaustive-summation
/// backbone of the weighting-identity checks, with every probability an
/// exact finite sum.
struct JointAtom {
  int w = 0;
  int a = 0;
  int y0 = 0;
  int y1 = 0;
  int r = 1;  // 1 = W observed, 0 = W masked
  double p = 0.0;
};

struct DiscreteJoint {
  std::vector<JointAtom> atoms;
  /// Probabilities nonnegative, summing to 1 within 1e-12.
  void validate() const;
};

/// Deviations from the odds-weighting identities, each computed by
/// exhaustive summation:  (i) the exposed weight expectation is 1,
/// (ii) the unexposed expectation is Pr(A=1)/Pr(A=0), (iii) weighting
/// balances the conditioning variable across arms, (iv) under conditional
/// exchangeability the weighted counterfactual laws coincide.
struct IdentityReport {
  double dev_exposed_expectation = 0.0;
  double dev_unexposed_expectation = 0.0;
  double dev_balance = 0.0;
  double dev_counterfactual = 0.0;
  bool exchangeable_given_conditioner = false;
  bool positivity_ok = true;

  bool pass(double tol) const {
    return positivity_ok && dev_exposed_expectation <= tol &&
           dev_unexposed_expectation <= tol && dev_balance <= tol &&
           (!exchangeable_given_conditioner || dev_counterfactual <= tol);
  }
};

/// Identities for weights built from e(W) = Pr(A=1|W).
IdentityReport verify_phi_identities(const DiscreteJoint& joint);

/// Identities for weights built from e*(V), V = W when observed and * when
/// masked; the unexposed weight uses e*(v)/(1 - e*(v)).
IdentityReport verify_gamma_identities(const DiscreteJoint& joint);

/// Random finite joints for property checks: the exchangeable variants
/// satisfy (Y0,Y1) independent of A given W (resp. given V).
DiscreteJoint random_joint(RngStream& rng, int n_w = 4);
DiscreteJoint random_exchangeable_joint(RngStream& rng, int n_w = 4);
DiscreteJoint random_v_exchangeable_joint(RngStream& rng, int n_w = 4);

/// The fully-independent three-variable model with outcome-dependent
/// masking whose conditional law of the outcome noise differs by arm given
/// the generalized score:  Pr(eps <= 1/2 | A=a, masked) = 2/3 vs 3/4.
struct MaskedNoiseConditionalReport {
  double eps_le_half_a0 = 0.0;       // exactly 2/3
  double eps_le_half_a1 = 0.0;       // exactly 3/4
  double e_star_masked = 0.0;        // 4/7
  double e_star_observed = 0.0;      // 16/33, identical for both w
  double w_balance_dev = 0.0;        // max_w,a dev of Pr(W=w|A=a, stratum)
  bool counterfactual_dependence = false;
};
MaskedNoiseConditionalReport check_masked_noise_example();
/// The same model collapsed onto (W, A, Y0, Y1, R) atoms.
DiscreteJoint masked_noise_example_joint();

/// The pre-exposure-masking model where the generalized score restores
/// exchangeability but the usual score does not: e(w) = 0.38 for both w,
/// e*(masked) = 0.20, e*(observed) = 0.40, Pr(Y0=1 | A=a, e* = 0.20) = 0.10
/// for both arms, while Pr(Y0=1 | A=a, e(W)) varies with a.
struct PreExposureMaskingReport {
  std::array<double, 2> e_w{};                    // both 0.38
  double e_star_masked = 0.0;                     // 0.20
  double e_star_observed = 0.0;                   // 0.40
  std::array<double, 2> y0_given_estar_masked{};  // both 0.10
  std::array<double, 2> y0_given_estar_observed{};
  std::array<double, 2> y0_given_ew{};  // 0.170/0.62 vs 0.110/0.38
  std::array<double, 2> y0_given_ew_closed_form{};
};
PreExposureMaskingReport check_pre_exposure_masking_example();

}  // namespace pscart

#endif  // PSCART_DISCRETE_SCM_HPP
