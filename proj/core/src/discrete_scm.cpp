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

#include "pscart/discrete_scm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pscart {

void DiscreteJoint::validate() const {
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (atom.p < 0.0) throw std::invalid_argument("DiscreteJoint: negative probability");
    total += atom.p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteJoint: probabilities do not sum to 1");
  }
}

namespace {

// Conditioning key: the covariate value for phi-identities, the extended
// value V for gamma-identities (masked atoms share one group).
using KeyFn = int (*)(const JointAtom&);

int key_w(const JointAtom& atom) { return atom.w; }
int key_v(const JointAtom& atom) { return atom.r == 1 ? atom.w : -1; }

IdentityReport verify_identities(const DiscreteJoint& joint, KeyFn key) {
  joint.validate();
  IdentityReport report;

  std::map<int, double> p_group;          // Pr(key)
  std::map<int, double> p_group_exposed;  // Pr(key, A=1)
  double p_a1 = 0.0;
  for (const auto& atom : joint.atoms) {
    p_group[key(atom)] += atom.p;
    if (atom.a == 1) {
      p_group_exposed[key(atom)] += atom.p;
      p_a1 += atom.p;
    }
  }
  const double p_a0 = 1.0 - p_a1;
  if (p_a1 <= 0.0 || p_a0 <= 0.0) {
    report.positivity_ok = false;
    return report;
  }

  std::map<int, double> score;  // Pr(A=1 | key)
  for (const auto& [k, pk] : p_group) {
    const double e = p_group_exposed[k] / pk;
    if (!(e > 0.0 && e < 1.0)) {
      report.positivity_ok = false;
      return report;
    }
    score[k] = e;
  }

  auto star_weight = [&](const JointAtom& atom) {
    if (atom.a == 1) return 1.0;
    const double e = score[key(atom)];
    return e / (1.0 - e);
  };

  // (i), (ii): arm-wise expectations of the unnormalized weight.
  double e_star_a1 = 0.0;
  double e_star_a0 = 0.0;
  for (const auto& atom : joint.atoms) {
    if (atom.a == 1) {
      e_star_a1 += atom.p * star_weight(atom);
    } else {
      e_star_a0 += atom.p * star_weight(atom);
    }
  }
  e_star_a1 /= p_a1;
  e_star_a0 /= p_a0;
  report.dev_exposed_expectation = std::abs(e_star_a1 - 1.0);
  report.dev_unexposed_expectation = std::abs(e_star_a0 - p_a1 / p_a0);

  // (iii): normalized weights balance the conditioner across arms.
  for (const auto& [k, pk] : p_group) {
    const double p_k_a0 = (pk - p_group_exposed[k]) / p_a0;
    const double p_k_a1 = p_group_exposed[k] / p_a1;
    const double weighted = (score[k] / (1.0 - score[k])) / e_star_a0 * p_k_a0;
    report.dev_balance = std::max(report.dev_balance, std::abs(weighted - p_k_a1));
  }

  // Does the joint satisfy conditional exchangeability given the key?
  std::map<int, std::array<double, 2>> arm_mass;  // per key, per arm
  std::map<std::pair<int, int>, std::array<double, 2>> cf_mass;  // (key, y0*2+y1)
  for (const auto& atom : joint.atoms) {
    arm_mass[key(atom)][atom.a] += atom.p;
    cf_mass[{key(atom), atom.y0 * 2 + atom.y1}][atom.a] += atom.p;
  }
  double ce_dev = 0.0;
  for (const auto& [kk, mass] : cf_mass) {
    const auto& arms = arm_mass[kk.first];
    const double c0 = mass[0] / arms[0];
    const double c1 = mass[1] / arms[1];
    ce_dev = std::max(ce_dev, std::abs(c0 - c1));
  }
  report.exchangeable_given_conditioner = ce_dev <= 1e-9;

  // (iv): weighted counterfactual laws across arms.
  std::map<int, std::array<double, 2>> weighted_cf;  // y0*2+y1 -> per arm
  for (const auto& atom : joint.atoms) {
    const double w = star_weight(atom) / (atom.a == 1 ? e_star_a1 : e_star_a0);
    weighted_cf[atom.y0 * 2 + atom.y1][atom.a] += w * atom.p;
  }
  for (const auto& [cf, mass] : weighted_cf) {
    report.dev_counterfactual =
        std::max(report.dev_counterfactual, std::abs(mass[0] / p_a0 - mass[1] / p_a1));
  }
  return report;
}

}  // namespace

IdentityReport verify_phi_identities(const DiscreteJoint& joint) {
  return verify_identities(joint, key_w);
}

IdentityReport verify_gamma_identities(const DiscreteJoint& joint) {
  return verify_identities(joint, key_v);
}

namespace {

double bounded_uniform(RngStream& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

std::array<double, 4> random_simplex4(RngStream& rng) {
  std::array<double, 4> q{};
  double total = 0.0;
  for (auto& v : q) {
    v = 0.05 + rng.uniform01();
    total += v;
  }
  for (auto& v : q) v /= total;
  return q;
}

}  // namespace

DiscreteJoint random_joint(RngStream& rng, int n_w) {
  DiscreteJoint joint;
  std::vector<double> pw(static_cast<std::size_t>(n_w));
  double total = 0.0;
  for (auto& v : pw) {
    v = 0.1 + rng.uniform01();
    total += v;
  }
  for (auto& v : pw) v /= total;
  for (int w = 0; w < n_w; ++w) {
    const double e = bounded_uniform(rng, 0.1, 0.9);
    for (int a = 0; a < 2; ++a) {
      // Counterfactual law may depend on the arm: exchangeability not imposed.
      const auto q = random_simplex4(rng);
      const double p_r1 = bounded_uniform(rng, 0.1, 0.9);
      for (int cf = 0; cf < 4; ++cf) {
        for (int r = 0; r < 2; ++r) {
          const double p = pw[static_cast<std::size_t>(w)] * (a == 1 ? e : 1.0 - e) *
                           q[static_cast<std::size_t>(cf)] * (r == 1 ? p_r1 : 1.0 - p_r1);
          joint.atoms.push_back({w, a, cf / 2, cf % 2, r, p});
        }
      }
    }
  }
  return joint;
}

DiscreteJoint random_exchangeable_joint(RngStream& rng, int n_w) {
  DiscreteJoint joint;
  std::vector<double> pw(static_cast<std::size_t>(n_w));
  double total = 0.0;
  for (auto& v : pw) {
    v = 0.1 + rng.uniform01();
    total += v;
  }
  for (auto& v : pw) v /= total;
  for (int w = 0; w < n_w; ++w) {
    const double e = bounded_uniform(rng, 0.1, 0.9);
    const auto q = random_simplex4(rng);  // counterfactual law given W only
    for (int a = 0; a < 2; ++a) {
      const double p_r1 = bounded_uniform(rng, 0.1, 0.9);  // masking may depend on a
      for (int cf = 0; cf < 4; ++cf) {
        for (int r = 0; r < 2; ++r) {
          const double p = pw[static_cast<std::size_t>(w)] * (a == 1 ? e : 1.0 - e) *
                           q[static_cast<std::size_t>(cf)] * (r == 1 ? p_r1 : 1.0 - p_r1);
          joint.atoms.push_back({w, a, cf / 2, cf % 2, r, p});
        }
      }
    }
  }
  return joint;
}

DiscreteJoint random_v_exchangeable_joint(RngStream& rng, int n_w) {
  // P(w, r) arbitrary; Pr(A=1 | v) a function of V alone; counterfactual
  // law arbitrary in (w, r).  Then (Y0, Y1) and A are independent given V.
  DiscreteJoint joint;
  std::vector<double> pwr(static_cast<std::size_t>(2 * n_w));
  double total = 0.0;
  for (auto& v : pwr) {
    v = 0.1 + rng.uniform01();
    total += v;
  }
  for (auto& v : pwr) v /= total;
  const double e_masked = bounded_uniform(rng, 0.1, 0.9);
  for (int w = 0; w < n_w; ++w) {
    const double e_obs = bounded_uniform(rng, 0.1, 0.9);
    for (int r = 0; r < 2; ++r) {
      const double e = r == 1 ? e_obs : e_masked;
      const auto q = random_simplex4(rng);  // depends on (w, r), not on a
      for (int a = 0; a < 2; ++a) {
        for (int cf = 0; cf < 4; ++cf) {
          const double p = pwr[static_cast<std::size_t>(2 * w + r)] *
                           (a == 1 ? e : 1.0 - e) * q[static_cast<std::size_t>(cf)];
          joint.atoms.push_back({w, a, cf / 2, cf % 2, r, p});
        }
      }
    }
  }
  return joint;
}

namespace {

// Outcome-noise cells for the masked-noise model: thresholds 0.1 and 0.2
// define the counterfactuals, 0.5 is the query point.
struct EpsCell {
  double lo;
  double hi;
  double mass() const { return hi - lo; }
};
constexpr EpsCell kNoiseCells[] = {{0.0, 0.1}, {0.1, 0.2}, {0.2, 0.5}, {0.5, 1.0}};

}  // namespace

MaskedNoiseConditionalReport check_masked_noise_example() {
  // W ~ B(0.5), A ~ B(0.5) independent; Y = 1{eps < (1+A)/10};
  // Pr(masked | Y) = 0.1 + 0.5 Y.
  struct Atom {
    int w;
    int a;
    int cell;
    int r;
    double p;
  };
  std::vector<Atom> atoms;
  for (int w = 0; w < 2; ++w) {
    for (int a = 0; a < 2; ++a) {
      for (int cell = 0; cell < 4; ++cell) {
        const int y = kNoiseCells[cell].hi <= (1.0 + a) / 10.0 + 1e-15 ? 1 : 0;
        const double p_masked = 0.1 + 0.5 * y;
        for (int r = 0; r < 2; ++r) {
          const double p = 0.5 * 0.5 * kNoiseCells[cell].mass() *
                           (r == 0 ? p_masked : 1.0 - p_masked);
          atoms.push_back({w, a, cell, r, p});
        }
      }
    }
  }

  MaskedNoiseConditionalReport report;
  // Pr(eps <= 0.5 | A=a, masked): cells 0..2 lie inside [0, 0.5].
  for (int a = 0; a < 2; ++a) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& atom : atoms) {
      if (atom.a != a || atom.r != 0) continue;
      den += atom.p;
      if (atom.cell <= 2) num += atom.p;
    }
    (a == 0 ? report.eps_le_half_a0 : report.eps_le_half_a1) = num / den;
  }
  report.counterfactual_dependence =
      std::abs(report.eps_le_half_a0 - report.eps_le_half_a1) > 1e-12;

  // Generalized scores by stratum.
  double p_r0 = 0.0;
  double p_r0_a1 = 0.0;
  double p_r1 = 0.0;
  double p_r1_a1 = 0.0;
  for (const auto& atom : atoms) {
    if (atom.r == 0) {
      p_r0 += atom.p;
      if (atom.a == 1) p_r0_a1 += atom.p;
    } else {
      p_r1 += atom.p;
      if (atom.a == 1) p_r1_a1 += atom.p;
    }
  }
  report.e_star_masked = p_r0_a1 / p_r0;
  report.e_star_observed = p_r1_a1 / p_r1;

  // W | (A, stratum) should not depend on the arm.
  for (int r = 0; r < 2; ++r) {
    for (int w = 0; w < 2; ++w) {
      double pw_a0 = 0.0;
      double pa0 = 0.0;
      double pw_a1 = 0.0;
      double pa1 = 0.0;
      for (const auto& atom : atoms) {
        if (atom.r != r) continue;
        if (atom.a == 0) {
          pa0 += atom.p;
          if (atom.w == w) pw_a0 += atom.p;
        } else {
          pa1 += atom.p;
          if (atom.w == w) pw_a1 += atom.p;
        }
      }
      report.w_balance_dev =
          std::max(report.w_balance_dev, std::abs(pw_a0 / pa0 - pw_a1 / pa1));
    }
  }
  return report;
}

DiscreteJoint masked_noise_example_joint() {
  DiscreteJoint joint;
  for (int w = 0; w < 2; ++w) {
    for (int a = 0; a < 2; ++a) {
      for (int cell = 0; cell < 4; ++cell) {
        const int y0 = kNoiseCells[cell].hi <= 0.1 + 1e-15 ? 1 : 0;
        const int y1 = kNoiseCells[cell].hi <= 0.2 + 1e-15 ? 1 : 0;
        const int y = a == 1 ? y1 : y0;
        const double p_masked = 0.1 + 0.5 * y;
        for (int r = 0; r < 2; ++r) {
          const double p = 0.5 * 0.5 * kNoiseCells[cell].mass() *
                           (r == 0 ? p_masked : 1.0 - p_masked);
          joint.atoms.push_back({w, a, y0, y1, r, p});
        }
      }
    }
  }
  return joint;
}

PreExposureMaskingReport check_pre_exposure_masking_example() {
  // W ~ B(0.5); Pr(masked | W) = 0.1; Pr(A=1 | R) = 2(1+R)/10;
  // Y = Y0 = Y1 = 1{eps < 2(1+2R)/20}, so the outcome depends on R, not A.
  struct Atom {
    int w;
    int r;
    int a;
    int y;
    double p;
  };
  std::vector<Atom> atoms;
  for (int w = 0; w < 2; ++w) {
    for (int r = 0; r < 2; ++r) {
      const double p_wr = 0.5 * (r == 0 ? 0.1 : 0.9);
      const double e = 2.0 * (1.0 + r) / 10.0;
      const double p_y1 = 2.0 * (1.0 + 2.0 * r) / 20.0;
      for (int a = 0; a < 2; ++a) {
        for (int y = 0; y < 2; ++y) {
          atoms.push_back({w, r, a, y, p_wr * (a == 1 ? e : 1.0 - e) *
                                           (y == 1 ? p_y1 : 1.0 - p_y1)});
        }
      }
    }
  }

  PreExposureMaskingReport report;
  for (int w = 0; w < 2; ++w) {
    double pw = 0.0;
    double pw_a1 = 0.0;
    for (const auto& atom : atoms) {
      if (atom.w != w) continue;
      pw += atom.p;
      if (atom.a == 1) pw_a1 += atom.p;
    }
    report.e_w[static_cast<std::size_t>(w)] = pw_a1 / pw;
  }
  for (int r = 0; r < 2; ++r) {
    double pr = 0.0;
    double pr_a1 = 0.0;
    for (const auto& atom : atoms) {
      if (atom.r != r) continue;
      pr += atom.p;
      if (atom.a == 1) pr_a1 += atom.p;
    }
    (r == 0 ? report.e_star_masked : report.e_star_observed) = pr_a1 / pr;
  }
  // Y0 given arm within each generalized-score stratum.
  for (int r = 0; r < 2; ++r) {
    for (int a = 0; a < 2; ++a) {
      double den = 0.0;
      double num = 0.0;
      for (const auto& atom : atoms) {
        if (atom.r != r || atom.a != a) continue;
        den += atom.p;
        if (atom.y == 1) num += atom.p;
      }
      auto& slot =
          r == 0 ? report.y0_given_estar_masked : report.y0_given_estar_observed;
      slot[static_cast<std::size_t>(a)] = num / den;
    }
  }
  // Y0 given arm at the constant usual score e(W) = 0.38 (conditioning on
  // e(W) conditions on nothing).
  for (int a = 0; a < 2; ++a) {
    double den = 0.0;
    double num = 0.0;
    for (const auto& atom : atoms) {
      if (atom.a != a) continue;
      den += atom.p;
      if (atom.y == 1) num += atom.p;
    }
    report.y0_given_ew[static_cast<std::size_t>(a)] = num / den;
    // Closed form: (0.2^a 0.8^(1-a) 0.01 + 0.4^a 0.6^(1-a) 0.27) /
    //              (0.38^a 0.62^(1-a)).
    const double masked_term = (a == 1 ? 0.20 : 0.80) * 0.01;
    const double observed_term = (a == 1 ? 0.40 : 0.60) * 0.27;
    const double denom = a == 1 ? 0.38 : 0.62;
    report.y0_given_ew_closed_form[static_cast<std::size_t>(a)] =
        (masked_term + observed_term) / denom;
  }
  return report;
}

}  // namespace pscart
