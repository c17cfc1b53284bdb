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

#ifndef PSCART_RNG_HPP
#define PSCART_RNG_HPP

#include <cstdint>
#include <vector>

namespace pscart {

// Stream purposes. Keying each consumer by a fixed tag keeps replications
// reproducible and non-overlapping when they run in parallel.
namespace purpose {
inline constexpr std::uint64_t covariates = 1;
inline constexpr std::uint64_t exposure = 2;
inline constexpr std::uint64_t outcome = 3;
inline constexpr std::uint64_t missingness = 4;
inline constexpr std::uint64_t bootstrap = 5;
inline constexpr std::uint64_t boost_subsample = 6;
inline constexpr std::uint64_t mice = 7;
inline constexpr std::uint64_t match_order = 8;
inline constexpr std::uint64_t truth_oracle = 9;
inline constexpr std::uint64_t generic = 10;
}  // namespace purpose

/// Deterministic seeded random stream, splittable by (seed, replication,
/// purpose).  Identical keys give bit-identical sequences on every platform;
/// distinct keys give independent-quality streams (xoshiro256++ state seeded
/// through a SplitMix64 chain over the key).  All distribution draws are
/// implemented in-repo so sequences do not depend on the standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t replication = 0,
                     std::uint64_t purpose_tag = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform01();
  /// Uniform on the open interval (0, 1); safe to pass to log/logit.
  double open_uniform01();
  /// Standard normal via Box-Muller (pair-cached).
  double normal();
  /// Gamma(shape, scale 1), Marsaglia-Tsang.
  double gamma(double shape);
  /// Chi-square with df degrees of freedom (df > 0, possibly fractional).
  double chisq(double df);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Unbiased integer in [0, n).
  std::uint64_t index_below(std::uint64_t n);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::uint32_t> permutation(std::uint32_t n);

  /// Derived stream for a sub-task; deterministic function of this stream's
  /// key (not of its position), so substreams are order-independent.
  RngStream substream(std::uint64_t purpose_tag) const;

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t replication() const { return key_[1]; }
  std::uint64_t purpose_tag() const { return key_[2]; }

 private:
  std::uint64_t state_[4];
  std::uint64_t key_[3];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace pscart

#endif  // PSCART_RNG_HPP
