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

#ifndef PSCART_TOOLS_CLI_HPP
#define PSCART_TOOLS_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace pscart::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct GenerateConfig {
  std::string scenario = "1";
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  std::string out;
  std::string schema_out;
  std::string latents_out;  // oracle-only sidecar, off by default
};

struct EstimateConfig {
  std::string data_path;
  std::string schema_path;
  std::string ps_method = "bacart";
  std::string missing = "direct";
  std::string mode = "ipw";
  std::string preset = "desk";
  std::uint64_t seed = 1;
  std::string out;          // one-line CSV; stdout when empty
  std::string diagnostics;  // JSON blob; stdout when empty
  std::string ks_trace;     // optional CSV dump (boosted fits only)
  int mice_m = 5;
  int mice_cycles = 5;
  int boost_iterations = 0;  // 0 = preset default
  int boost_stride = 0;
  std::string save_imputations;  // directory for the m completed CSVs
};

struct SimulateConfig {
  std::string scenario = "1";
  int reps = 500;
  std::string preset = "desk";
  std::vector<std::string> estimators;  // empty = the full default table
  std::string mode = "ipw";             // ipw | match | both
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t n = 2000;
  int threads = 0;
  int boost_iterations = 0;  // 0 = preset default
  int boost_stride = 0;
};

struct VerifyAppendixConfig {
  int joints = 100;
  std::uint64_t seed = 1;
};

struct RunConfig {
  std::string subcommand;  // generate | estimate | simulate | verify-appendix
  GenerateConfig generate;
  EstimateConfig estimate;
  SimulateConfig simulate;
  VerifyAppendixConfig verify;
};

/// Parse argv-style arguments (program name excluded).  Throws
/// CLI::ParseError subclasses on usage problems; used directly by tests.
RunConfig parse_cli(const std::vector<std::string>& args);

/// Full entry point: parse, dispatch, map errors to exit codes.
int run_cli(int argc, char** argv);

int run_generate(const GenerateConfig& cfg, const std::string& command_echo);
int run_estimate(const EstimateConfig& cfg, const std::string& command_echo);
int run_simulate(const SimulateConfig& cfg, const std::string& command_echo);
int run_verify_appendix(const VerifyAppendixConfig& cfg);

}  // namespace pscart::cli

#endif  // PSCART_TOOLS_CLI_HPP
