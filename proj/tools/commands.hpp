// Copyright 2026 the envar developers
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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "envar/report.hpp"

namespace envar::cli {

// Stable exit codes: 0 pass, 2 input error, 3 invariant violation,
// 4 negative envariance verdict, 5 cross-check failure.
inline constexpr int kExitPass = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitNotEnvariant = 4;
inline constexpr int kExitCrossCheck = 5;

struct GlobalOptions {
  bool json = false;
  bool timing = false;
  double tolerance = 1e-8;
  std::int64_t max_denominator = 10000;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct CommandOutcome {
  RunReport report;
  int exit_code = kExitPass;
};

struct UnitarySpec {
  enum class Kind { kPhase, kSwap, kMatrix } kind = Kind::kSwap;
  std::vector<double> phi;     // phase mode
  int k1 = 0, k2 = 1;          // swap mode
  double phi12 = 0.0;          // swap mode
  std::string matrix_file;     // matrix mode
};

CommandOutcome cmd_schmidt(const std::string& file, int split,
                           const GlobalOptions& global);
CommandOutcome cmd_check_envariance(const std::string& file, int split,
                                    const UnitarySpec& spec, bool emit_witness,
                                    const GlobalOptions& global);
CommandOutcome cmd_derive(const std::string& file, int split,
                          const GlobalOptions& global);
CommandOutcome cmd_oracle(const std::string& file, int split,
                          const GlobalOptions& global);
CommandOutcome cmd_demo(const std::string& name, const std::string& out_dir,
                        const GlobalOptions& global);

// Runs one command per file, in input order, on up to `jobs` threads.
// The output set is identical regardless of the job count.
std::vector<CommandOutcome> run_batch(
    const std::vector<std::string>& files, int jobs,
    const std::function<CommandOutcome(const std::string&)>& run_one);

// Human-readable rendering; verdicts match the JSON form.
void print_human(std::ostream& out, const RunReport& report);

}  // namespace envar::cli
