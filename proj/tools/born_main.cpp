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

#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

namespace {

using envar::cli::CommandOutcome;
using envar::cli::GlobalOptions;
using envar::cli::UnitarySpec;

void emit(const std::vector<CommandOutcome>& outcomes, bool json) {
  if (json) {
    if (outcomes.size() == 1) {
      std::cout << envar::to_json(outcomes.front().report).dump(2) << "\n";
    } else {
      nlohmann::json array = nlohmann::json::array();
      for (const CommandOutcome& outcome : outcomes) {
        array.push_back(envar::to_json(outcome.report));
      }
      std::cout << array.dump(2) << "\n";
    }
    return;
  }
  for (const CommandOutcome& outcome : outcomes) {
    envar::cli::print_human(std::cout, outcome.report);
  }
}

int worst_exit(const std::vector<CommandOutcome>& outcomes) {
  int worst = 0;
  for (const CommandOutcome& outcome : outcomes) {
    worst = std::max(worst, outcome.exit_code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "born: Schmidt decomposition, envariance witnesses and the "
      "branch-counting route to outcome probabilities, with an independent "
      "Born-rule cross-check"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_flag("--json", global.json, "emit machine-readable reports");
  app.add_flag("--timing", global.timing,
               "record wall time in reports (off keeps reports byte-stable)");
  app.add_option("--tolerance", global.tolerance,
                 "decision tolerance for envariance and class grouping")
      ->capture_default_str();
  app.add_option("--max-denominator", global.max_denominator,
                 "largest admissible total branch count M")
      ->capture_default_str();
  app.add_option("--seed", global.seed,
                 "seed for the fine-branch pair subsample")
      ->capture_default_str();
  app.add_option("--jobs", global.jobs,
                 "worker threads for multi-file runs (same output any value)")
      ->capture_default_str();

  std::vector<std::string> files;
  int split = 1;

  CLI::App* schmidt = app.add_subcommand(
      "schmidt", "decompose a state file and print moduli, phases and classes");
  schmidt->fallthrough();
  schmidt->add_option("files", files, "state JSON files")->required();
  schmidt->add_option("--split", split,
                      "factors in the left group (default 1)");

  std::string check_file;
  int check_split = 1;
  bool emit_witness = false;
  UnitarySpec spec;
  CLI::App* check = app.add_subcommand(
      "check-envariance",
      "decide envariance of a left-factor unitary; exit 4 when negative");
  check->fallthrough();
  check->add_option("state", check_file, "state JSON file")->required();
  check->add_option("--split", check_split,
                    "factors in the left group (default 1)");
  check->add_flag("--emit-witness", emit_witness,
                  "include the witness matrix in the report");
  check->require_subcommand(1);
  CLI::App* phase = check->add_subcommand(
      "phase", "unitary with eigenphase phi_k on Schmidt branch k");
  phase->add_option("--phi", spec.phi, "comma-separated phases, one per branch")
      ->required()
      ->delimiter(',');
  CLI::App* swap = check->add_subcommand(
      "swap", "exchange two Schmidt branches (0-based, descending moduli)");
  swap->add_option("--k1", spec.k1, "first branch")->capture_default_str();
  swap->add_option("--k2", spec.k2, "second branch")->capture_default_str();
  swap->add_option("--phi12", spec.phi12, "swap phase")->capture_default_str();
  CLI::App* matrix = check->add_subcommand(
      "matrix", "unitary from an operator JSON file");
  matrix->add_option("--operator", spec.matrix_file, "operator JSON file")
      ->required();

  CLI::App* derive = app.add_subcommand(
      "derive",
      "run the full branch-counting pipeline and cross-check the Born rule; "
      "exit 5 when the cross-check fails");
  derive->fallthrough();
  derive->add_option("files", files, "state JSON files")->required();
  derive->add_option("--split", split, "factors in the left group (default 1)");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "direct Born-rule report: joint and marginal distributions, "
                "additivity, ignorance");
  oracle->fallthrough();
  oracle->add_option("files", files, "state JSON files")->required();
  oracle->add_option("--split", split, "factors in the left group (default 1)");

  std::string demo_name;
  std::string demo_out = ".";
  CLI::App* demo = app.add_subcommand(
      "demo", "generate a named example state and walk the whole pipeline");
  demo->fallthrough();
  demo->add_option("name", demo_name, "bell | singlet | unequal")->required();
  demo->add_option("--out", demo_out, "directory for the generated state file")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return envar::cli::kExitInputError;
  }

  std::vector<CommandOutcome> outcomes;
  if (schmidt->parsed()) {
    outcomes = envar::cli::run_batch(files, global.jobs, [&](const auto& f) {
      return envar::cli::cmd_schmidt(f, split, global);
    });
  } else if (check->parsed()) {
    if (phase->parsed()) spec.kind = UnitarySpec::Kind::kPhase;
    if (swap->parsed()) spec.kind = UnitarySpec::Kind::kSwap;
    if (matrix->parsed()) spec.kind = UnitarySpec::Kind::kMatrix;
    outcomes.push_back(envar::cli::cmd_check_envariance(
        check_file, check_split, spec, emit_witness, global));
  } else if (derive->parsed()) {
    outcomes = envar::cli::run_batch(files, global.jobs, [&](const auto& f) {
      return envar::cli::cmd_derive(f, split, global);
    });
  } else if (oracle->parsed()) {
    outcomes = envar::cli::run_batch(files, global.jobs, [&](const auto& f) {
      return envar::cli::cmd_oracle(f, split, global);
    });
  } else if (demo->parsed()) {
    outcomes.push_back(envar::cli::cmd_demo(demo_name, demo_out, global));
  }

  emit(outcomes, global.json);
  return worst_exit(outcomes);
}
