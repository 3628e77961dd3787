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

#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "envar/born_oracle.hpp"
#include "envar/envariance.hpp"
#include "envar/fine_graining.hpp"
#include "envar/json_io.hpp"
#include "envar/schmidt.hpp"
#include "envar/tensor_core.hpp"

namespace envar::cli {

namespace {

// Exceptions → stage + exit code, so a batch run never aborts midway.
CommandOutcome guarded(const std::string& command,
                       const std::function<void(CommandOutcome&)>& body,
                       bool timing) {
  CommandOutcome outcome;
  outcome.report.command = command;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(outcome);
  } catch (const ParseError& e) {
    StageReport& stage = outcome.report.add_stage("error");
    stage.status = "fail";
    stage.artifacts["message"] = e.what();
    stage.artifacts["kind"] = "input";
    outcome.exit_code = kExitInputError;
  } catch (const WitnessConstructionError& e) {
    StageReport& stage = outcome.report.add_stage("error");
    stage.status = "fail";
    stage.artifacts["message"] = e.what();
    stage.artifacts["kind"] = "witness_construction";
    outcome.exit_code = kExitInvariant;
  } catch (const InvariantViolation& e) {
    StageReport& stage = outcome.report.add_stage("error");
    stage.status = "fail";
    stage.artifacts["message"] = e.what();
    stage.artifacts["kind"] = "invariant";
    outcome.exit_code = kExitInvariant;
  } catch (const std::invalid_argument& e) {
    StageReport& stage = outcome.report.add_stage("error");
    stage.status = "fail";
    stage.artifacts["message"] = e.what();
    stage.artifacts["kind"] = "invariant";
    outcome.exit_code = kExitInvariant;
  } catch (const std::exception& e) {
    StageReport& stage = outcome.report.add_stage("error");
    stage.status = "fail";
    stage.artifacts["message"] = e.what();
    stage.artifacts["kind"] = "internal";
    outcome.exit_code = kExitInvariant;
  }
  if (timing) {
    outcome.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
  outcome.report.finalize();
  if (outcome.exit_code == kExitPass && !outcome.report.all_passed()) {
    outcome.exit_code = kExitInvariant;
  }
  return outcome;
}

StateVector load_split_state(const std::string& file, int split,
                             RunReport& report) {
  const LoadedState loaded = load_state_file(file);
  report.inputs.push_back({file, file_digest(file)});
  StageReport& stage = report.add_stage("parse");
  stage.residuals["norm_deviation"] = loaded.norm_deviation;
  stage.artifacts["renormalized"] = loaded.renormalized;
  nlohmann::json jfactors = nlohmann::json::array();
  for (Index d : loaded.state.factors()) jfactors.push_back(d);
  stage.artifacts["factors"] = jfactors;
  if (loaded.state.num_factors() == 2 && split == 1) {
    return loaded.state;
  }
  if (split < 1 ||
      static_cast<std::size_t>(split) >= loaded.state.num_factors()) {
    throw std::invalid_argument(
        "--split must leave at least one factor on each side");
  }
  return loaded.state.group_bipartite(static_cast<std::size_t>(split));
}

nlohmann::json classes_to_json(const std::vector<std::vector<int>>& classes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& group : classes) out.push_back(group);
  return out;
}

nlohmann::json probabilities_to_json(const RealVector& p) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < p.size(); ++i) out.push_back(p[i]);
  return out;
}

void add_schmidt_stage(RunReport& report, const SchmidtDecomposition& dec,
                       double class_tolerance) {
  StageReport& stage = report.add_stage("schmidt_decomposition");
  stage.artifacts = schmidt_to_json(dec);
  StageReport& classes = report.add_stage("swappable_classes");
  classes.artifacts["tolerance"] = class_tolerance;
  classes.artifacts["classes"] =
      classes_to_json(swappable_classes(dec, class_tolerance));
}

// Born-route probabilities of the Schmidt branches: expectation values of
// the embedded branch projectors, ordered like the branches.
RealVector oracle_branch_probabilities(const StateVector& state,
                                       const SchmidtDecomposition& dec) {
  std::vector<Operator> projectors;
  projectors.reserve(dec.rank());
  for (int k = 0; k < dec.rank(); ++k) {
    const Matrix p =
        dec.left_basis().col(k) * dec.left_basis().col(k).adjoint();
    projectors.push_back(embed_on_factor(Operator(p), 0, state.factors()));
  }
  return born_probabilities(state, ProjectorFamily(std::move(projectors)));
}

void run_pipeline_stages(CommandOutcome& outcome, const StateVector& state,
                         const SchmidtDecomposition& dec,
                         const GlobalOptions& global) {
  PipelineOptions options;
  options.max_denominator = global.max_denominator;
  options.decision_tolerance = global.tolerance;
  options.seed = global.seed;
  const PipelineResult result = envariant_probabilities(state, options);

  StageReport& rationalize = outcome.report.add_stage("rationalize_weights");
  rationalize.residuals["approximation_error"] = result.approximation_error;
  rationalize.artifacts["weights"] = weights_to_json(result.weights);

  StageReport& pipeline = outcome.report.add_stage("branch_counting");
  pipeline.residuals["branch_modulus_deviation"] =
      result.branch_modulus_deviation;
  pipeline.residuals["max_pair_residual"] = result.max_pair_residual;
  pipeline.artifacts = pipeline_to_json(result);

  const RealVector oracle = oracle_branch_probabilities(state, dec);
  StageReport& cross = outcome.report.add_stage("oracle_cross_check");
  cross.artifacts["pipeline_probabilities"] =
      probabilities_to_json(result.probabilities);
  cross.artifacts["oracle_probabilities"] = probabilities_to_json(oracle);
  const double discrepancy =
      (result.probabilities - oracle).cwiseAbs().maxCoeff();
  const double bound = static_cast<double>(dec.rank()) /
                           static_cast<double>(global.max_denominator) +
                       1e-9;
  cross.residuals["max_discrepancy"] = discrepancy;
  cross.residuals["bound"] = bound;
  if (discrepancy > bound) {
    cross.status = "fail";
    outcome.exit_code = kExitCrossCheck;
  }
}

void run_derive_stages(CommandOutcome& outcome, const StateVector& state,
                       const GlobalOptions& global) {
  const SchmidtDecomposition dec = schmidt_decompose(state);
  add_schmidt_stage(outcome.report, dec, global.tolerance);
  run_pipeline_stages(outcome, state, dec, global);
}

StateVector swap_bipartite_factors(const StateVector& state) {
  const Index d_left = state.factor_dim(0);
  const Index d_right = state.factor_dim(1);
  Vector amps(state.dim());
  for (Index s = 0; s < d_left; ++s) {
    for (Index e = 0; e < d_right; ++e) {
      amps[e * d_left + s] = state.amplitudes()[s * d_right + e];
    }
  }
  return StateVector(std::move(amps), {d_right, d_left});
}

struct DemoSpec {
  std::string file_name;
  StateVector state;
  bool expect_swap_envariant;
};

DemoSpec make_demo(const std::string& name) {
  const double r = 1.0 / std::sqrt(2.0);
  if (name == "bell") {
    Vector amps = Vector::Zero(4);
    amps[0] = amps[3] = r;
    return {"demo_bell_state.json", StateVector(amps, {2, 2}), true};
  }
  if (name == "singlet") {
    Vector amps = Vector::Zero(4);
    amps[1] = r;
    amps[2] = -r;
    return {"demo_singlet_state.json", StateVector(amps, {2, 2}), true};
  }
  if (name == "unequal") {
    Vector amps = Vector::Zero(4);
    amps[0] = std::sqrt(1.0 / 3.0);
    amps[3] = std::sqrt(2.0 / 3.0);
    return {"demo_unequal_state.json", StateVector(amps, {2, 2}), false};
  }
  throw ParseError("unknown demo name: " + name +
                   " (expected bell, singlet or unequal)");
}

}  // namespace

CommandOutcome cmd_schmidt(const std::string& file, int split,
                           const GlobalOptions& global) {
  return guarded("schmidt " + file,
                 [&](CommandOutcome& outcome) {
                   const StateVector state =
                       load_split_state(file, split, outcome.report);
                   const SchmidtDecomposition dec = schmidt_decompose(state);
                   add_schmidt_stage(outcome.report, dec, global.tolerance);
                 },
                 global.timing);
}

CommandOutcome cmd_check_envariance(const std::string& file, int split,
                                    const UnitarySpec& spec, bool emit_witness,
                                    const GlobalOptions& global) {
  return guarded(
      "check-envariance " + file,
      [&](CommandOutcome& outcome) {
        const StateVector state =
            load_split_state(file, split, outcome.report);
        const SchmidtDecomposition dec = schmidt_decompose(state);

        StageReport& build = outcome.report.add_stage("build_unitary");
        Operator u_s(Matrix::Identity(1, 1));
        switch (spec.kind) {
          case UnitarySpec::Kind::kPhase: {
            RealVector phi(static_cast<Index>(spec.phi.size()));
            for (std::size_t i = 0; i < spec.phi.size(); ++i) {
              phi[static_cast<Index>(i)] = spec.phi[i];
            }
            u_s = phase_unitary(dec, phi);
            build.artifacts["kind"] = "phase";
            build.artifacts["phi"] = spec.phi;
            break;
          }
          case UnitarySpec::Kind::kSwap: {
            u_s = swap_unitary(dec, spec.k1, spec.k2, spec.phi12);
            build.artifacts["kind"] = "swap";
            build.artifacts["k1"] = spec.k1;
            build.artifacts["k2"] = spec.k2;
            build.artifacts["phi12"] = spec.phi12;
            break;
          }
          case UnitarySpec::Kind::kMatrix: {
            outcome.report.inputs.push_back(
                {spec.matrix_file, file_digest(spec.matrix_file)});
            u_s = load_operator_file(spec.matrix_file);
            build.artifacts["kind"] = "matrix";
            build.artifacts["file"] = spec.matrix_file;
            break;
          }
        }
        build.residuals["unitarity_defect"] = u_s.unitarity_defect();

        const EnvarianceVerdict verdict =
            check_envariance(state, u_s, global.tolerance);
        StageReport& stage = outcome.report.add_stage("envariance_check");
        stage.artifacts = verdict_to_json(verdict, emit_witness);
        stage.artifacts["tolerance"] = global.tolerance;
        if (!verdict.envariant) {
          stage.status = "fail";
          outcome.exit_code = kExitNotEnvariant;
        }
      },
      global.timing);
}

CommandOutcome cmd_derive(const std::string& file, int split,
                          const GlobalOptions& global) {
  return guarded("derive " + file,
                 [&](CommandOutcome& outcome) {
                   const StateVector state =
                       load_split_state(file, split, outcome.report);
                   run_derive_stages(outcome, state, global);
                 },
                 global.timing);
}

CommandOutcome cmd_oracle(const std::string& file, int split,
                          const GlobalOptions& global) {
  return guarded(
      "oracle " + file,
      [&](CommandOutcome& outcome) {
        const StateVector state =
            load_split_state(file, split, outcome.report);

        StageReport& joint = outcome.report.add_stage("joint_distribution");
        joint.artifacts["probabilities"] = probabilities_to_json(
            born_probabilities(state, Matrix::Identity(state.dim(),
                                                       state.dim())));

        // Marginal over the left group via embedded projectors.
        std::vector<Operator> projectors;
        const Index d_left = state.factor_dim(0);
        for (Index s = 0; s < d_left; ++s) {
          Matrix p = Matrix::Zero(d_left, d_left);
          p(s, s) = 1.0;
          projectors.push_back(
              embed_on_factor(Operator(p), 0, state.factors()));
        }
        const ProjectorFamily family(std::move(projectors));
        StageReport& marginal = outcome.report.add_stage("left_marginal");
        marginal.artifacts["probabilities"] =
            probabilities_to_json(born_probabilities(state, family));

        const AdditivityCheck additivity =
            sigma_additivity_check(state, family);
        StageReport& additive = outcome.report.add_stage("sigma_additivity");
        additive.residuals["residual"] = additivity.residual;
        additive.residuals["min_probability"] = additivity.min_probability;
        if (additivity.residual > 1e-12 ||
            additivity.min_probability < -1e-12) {
          additive.status = "fail";
        }

        StageReport& ignorance = outcome.report.add_stage("ignorance_check");
        ignorance.artifacts["left"] = ignorance_check(state, global.tolerance);
        ignorance.artifacts["right"] = ignorance_check(
            swap_bipartite_factors(state), global.tolerance);
      },
      global.timing);
}

CommandOutcome cmd_demo(const std::string& name, const std::string& out_dir,
                        const GlobalOptions& global) {
  return guarded(
      "demo " + name,
      [&](CommandOutcome& outcome) {
        const DemoSpec demo = make_demo(name);
        const std::string path = out_dir + "/" + demo.file_name;
        save_state_file(path, demo.state);
        StageReport& generate = outcome.report.add_stage("generate_state");
        generate.artifacts["path"] = path;

        const StateVector state =
            load_split_state(path, 1, outcome.report);
        const SchmidtDecomposition dec = schmidt_decompose(state);
        add_schmidt_stage(outcome.report, dec, global.tolerance);

        // Swap of the two leading branches: envariant exactly for equal
        // moduli. The demos state their expected outcome up front.
        StageReport& swap_stage = outcome.report.add_stage("swap_envariance");
        const EnvarianceVerdict swap_verdict = check_envariance(
            state, swap_unitary(dec, 0, 1, 0.0), global.tolerance);
        swap_stage.artifacts = verdict_to_json(swap_verdict, false);
        swap_stage.artifacts["expected_envariant"] = demo.expect_swap_envariant;
        if (swap_verdict.envariant != demo.expect_swap_envariant) {
          swap_stage.status = "fail";
        }

        StageReport& phase_stage =
            outcome.report.add_stage("phase_envariance");
        RealVector phi(dec.rank());
        for (int k = 0; k < dec.rank(); ++k) phi[k] = 0.7 - 1.3 * k;
        const EnvarianceVerdict phase_verdict =
            check_envariance(state, phase_unitary(dec, phi), global.tolerance);
        phase_stage.artifacts = verdict_to_json(phase_verdict, false);
        if (!phase_verdict.envariant) phase_stage.status = "fail";

        run_pipeline_stages(outcome, state, dec, global);
        // For the demos the derive cross-check must pass; treat anything
        // else as a broken build rather than a reportable outcome.
        if (outcome.exit_code == kExitCrossCheck) {
          throw InvariantViolation("demo cross-check failed");
        }

        if (name == "singlet") {
          StageReport& ignorance =
              outcome.report.add_stage("ignorance_check");
          ignorance.artifacts["left"] =
              ignorance_check(state, global.tolerance);
          ignorance.artifacts["right"] = ignorance_check(
              swap_bipartite_factors(state), global.tolerance);
          if (!ignorance.artifacts["left"].get<bool>() ||
              !ignorance.artifacts["right"].get<bool>()) {
            ignorance.status = "fail";
          }
        }
      },
      global.timing);
}

std::vector<CommandOutcome> run_batch(
    const std::vector<std::string>& files, int jobs,
    const std::function<CommandOutcome(const std::string&)>& run_one) {
  std::vector<CommandOutcome> outcomes(files.size());
  if (jobs <= 1 || files.size() <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      outcomes[i] = run_one(files[i]);
    }
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= files.size()) break;
      outcomes[i] = run_one(files[i]);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), files.size());
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  return outcomes;
}

void print_human(std::ostream& out, const RunReport& report) {
  out << "== " << report.command << "\n";
  for (const InputDigest& input : report.inputs) {
    out << "input " << input.path << " (fnv1a64 " << input.digest << ")\n";
  }
  out << std::setprecision(17);
  for (const StageReport& stage : report.stages) {
    out << "[" << (stage.status == "pass" ? " ok " : "FAIL") << "] "
        << stage.name << "\n";
    for (const auto& [key, value] : stage.residuals) {
      out << "    " << key << " = " << value << "\n";
    }
    for (const auto& [key, value] : stage.artifacts.items()) {
      out << "    " << key << ": " << value.dump() << "\n";
    }
  }
  out << "verdict: " << report.verdict;
  if (report.wall_time_seconds > 0.0) {
    out << "  (" << report.wall_time_seconds << " s)";
  }
  out << "\n";
}

}  // namespace envar::cli
