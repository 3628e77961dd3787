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

#include <string>

#include <json.hpp>

#include "envar/envariance.hpp"
#include "envar/fine_graining.hpp"
#include "envar/schmidt.hpp"
#include "envar/tensor_core.hpp"

namespace envar {

// Norm slack accepted when ingesting state files; hand-authored amplitudes
// rarely hit 1e-10. Anything within this slack is renormalized (and the
// deviation reported), anything beyond is rejected.
inline constexpr double kIngestNormTol = 1e-6;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedState {
  StateVector state;
  double norm_deviation = 0.0;
  bool renormalized = false;
};

// State file format:
//   {"factors": [d1, ..., dn], "amplitudes": [[re, im], ...]}
// with amplitudes in flat-index order (last factor fastest).
LoadedState load_state(const nlohmann::json& doc);
LoadedState load_state_file(const std::string& path);
nlohmann::json state_to_json(const StateVector& state);
void save_state_file(const std::string& path, const StateVector& state);

// Operator file format: {"matrix": [[[re, im], ...], ...]} (rows of
// [re, im] pairs).
Operator load_operator(const nlohmann::json& doc);
Operator load_operator_file(const std::string& path);
nlohmann::json operator_to_json(const Operator& op);

nlohmann::json schmidt_to_json(const SchmidtDecomposition& dec);
nlohmann::json verdict_to_json(const EnvarianceVerdict& verdict,
                               bool include_witness);
nlohmann::json weights_to_json(const BranchWeights& weights);
nlohmann::json pipeline_to_json(const PipelineResult& result);

}  // namespace envar
