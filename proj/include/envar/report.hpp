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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace envar {

// One verification stage of a CLI run: residuals are named scalar
// diagnostics, artifacts whatever structured output the stage produced.
struct StageReport {
  std::string name;
  std::string status;  // "pass" or "fail"
  std::map<std::string, double> residuals;
  nlohmann::json artifacts = nlohmann::json::object();
};

struct InputDigest {
  std::string path;
  std::string digest;  // fnv1a64 of the file bytes, hex
};

// Machine-readable record of one CLI command. The verdict is derived:
// "pass" iff every stage passed. wall_time_seconds stays 0 unless timing
// was explicitly requested, so that reports are byte-stable across runs.
struct RunReport {
  int schema = 1;
  std::string command;
  std::vector<InputDigest> inputs;
  std::vector<StageReport> stages;
  std::string verdict = "pass";
  double wall_time_seconds = 0.0;

  StageReport& add_stage(const std::string& name);
  bool all_passed() const;
  // Sets verdict from the stage statuses.
  void finalize();
};

nlohmann::json to_json(const StageReport& stage);
nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);

// FNV-1a 64-bit content digest, lowercase hex.
std::string fnv1a64_hex(const std::string& bytes);
std::string file_digest(const std::string& path);

}  // namespace envar
