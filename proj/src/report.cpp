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

#include "envar/report.hpp"

#include <fstream>
#include <sstream>

namespace envar {

StageReport& RunReport::add_stage(const std::string& name) {
  stages.push_back(StageReport{name, "pass", {}, nlohmann::json::object()});
  return stages.back();
}

bool RunReport::all_passed() const {
  for (const StageReport& stage : stages) {
    if (stage.status != "pass") return false;
  }
  return true;
}

void RunReport::finalize() { verdict = all_passed() ? "pass" : "fail"; }

nlohmann::json to_json(const StageReport& stage) {
  nlohmann::json out;
  out["name"] = stage.name;
  out["status"] = stage.status;
  out["residuals"] = stage.residuals;
  out["artifacts"] = stage.artifacts;
  return out;
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json out;
  out["schema"] = report.schema;
  out["command"] = report.command;
  out["inputs"] = nlohmann::json::array();
  for (const InputDigest& input : report.inputs) {
    out["inputs"].push_back({{"path", input.path}, {"digest", input.digest}});
  }
  out["stages"] = nlohmann::json::array();
  for (const StageReport& stage : report.stages) {
    out["stages"].push_back(to_json(stage));
  }
  out["verdict"] = report.verdict;
  out["wall_time_seconds"] = report.wall_time_seconds;
  return out;
}

RunReport report_from_json(const nlohmann::json& doc) {
  RunReport report;
  report.schema = doc.at("schema").get<int>();
  report.command = doc.at("command").get<std::string>();
  for (const auto& input : doc.at("inputs")) {
    report.inputs.push_back({input.at("path").get<std::string>(),
                             input.at("digest").get<std::string>()});
  }
  for (const auto& jstage : doc.at("stages")) {
    StageReport stage;
    stage.name = jstage.at("name").get<std::string>();
    stage.status = jstage.at("status").get<std::string>();
    stage.residuals =
        jstage.at("residuals").get<std::map<std::string, double>>();
    stage.artifacts = jstage.at("artifacts");
    report.stages.push_back(std::move(stage));
  }
  report.verdict = doc.at("verdict").get<std::string>();
  report.wall_time_seconds = doc.at("wall_time_seconds").get<double>();
  return report;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) {
    out << ((hash >> shift) & 0xF);
  }
  return out.str();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file for digest: " + path);
  }
  std::ostringstream content;
  content << in.rdbuf();
  return fnv1a64_hex(content.str());
}

}  // namespace envar
