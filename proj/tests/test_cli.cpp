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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "envar/report.hpp"
#include "support/subprocess.hpp"

using envar::testing::ProcessResult;
using envar::testing::run_process;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const std::string kCli = BORN_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("envar_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_bell(const std::string& path) {
  const double r = 1.0 / std::sqrt(2.0);
  json doc;
  doc["factors"] = {2, 2};
  doc["amplitudes"] = {{r, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {r, 0.0}};
  std::ofstream(path) << doc.dump(2) << "\n";
}

void write_unequal(const std::string& path) {
  json doc;
  doc["factors"] = {2, 2};
  doc["amplitudes"] = {{std::sqrt(1.0 / 3.0), 0.0},
                       {0.0, 0.0},
                       {0.0, 0.0},
                       {std::sqrt(2.0 / 3.0), 0.0}};
  std::ofstream(path) << doc.dump(2) << "\n";
}

void write_product(const std::string& path) {
  json doc;
  doc["factors"] = {2, 2};
  doc["amplitudes"] = {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  std::ofstream(path) << doc.dump(2) << "\n";
}

// Minimal structural validator for the subset of JSON Schema the shipped
// report schema uses: type, enum, required, properties, items.
bool validates(const json& schema, const json& value) {
  if (schema.contains("type")) {
    const std::string type = schema["type"];
    if (type == "object" && !value.is_object()) return false;
    if (type == "array" && !value.is_array()) return false;
    if (type == "string" && !value.is_string()) return false;
    if (type == "integer" && !value.is_number_integer()) return false;
    if (type == "number" && !value.is_number()) return false;
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& candidate : schema["enum"]) {
      if (candidate == value) found = true;
    }
    if (!found) return false;
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      if (!value.contains(key.get<std::string>())) return false;
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (value.contains(key) && !validates(sub, value[key])) return false;
    }
  }
  if (schema.contains("items") && value.is_array()) {
    for (const auto& item : value) {
      if (!validates(schema["items"], item)) return false;
    }
  }
  return true;
}

json load_schema() {
  std::ifstream in(REPORT_SCHEMA_PATH);
  REQUIRE(in.good());
  return json::parse(in);
}

}  // namespace

TEST_CASE("schmidt command reports Bell moduli and a single class") {
  TempDir dir;
  write_bell(dir.file("bell.json"));
  const ProcessResult run =
      run_process(kCli + " schmidt " + dir.file("bell.json") + " --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  CHECK(report["verdict"] == "pass");
  const json& dec = report["stages"][1]["artifacts"];
  CHECK(dec["rank"] == 2);
  CHECK(dec["moduli"][0].get<double>() == doctest::Approx(0.7071067811865476));
  CHECK(dec["moduli"][1].get<double>() == doctest::Approx(0.7071067811865476));
  const json& classes = report["stages"][2]["artifacts"]["classes"];
  CHECK(classes.size() == 1);
  CHECK(classes[0].size() == 2);
}

TEST_CASE("schmidt command reports rank 1 for a product state") {
  TempDir dir;
  write_product(dir.file("product.json"));
  const ProcessResult run =
      run_process(kCli + " schmidt " + dir.file("product.json") + " --json");
  REQUIRE(run.exit_code == 0);
  CHECK(json::parse(run.output)["stages"][1]["artifacts"]["rank"] == 1);
}

TEST_CASE("schmidt --split groups leading factors") {
  TempDir dir;
  // Three qubits in a product-of-Bell-and-|0> arrangement: grouping the
  // first two factors gives a rank-1 bipartition, grouping one gives rank 2.
  const double r = 1.0 / std::sqrt(2.0);
  json doc;
  doc["factors"] = {2, 2, 2};
  doc["amplitudes"] = json::array();
  for (int i = 0; i < 8; ++i) doc["amplitudes"].push_back({0.0, 0.0});
  doc["amplitudes"][0] = {r, 0.0};  // |000>
  doc["amplitudes"][6] = {r, 0.0};  // |110>
  std::ofstream(dir.file("three.json")) << doc.dump() << "\n";

  const ProcessResult grouped = run_process(
      kCli + " schmidt " + dir.file("three.json") + " --split 2 --json");
  REQUIRE(grouped.exit_code == 0);
  CHECK(json::parse(grouped.output)["stages"][1]["artifacts"]["rank"] == 1);

  const ProcessResult split_one = run_process(
      kCli + " schmidt " + dir.file("three.json") + " --split 1 --json");
  REQUIRE(split_one.exit_code == 0);
  CHECK(json::parse(split_one.output)["stages"][1]["artifacts"]["rank"] == 2);

  const ProcessResult bad_split = run_process(
      kCli + " schmidt " + dir.file("three.json") + " --split 3");
  CHECK(bad_split.exit_code == 3);
}

TEST_CASE("schmidt command exits 2 on malformed input") {
  TempDir dir;
  std::ofstream(dir.file("bad.json")) << "{ not json";
  const ProcessResult run =
      run_process(kCli + " schmidt " + dir.file("bad.json"));
  CHECK(run.exit_code == 2);

  const ProcessResult missing = run_process(kCli + " schmidt /no/such/file");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("check-envariance: swap on Bell passes and emits a witness") {
  TempDir dir;
  write_bell(dir.file("bell.json"));
  const ProcessResult run =
      run_process(kCli + " check-envariance " + dir.file("bell.json") +
                  " swap --k1 0 --k2 1 --emit-witness --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  CHECK(report["verdict"] == "pass");
  const json& check = report["stages"].back()["artifacts"];
  CHECK(check["envariant"] == true);
  CHECK(check.contains("witness"));
  CHECK(check["witness"]["matrix"].size() == 2);
}

TEST_CASE("check-envariance: swap on unequal branches exits 4 with a certificate") {
  TempDir dir;
  write_unequal(dir.file("unequal.json"));
  const ProcessResult run = run_process(
      kCli + " check-envariance " + dir.file("unequal.json") + " swap --json");
  CHECK(run.exit_code == 4);
  const json report = json::parse(run.output);
  CHECK(report["verdict"] == "fail");
  const json& check = report["stages"].back()["artifacts"];
  CHECK(check["envariant"] == false);
  CHECK(check["residual_or_certificate"].get<double>() ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("check-envariance: identity matrix file passes with zero residual") {
  TempDir dir;
  write_bell(dir.file("bell.json"));
  json id;
  id["matrix"] = {{{1.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {1.0, 0.0}}};
  std::ofstream(dir.file("identity.json")) << id.dump() << "\n";
  const ProcessResult run =
      run_process(kCli + " check-envariance " + dir.file("bell.json") +
                  " matrix --operator " + dir.file("identity.json") + " --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  const json& check = report["stages"].back()["artifacts"];
  CHECK(check["envariant"] == true);
  CHECK(check["residual_or_certificate"].get<double>() <= 1e-12);
}

TEST_CASE("check-envariance: non-unitary matrix file exits 3") {
  TempDir dir;
  write_bell(dir.file("bell.json"));
  json doubled;
  doubled["matrix"] = {{{2.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {2.0, 0.0}}};
  std::ofstream(dir.file("doubled.json")) << doubled.dump() << "\n";
  const ProcessResult run =
      run_process(kCli + " check-envariance " + dir.file("bell.json") +
                  " matrix --operator " + dir.file("doubled.json"));
  CHECK(run.exit_code == 3);
}

TEST_CASE("derive on Bell reports (0.5, 0.5) with zero discrepancy") {
  TempDir dir;
  write_bell(dir.file("bell.json"));
  const ProcessResult run =
      run_process(kCli + " derive " + dir.file("bell.json") + " --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  const json& cross = report["stages"].back();
  CHECK(cross["name"] == "oracle_cross_check");
  CHECK(cross["artifacts"]["pipeline_probabilities"][0].get<double>() == 0.5);
  CHECK(cross["artifacts"]["pipeline_probabilities"][1].get<double>() == 0.5);
  CHECK(cross["residuals"]["max_discrepancy"].get<double>() <= 1e-12);
}

TEST_CASE("derive on the 1:2 state reports thirds") {
  TempDir dir;
  write_unequal(dir.file("unequal.json"));
  const ProcessResult run =
      run_process(kCli + " derive " + dir.file("unequal.json") + " --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  const json& cross = report["stages"].back()["artifacts"];
  // Descending modulus order: the 2/3 branch leads.
  CHECK(cross["pipeline_probabilities"][0].get<double>() ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(cross["pipeline_probabilities"][1].get<double>() ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const json& weights =
      report["stages"][3]["artifacts"]["weights"];
  CHECK(weights["counts"][0] == 2);
  CHECK(weights["counts"][1] == 1);
  CHECK(weights["total"] == 3);
}

TEST_CASE("demo singlet reports the anticorrelated joint distribution") {
  TempDir dir;
  const ProcessResult run = run_process(kCli + " demo singlet --out " +
                                        dir.path.string() + " --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  CHECK(report["verdict"] == "pass");
  bool found_ignorance = false;
  for (const auto& stage : report["stages"]) {
    if (stage["name"] == "ignorance_check") {
      found_ignorance = true;
      CHECK(stage["artifacts"]["left"] == true);
      CHECK(stage["artifacts"]["right"] == true);
    }
  }
  CHECK(found_ignorance);
}

TEST_CASE("demo unequal embeds the negative swap verdict but exits 0") {
  TempDir dir;
  const ProcessResult run = run_process(kCli + " demo unequal --out " +
                                        dir.path.string() + " --json");
  REQUIRE(run.exit_code == 0);
  const json report = json::parse(run.output);
  CHECK(report["verdict"] == "pass");
  bool found_swap = false;
  for (const auto& stage : report["stages"]) {
    if (stage["name"] == "swap_envariance") {
      found_swap = true;
      CHECK(stage["artifacts"]["envariant"] == false);
      CHECK(stage["artifacts"]["expected_envariant"] == false);
      CHECK(stage["status"] == "pass");
    }
  }
  CHECK(found_swap);
}

TEST_CASE("human and JSON output agree on the verdict") {
  TempDir dir;
  write_unequal(dir.file("unequal.json"));
  const std::string base =
      kCli + " check-envariance " + dir.file("unequal.json") + " swap";
  const ProcessResult human = run_process(base);
  const ProcessResult machine = run_process(base + " --json");
  CHECK(human.exit_code == machine.exit_code);
  CHECK(human.output.find("verdict: fail") != std::string::npos);
  CHECK(json::parse(machine.output)["verdict"] == "fail");
}

TEST_CASE("batch runs emit identical output for any job count") {
  TempDir dir;
  write_bell(dir.file("a.json"));
  write_unequal(dir.file("b.json"));
  write_product(dir.file("c.json"));
  const std::string files =
      dir.file("a.json") + " " + dir.file("b.json") + " " + dir.file("c.json");
  const ProcessResult serial =
      run_process(kCli + " derive " + files + " --json --jobs 1");
  const ProcessResult parallel =
      run_process(kCli + " derive " + files + " --json --jobs 3");
  CHECK(serial.exit_code == parallel.exit_code);
  CHECK(serial.output == parallel.output);
  CHECK(json::parse(serial.output).size() == 3);
}

TEST_CASE("reports validate against the shipped schema") {
  TempDir dir;
  write_bell(dir.file("bell.json"));
  const json schema = load_schema();
  for (const std::string& cmd :
       {std::string("schmidt ") + dir.file("bell.json"),
        std::string("derive ") + dir.file("bell.json"),
        std::string("oracle ") + dir.file("bell.json"),
        std::string("demo bell --out ") + dir.path.string()}) {
    const ProcessResult run = run_process(kCli + " " + cmd + " --json");
    REQUIRE(run.exit_code == 0);
    CHECK(validates(schema, json::parse(run.output)));
  }
}

TEST_CASE("report JSON round-trips through the library type") {
  TempDir dir;
  const ProcessResult run = run_process(kCli + " demo bell --out " +
                                        dir.path.string() + " --json");
  REQUIRE(run.exit_code == 0);
  const json original = json::parse(run.output);
  const envar::RunReport decoded = envar::report_from_json(original);
  CHECK(envar::to_json(decoded) == original);
}
