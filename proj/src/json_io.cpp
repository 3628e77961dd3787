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

#include "envar/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace envar {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open file: " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON in ") + path + ": " +
                     e.what());
  }
}

Complex parse_amplitude(const nlohmann::json& entry, const char* what) {
  if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
      !entry[1].is_number()) {
    throw ParseError(std::string(what) +
                     " entries must be [re, im] number pairs");
  }
  return {entry[0].get<double>(), entry[1].get<double>()};
}

nlohmann::json amplitude_to_json(const Complex& value) {
  return nlohmann::json::array({value.real(), value.imag()});
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(amplitude_to_json(v[i]));
  return out;
}

nlohmann::json real_vector_to_json(const RealVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json matrix_columns_to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Index c = 0; c < m.cols(); ++c) out.push_back(vector_to_json(m.col(c)));
  return out;
}

}  // namespace

LoadedState load_state(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("factors") ||
      !doc.contains("amplitudes")) {
    throw ParseError(
        "state document must be an object with \"factors\" and "
        "\"amplitudes\"");
  }
  const nlohmann::json& jfactors = doc["factors"];
  if (!jfactors.is_array() || jfactors.empty()) {
    throw ParseError("\"factors\" must be a nonempty array of dimensions");
  }
  std::vector<Index> factors;
  Index dim = 1;
  for (const auto& f : jfactors) {
    if (!f.is_number_integer() || f.get<std::int64_t>() < 1) {
      throw ParseError("factor dimensions must be positive integers");
    }
    factors.push_back(f.get<Index>());
    dim *= factors.back();
  }
  const nlohmann::json& jamps = doc["amplitudes"];
  if (!jamps.is_array()) {
    throw ParseError("\"amplitudes\" must be an array of [re, im] pairs");
  }
  if (static_cast<Index>(jamps.size()) != dim) {
    std::ostringstream msg;
    msg << "amplitude count " << jamps.size()
        << " does not match factor product " << dim;
    throw ParseError(msg.str());
  }
  Vector amps(dim);
  for (Index i = 0; i < dim; ++i) {
    amps[i] = parse_amplitude(jamps[static_cast<std::size_t>(i)], "amplitude");
  }

  const double norm = amps.norm();
  const double deviation = std::abs(norm - 1.0);
  if (deviation > kIngestNormTol) {
    std::ostringstream msg;
    msg << "state norm " << norm << " deviates from 1 by more than "
        << kIngestNormTol;
    throw ParseError(msg.str());
  }
  LoadedState out{StateVector(amps / norm, std::move(factors)), deviation,
                  deviation > kNormTol};
  return out;
}

LoadedState load_state_file(const std::string& path) {
  return load_state(read_json_file(path));
}

nlohmann::json state_to_json(const StateVector& state) {
  nlohmann::json out;
  out["factors"] = nlohmann::json::array();
  for (Index d : state.factors()) out["factors"].push_back(d);
  out["amplitudes"] = vector_to_json(state.amplitudes());
  return out;
}

void save_state_file(const std::string& path, const StateVector& state) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write file: " + path);
  }
  out << state_to_json(state).dump(2) << "\n";
}

Operator load_operator(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("matrix")) {
    throw ParseError("operator document must be an object with \"matrix\"");
  }
  const nlohmann::json& rows = doc["matrix"];
  if (!rows.is_array() || rows.empty()) {
    throw ParseError("\"matrix\" must be a nonempty array of rows");
  }
  const std::size_t d = rows.size();
  Matrix m(static_cast<Index>(d), static_cast<Index>(d));
  for (std::size_t r = 0; r < d; ++r) {
    if (!rows[r].is_array() || rows[r].size() != d) {
      throw ParseError("operator matrix must be square");
    }
    for (std::size_t c = 0; c < d; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_amplitude(rows[r][c], "matrix");
    }
  }
  return Operator(std::move(m));
}

Operator load_operator_file(const std::string& path) {
  return load_operator(read_json_file(path));
}

nlohmann::json operator_to_json(const Operator& op) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < op.dim(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < op.dim(); ++c) {
      row.push_back(amplitude_to_json(op.matrix()(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"matrix", std::move(rows)}};
}

nlohmann::json schmidt_to_json(const SchmidtDecomposition& dec) {
  nlohmann::json out;
  out["rank"] = dec.rank();
  out["moduli"] = real_vector_to_json(dec.moduli());
  out["phases"] = real_vector_to_json(dec.phases());
  out["left_basis"] = matrix_columns_to_json(dec.left_basis());
  out["right_basis"] = matrix_columns_to_json(dec.right_basis());
  return out;
}

nlohmann::json verdict_to_json(const EnvarianceVerdict& verdict,
                               bool include_witness) {
  nlohmann::json out;
  out["envariant"] = verdict.envariant;
  out["residual_or_certificate"] = verdict.envariant
                                       ? verdict.witness_residual
                                       : verdict.certificate.value();
  if (verdict.envariant && include_witness) {
    out["witness"] = operator_to_json(verdict.witness.value());
  }
  return out;
}

nlohmann::json weights_to_json(const BranchWeights& weights) {
  nlohmann::json out;
  out["counts"] = weights.counts;
  out["total"] = weights.total;
  return out;
}

nlohmann::json pipeline_to_json(const PipelineResult& result) {
  nlohmann::json out;
  out["probabilities"] = real_vector_to_json(result.probabilities);
  out["approximation_error"] = result.approximation_error;
  out["weights"] = weights_to_json(result.weights);
  out["fine_dims"] = {result.fine_dims[0], result.fine_dims[1],
                      result.fine_dims[2]};
  out["materialized"] = result.materialized;
  out["branch_index"] = result.branch_index;
  out["pairs_total"] = result.pairs_total;
  out["pairs_checked"] = result.pairs_checked;
  out["max_pair_residual"] = result.max_pair_residual;
  out["branch_modulus_deviation"] = result.branch_modulus_deviation;
  return out;
}

}  // namespace envar
