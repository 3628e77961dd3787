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

#include <array>
#include <cstdint>
#include <vector>

#include "envar/schmidt.hpp"
#include "envar/tensor_core.hpp"

// Reduction of arbitrary branch weights to the equal-norm case: rationalize
// the squared moduli as m_k/M, attach an M-dimensional ancilla A whose k-th
// block carries m_k basis states, then couple A to the environment so the
// state splits into M branches of equal modulus 1/√M. Counting branches per
// coarse outcome yields p(s_k) = m_k/M.

namespace envar {

// Natural branch multiplicities m_k ≥ 1 with total = Σ m_k.
struct BranchWeights {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  void validate() const;
  // First fine-grained index of block k (blocks are consecutive).
  std::int64_t block_offset(std::size_t k) const;
};

struct Rationalization {
  BranchWeights weights;
  // max_k |m_k/M − moduli_k²|
  double max_error = 0.0;
};

// Best rational approximation m_k/M of the squared moduli with M bounded by
// max_denominator: for every admissible M the fractional parts are rounded
// by largest remainder (with every count clamped to ≥ 1 and the clamp
// surplus taken back from the entries that exceed their target most), and
// the M with the smallest maximum elementwise error wins, ties to the
// smallest M. Deterministic, and the error never increases when
// max_denominator grows.
Rationalization commensurate_weights(const RealVector& moduli,
                                     std::int64_t max_denominator);

// The three-factor state (A, S, E) with amplitude 1/√M on |a_j⟩⊗|s_k⟩⊗|ε_k⟩
// for every fine index j in block k: equivalently Σ_k √(m_k/M) |A_k⟩|s_k⟩|ε_k⟩
// with |A_k⟩ the normalized sum over block k. Coefficient phases of `dec`
// are dropped here; only the moduli enter.
StateVector attach_counterweight(const SchmidtDecomposition& dec,
                                 const BranchWeights& weights);

// Result of the fine-graining interaction: every fine branch j carries the
// same modulus 1/√M, and branch_index maps j back to its coarse outcome.
struct FineGrainedState {
  StateVector state;                   // factors (M, d_S, M)
  std::vector<int> branch_index;       // size M
  Vector branch_amplitudes;            // size M, coefficients of |a_j, s_k, e_j⟩
};

// Applies the A-controlled coupling ε_k ↦ e_j on the environment, replacing
// E by the M-dimensional space spanned by the coupling targets. The input
// must have the structure produced by attach_counterweight with the same
// weights (validated), and the coupling is checked to preserve the inner
// products of its domain vectors before it is applied.
FineGrainedState fine_grain(const StateVector& tripartite,
                            const BranchWeights& weights);

struct PipelineOptions {
  std::int64_t max_denominator = 10000;
  // Envariance decision tolerance for the branch-pair checks.
  double decision_tolerance = kDecisionTol;
  // The dense (A, S, E′) objects are built whenever M ≤ explicit_cap; above
  // it (the state would have M²·d_S amplitudes) the construction is carried
  // out on the branch ledger instead and pair checks run on two-branch
  // restrictions, which the swaps never couple to the remaining branches.
  std::int64_t explicit_cap = 64;
  // Upper bound on the number of fine-branch pairs given a full
  // check_envariance run; beyond it a seeded deterministic subsample is
  // checked.
  std::size_t pair_check_limit = 100;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  // p(s_k) = m_k/M, ordered like the Schmidt branches (descending modulus).
  RealVector probabilities;
  // Rationalization error bound: max_k |m_k/M − moduli_k²|.
  double approximation_error = 0.0;
  BranchWeights weights;
  std::vector<int> branch_index;
  // Whether the dense fine-grained state was materialized.
  bool materialized = false;
  std::array<Index, 3> fine_dims{0, 0, 0};  // (M, d_S, M)
  std::size_t pairs_total = 0;
  std::size_t pairs_checked = 0;
  double max_pair_residual = 0.0;
  // max_j | |c_j| − 1/√M | over the fine branches.
  double branch_modulus_deviation = 0.0;
};

// Full pipeline for a two-factor state: Schmidt decomposition →
// commensurate_weights → attach_counterweight → fine_grain → count fine
// branches per coarse outcome. Before returning, swap envariance of the
// fine-grained branch pairs is re-checked through check_envariance (all
// pairs, or a seeded subsample above pair_check_limit) rather than assumed;
// a failed pair check is an InvariantViolation.
PipelineResult envariant_probabilities(const StateVector& state,
                                       const PipelineOptions& options = {});
PipelineResult envariant_probabilities(const StateVector& state,
                                       std::int64_t max_denominator);

}  // namespace envar
