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

#include <vector>

#include "envar/tensor_core.hpp"

// Direct Born/trace-rule computations, used as the independent cross-check
// for the branch-counting pipeline. This module deliberately shares nothing
// with the schmidt/envariance code paths beyond tensor_core, so agreement
// between the two routes is a genuine check and not a tautology.

namespace envar {

// Finite list of pairwise-orthogonal projectors on one Hilbert space.
// Construction validates hermiticity, idempotence and pairwise
// orthogonality (Frobenius norms, tolerance 1e-10 by default).
class ProjectorFamily {
 public:
  explicit ProjectorFamily(std::vector<Operator> projectors,
                           double tol = 1e-10);

  const std::vector<Operator>& projectors() const { return projectors_; }
  std::size_t size() const { return projectors_.size(); }
  Index dim() const { return projectors_.front().dim(); }

  // ‖Σ P_i − I‖_F ≤ tol
  bool is_complete(double tol = kNormTol) const;

  // Rank-1 projectors |b_i⟩⟨b_i| from the orthonormal columns of `basis`.
  static ProjectorFamily from_basis(const Matrix& basis);

 private:
  std::vector<Operator> projectors_;
};

// p_i = |⟨b_i|ψ⟩|² over the orthonormal columns of `basis`.
RealVector born_probabilities(const StateVector& state, const Matrix& basis);

// p_i = ⟨ψ|P_i|ψ⟩. For a complete family the entries sum to 1 within
// 1e-10 (checked).
RealVector born_probabilities(const StateVector& state,
                              const ProjectorFamily& family);

// Both sides of the product rule for independent pairs,
//   p(a′|a)·p(b′|b)  vs  |⟨a′⊗b′|a⊗b⟩|²,
// evaluated through two separate routes, plus their absolute difference.
struct FactorizationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};
FactorizationCheck factorization_check(const StateVector& a,
                                       const StateVector& a_prime,
                                       const StateVector& b,
                                       const StateVector& b_prime);

// |⟨ψ₂|U|ψ₁⟩|². U must be unitary within `unitary_tol`; summed over any
// orthonormal final basis this is a resolution of unity, so probability is
// conserved.
double transition_probability(const StateVector& psi1, const StateVector& psi2,
                              const Operator& u,
                              double unitary_tol = kUnitaryTol);

// Additivity of the Born functional over a projector family:
// residual = |p(ΣP_i) − Σ p(P_i)|, and the smallest individual probability
// (which must not be meaningfully negative).
struct AdditivityCheck {
  double residual = 0.0;
  double min_probability = 0.0;
};
AdditivityCheck sigma_additivity_check(const StateVector& state,
                                       const ProjectorFamily& family);

// True iff the left reduced density matrix of the two-factor state is
// proportional to the identity on its support, i.e. the spread of the
// nonzero Schmidt moduli (computed here from the reduced spectrum, not from
// the schmidt module) is at most `tol`.
bool ignorance_check(const StateVector& state, double tol = kDecisionTol);

}  // namespace envar
