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

namespace envar {

// Relative singular-value cutoff below which branches are treated as
// numerical noise and dropped.
inline constexpr double kRankTol = 1e-12;

// Biorthonormal decomposition of a bipartite state,
//
//   |ψ⟩ = Σ_k a_k |s_k⟩ ⊗ |ε_k⟩,   a_k = moduli[k] · e^{−i·phases[k]},
//
// with orthonormal columns |s_k⟩ (left factor) and |ε_k⟩ (right factor)
// and moduli sorted descending.
//
// Phase convention: each basis column is rotated so that its
// largest-modulus component is real and positive (ties broken by lowest
// component index); the rotation phases are absorbed into the coefficient
// phase φ_k ∈ (−π, π]. Reconstruction with the stored a_k reproduces the
// source amplitudes exactly — there is no global-phase quotient anywhere.
//
// When several moduli coincide the decomposition is not unique; this type
// guarantees only the reconstruction contract, descending modulus order,
// and a deterministic order within ties (lexicographic on the left-basis
// column amplitudes).
class SchmidtDecomposition {
 public:
  SchmidtDecomposition(RealVector moduli, RealVector phases, Matrix left_basis,
                       Matrix right_basis, double tol = kNormTol);

  int rank() const { return static_cast<int>(moduli_.size()); }
  const RealVector& moduli() const { return moduli_; }
  const RealVector& phases() const { return phases_; }
  const Matrix& left_basis() const { return left_basis_; }
  const Matrix& right_basis() const { return right_basis_; }
  Index left_dim() const { return left_basis_.rows(); }
  Index right_dim() const { return right_basis_.rows(); }

  // a_k = moduli[k] · e^{−i·phases[k]}
  Complex coefficient(int k) const;

 private:
  RealVector moduli_;
  RealVector phases_;
  Matrix left_basis_;
  Matrix right_basis_;
};

// SVD of the left_dim × right_dim coefficient matrix of a two-factor
// state. Singular values below rank_tolerance (relative to the largest)
// are dropped. Callers with more than two factors group them first
// (StateVector::group_bipartite).
SchmidtDecomposition schmidt_decompose(const StateVector& state,
                                       double rank_tolerance = kRankTol);

// Σ_k a_k |s_k⟩⊗|ε_k⟩ as a two-factor StateVector.
StateVector reconstruct(const SchmidtDecomposition& dec);

// Same, with the target factor pair validated against the stored bases.
StateVector reconstruct(const SchmidtDecomposition& dec, Index left_dim,
                        Index right_dim);

// Branch indices grouped into classes of equal modulus: starting from the
// largest remaining modulus, a class collects every index whose modulus is
// within modulus_tolerance of the class leader, so members of one class
// differ pairwise by at most modulus_tolerance. These are the orbits of
// norm-preserving branch swaps.
std::vector<std::vector<int>> swappable_classes(const SchmidtDecomposition& dec,
                                                double modulus_tolerance);

}  // namespace envar
