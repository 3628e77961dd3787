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

#include <optional>
#include <vector>

#include "envar/schmidt.hpp"
#include "envar/tensor_core.hpp"

namespace envar {

// Residual threshold a returned witness must meet under verify_undo.
inline constexpr double kWitnessTol = 1e-9;

// Thrown when the reduced states say a witness exists but the construction
// cannot produce one that passes verify_undo (typically for inputs sitting
// on the decision-tolerance boundary, where the two reduced states differ
// by just under the tolerance). Never silently reported as "not envariant".
class WitnessConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Outcome of the envariance decision for a bipartite state and a local
// unitary on its left factor. Exactly one of witness/certificate is set:
//  - envariant: `witness` holds a right-factor unitary that undoes the
//    action, with `witness_residual` its verify_undo residual (≤ 1e-9);
//  - not envariant: `certificate` holds the operator-norm distance between
//    the left reduced density matrices before and after (> tolerance).
struct EnvarianceVerdict {
  bool envariant = false;
  std::optional<Operator> witness;
  std::optional<double> certificate;
  double witness_residual = 0.0;
};

// Unitary on the left factor with u|s_k⟩ = e^{i·phi[k]}|s_k⟩ for every
// branch of `dec`, identity on the orthogonal complement of the branch
// span.
Operator phase_unitary(const SchmidtDecomposition& dec, const RealVector& phi);

// Unitary on the right factor with u|ε_k⟩ = e^{−i(phi[k] + 2π·l[k])}|ε_k⟩,
// identity on the complement. Composed after the matching phase_unitary it
// restores the state for any choice of the integers l.
Operator phase_counter(const SchmidtDecomposition& dec, const RealVector& phi,
                       const std::vector<long>& l);

// Unitary on the left factor exchanging branches k1 and k2:
//   e^{i·phi12}|s_k1⟩⟨s_k2| + e^{−i·phi12}|s_k2⟩⟨s_k1|,
// identity on the complement of span{|s_k1⟩, |s_k2⟩}.
Operator swap_unitary(const SchmidtDecomposition& dec, int k1, int k2,
                      double phi12);

// Right-factor unitary undoing swap_unitary(dec, k1, k2, phi12) when the
// two branch moduli are equal (within modulus_tolerance; unequal moduli
// are a precondition violation):
//   e^{−iθ}|ε_k1⟩⟨ε_k2| + e^{+iθ}|ε_k2⟩⟨ε_k1|,
//   θ = phi12 + φ_k1 − φ_k2 + 2π·l12,
// with φ the stored coefficient phases of `dec`.
Operator counterswap_unitary(const SchmidtDecomposition& dec, int k1, int k2,
                             double phi12, long l12,
                             double modulus_tolerance = kDecisionTol);

struct UndoCheck {
  bool ok = false;
  double residual = 0.0;
};

// Residual ‖(1⊗u_E)(u_S⊗1)|ψ⟩ − |ψ⟩‖ against `tol`. Equality is literal:
// there is no global-phase quotient, since the integer freedom in the
// counter-unitaries exists precisely to absorb phases.
UndoCheck verify_undo(const StateVector& state, const Operator& u_s,
                      const Operator& u_e, double tol);

// Decides whether the two-factor `state` is envariant under the left-factor
// unitary `u_s`: a right-factor undo exists iff the left reduced density
// matrix is unchanged, so the procedure compares partial_trace before and
// after (this is where the library's reduced-density-matrix machinery
// enters the decision — see the layering note on partial_trace). On a
// positive decision an explicit witness is built by aligning the two right
// Schmidt bases, transporting the left-basis change of basis across
// degenerate blocks, and extending by identity on the kernel; the witness
// is validated with verify_undo before it is returned.
EnvarianceVerdict check_envariance(const StateVector& state,
                                   const Operator& u_s,
                                   double tol = kDecisionTol);

}  // namespace envar
