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

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace envar {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Default tolerances. Double-precision SVD/eigensolver accuracy leaves a
// wide margin at 1e-10; every check that consumes one of these accepts an
// override.
inline constexpr double kNormTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;

// Default tolerance for yes/no decisions that compare two reduced states
// (looser than the construction tolerances: two SVDs compound error).
inline constexpr double kDecisionTol = 1e-8;

struct Tolerances {
  double norm = kNormTol;
  double unitary = kUnitaryTol;
  double hermitian = kHermitianTol;
  double psd = kPsdTol;
};

// Thrown when a value fails one of its contract checks (normalization,
// unitarity, hermiticity, positivity, reconstruction residual, ...).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Complex amplitude vector over an ordered list of tensor factors.
//
// Flat index convention (shared by every module): the LAST factor varies
// fastest, i.e. for factors (d1, d2) the amplitude of |i⟩⊗|j⟩ sits at flat
// index i*d2 + j.
//
// Unit norm is a contract checked at the point of use, not by the
// constructor: applying a non-unitary operator legitimately produces an
// unnormalized vector, which downstream validation must flag. Call
// require_normalized() wherever a unit vector is a precondition.
class StateVector {
 public:
  StateVector(Vector amplitudes, std::vector<Index> factors);

  const Vector& amplitudes() const { return amplitudes_; }
  const std::vector<Index>& factors() const { return factors_; }
  Index dim() const { return amplitudes_.size(); }
  Index factor_dim(std::size_t i) const { return factors_.at(i); }
  std::size_t num_factors() const { return factors_.size(); }

  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tol = kNormTol) const;
  void require_normalized(double tol = kNormTol) const;

  // Copy with amplitudes scaled to unit norm.
  StateVector normalized() const;

  // Same amplitudes regrouped into two factors: the first `left_count`
  // factors become one factor, the rest the other. Pure relabeling; no
  // data movement because groupings of adjacent factors are contiguous
  // under the flat index convention.
  StateVector group_bipartite(std::size_t left_count) const;

 private:
  Vector amplitudes_;
  std::vector<Index> factors_;
};

// Square complex matrix, optionally checked as unitary or Hermitian at the
// point of use.
class Operator {
 public:
  explicit Operator(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }

  // Frobenius norm of U†U − I.
  double unitarity_defect() const;
  bool is_unitary(double tol = kUnitaryTol) const;
  void require_unitary(double tol = kUnitaryTol) const;

  // Frobenius norm of A − A†.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = kHermitianTol) const;
  void require_hermitian(double tol = kHermitianTol) const;

 private:
  Matrix matrix_;
};

// Reduced state of a subsystem. Construction enforces hermiticity, unit
// trace and positivity (up to the given tolerances), so a DensityMatrix is
// always a valid state.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix matrix, const Tolerances& tol = {});

  const Matrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }

  // Eigenvalues in descending order.
  RealVector eigenvalues() const;

 private:
  Matrix matrix_;
};

// Computational basis vector |index⟩ of a d-dimensional factor.
StateVector basis_state(Index dim, Index index);

// |a⟩⊗|b⟩; factors are concatenated. Both inputs must be normalized.
StateVector tensor_product(const StateVector& a, const StateVector& b);

// The D×D operator acting as `u` on factor `target` and as identity on
// every other factor, D = Π factors.
Operator embed_on_factor(const Operator& u, std::size_t target,
                         const std::vector<Index>& factors);

// Matrix-vector product. No renormalization: a unitary operator preserves
// the norm, and anything else is meant to be caught downstream.
StateVector apply(const Operator& op, const StateVector& state);

// Tr_rest |ψ⟩⟨ψ| over the factors named in `keep` (kept factors stay in
// their original relative order). `keep` must be a nonempty proper subset.
// The input must be normalized, otherwise the result has no unit trace.
//
// Note on layering: reduced density matrices presuppose the trace rule for
// probabilities. The envariance decision procedure is built on top of this
// function, which makes that dependency part of the library's explicit
// structure; the independent probability oracle lives in born_oracle and
// never touches the envariance code path.
DensityMatrix partial_trace(const StateVector& state,
                            const std::vector<std::size_t>& keep);

// U = exp(−i H t / ħ) via the spectral decomposition of the Hermitian H.
// Unitary by construction up to eigensolver error.
Operator propagate(const Operator& hamiltonian, double t, double hbar = 1.0);

namespace detail {
// Strides of the flat index (last factor fastest).
std::vector<Index> factor_strides(const std::vector<Index>& factors);
// Largest eigenvalue magnitude of a Hermitian matrix (operator 2-norm).
double hermitian_operator_norm(const Matrix& m);
}  // namespace detail

}  // namespace envar
