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

#include "envar/tensor_core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace envar {

namespace {

void check_factor_list(const std::vector<Index>& factors, Index dim) {
  if (factors.empty()) {
    throw std::invalid_argument("StateVector: factor list must be nonempty");
  }
  Index product = 1;
  for (Index d : factors) {
    if (d < 1) {
      throw std::invalid_argument("StateVector: factor dimensions must be >= 1");
    }
    product *= d;
  }
  if (product != dim) {
    std::ostringstream msg;
    msg << "StateVector: amplitude length " << dim
        << " does not match factor product " << product;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

StateVector::StateVector(Vector amplitudes, std::vector<Index> factors)
    : amplitudes_(std::move(amplitudes)), factors_(std::move(factors)) {
  check_factor_list(factors_, amplitudes_.size());
}

bool StateVector::is_normalized(double tol) const {
  return std::abs(amplitudes_.squaredNorm() - 1.0) <= tol;
}

void StateVector::require_normalized(double tol) const {
  if (!is_normalized(tol)) {
    std::ostringstream msg;
    msg << "state vector is not normalized: |amplitudes|^2 = "
        << amplitudes_.squaredNorm() << " (tolerance " << tol << ")";
    throw InvariantViolation(msg.str());
  }
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) {
    throw InvariantViolation("cannot normalize the zero vector");
  }
  return StateVector(amplitudes_ / n, factors_);
}

StateVector StateVector::group_bipartite(std::size_t left_count) const {
  if (left_count == 0 || left_count >= factors_.size()) {
    throw std::invalid_argument(
        "group_bipartite: split must leave at least one factor on each side");
  }
  Index left = 1, right = 1;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    (i < left_count ? left : right) *= factors_[i];
  }
  return StateVector(amplitudes_, {left, right});
}

Operator::Operator(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("Operator: matrix must be square");
  }
  if (matrix_.rows() == 0) {
    throw std::invalid_argument("Operator: matrix must be nonempty");
  }
}

double Operator::unitarity_defect() const {
  return (matrix_.adjoint() * matrix_ -
          Matrix::Identity(matrix_.rows(), matrix_.cols()))
      .norm();
}

bool Operator::is_unitary(double tol) const {
  return unitarity_defect() <= tol;
}

void Operator::require_unitary(double tol) const {
  const double defect = unitarity_defect();
  if (defect > tol) {
    std::ostringstream msg;
    msg << "operator is not unitary: |U'U - I|_F = " << defect
        << " (tolerance " << tol << ")";
    throw InvariantViolation(msg.str());
  }
}

double Operator::hermiticity_defect() const {
  return (matrix_ - matrix_.adjoint()).norm();
}

bool Operator::is_hermitian(double tol) const {
  return hermiticity_defect() <= tol;
}

void Operator::require_hermitian(double tol) const {
  const double defect = hermiticity_defect();
  if (defect > tol) {
    std::ostringstream msg;
    msg << "operator is not Hermitian: |A - A'|_F = " << defect
        << " (tolerance " << tol << ")";
    throw InvariantViolation(msg.str());
  }
}

DensityMatrix::DensityMatrix(Matrix matrix, const Tolerances& tol)
    : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  }
  const double herm_defect = (matrix_ - matrix_.adjoint()).norm();
  if (herm_defect > tol.hermitian) {
    std::ostringstream msg;
    msg << "density matrix is not Hermitian: defect " << herm_defect;
    throw InvariantViolation(msg.str());
  }
  const double trace_defect = std::abs(matrix_.trace() - Complex(1.0));
  if (trace_defect > tol.norm) {
    std::ostringstream msg;
    msg << "density matrix trace deviates from 1 by " << trace_defect;
    throw InvariantViolation(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_,
                                               Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -tol.psd) {
    std::ostringstream msg;
    msg << "density matrix has negative eigenvalue " << min_eig;
    throw InvariantViolation(msg.str());
  }
}

RealVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_,
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

StateVector basis_state(Index dim, Index index) {
  if (index < 0 || index >= dim) {
    throw std::invalid_argument("basis_state: index out of range");
  }
  Vector amps = Vector::Zero(dim);
  amps[index] = 1.0;
  return StateVector(std::move(amps), {dim});
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  a.require_normalized();
  b.require_normalized();
  Vector amps(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i) {
    amps.segment(i * b.dim(), b.dim()) = a.amplitudes()[i] * b.amplitudes();
  }
  std::vector<Index> factors = a.factors();
  factors.insert(factors.end(), b.factors().begin(), b.factors().end());
  return StateVector(std::move(amps), std::move(factors));
}

namespace detail {

std::vector<Index> factor_strides(const std::vector<Index>& factors) {
  std::vector<Index> strides(factors.size(), 1);
  for (std::size_t i = factors.size(); i-- > 1;) {
    strides[i - 1] = strides[i] * factors[i];
  }
  return strides;
}

double hermitian_operator_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

Operator embed_on_factor(const Operator& u, std::size_t target,
                         const std::vector<Index>& factors) {
  if (target >= factors.size()) {
    throw std::invalid_argument("embed_on_factor: target factor out of range");
  }
  if (u.dim() != factors[target]) {
    std::ostringstream msg;
    msg << "embed_on_factor: operator dimension " << u.dim()
        << " does not match factor dimension " << factors[target];
    throw std::invalid_argument(msg.str());
  }
  Index before = 1, after = 1;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i < target) before *= factors[i];
    if (i > target) after *= factors[i];
  }
  const Index d = u.dim();
  const Index dim = before * d * after;
  Matrix out = Matrix::Zero(dim, dim);
  // I_before ⊗ u ⊗ I_after under the last-factor-fastest flat index.
  for (Index b = 0; b < before; ++b) {
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) {
        const Complex value = u.matrix()(r, c);
        if (value == Complex(0.0)) continue;
        const Index row0 = (b * d + r) * after;
        const Index col0 = (b * d + c) * after;
        for (Index a = 0; a < after; ++a) {
          out(row0 + a, col0 + a) = value;
        }
      }
    }
  }
  return Operator(std::move(out));
}

StateVector apply(const Operator& op, const StateVector& state) {
  if (op.dim() != state.dim()) {
    std::ostringstream msg;
    msg << "apply: operator dimension " << op.dim()
        << " does not match state dimension " << state.dim();
    throw std::invalid_argument(msg.str());
  }
  return StateVector(op.matrix() * state.amplitudes(), state.factors());
}

DensityMatrix partial_trace(const StateVector& state,
                            const std::vector<std::size_t>& keep) {
  const std::size_t n = state.num_factors();
  if (keep.empty() || keep.size() >= n) {
    throw std::invalid_argument(
        "partial_trace: keep set must be a nonempty proper subset of factors");
  }
  std::vector<bool> kept(n, false);
  for (std::size_t f : keep) {
    if (f >= n) {
      throw std::invalid_argument("partial_trace: factor index out of range");
    }
    if (kept[f]) {
      throw std::invalid_argument("partial_trace: duplicate factor index");
    }
    kept[f] = true;
  }
  state.require_normalized();

  const auto& factors = state.factors();
  const auto strides = detail::factor_strides(factors);
  Index keep_dim = 1, rest_dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    (kept[i] ? keep_dim : rest_dim) *= factors[i];
  }

  // Reshape |ψ⟩ into a keep_dim × rest_dim matrix; then ρ_keep = M M†.
  Matrix reshaped(keep_dim, rest_dim);
  for (Index flat = 0; flat < state.dim(); ++flat) {
    Index k = 0, r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Index digit = (flat / strides[i]) % factors[i];
      if (kept[i]) {
        k = k * factors[i] + digit;
      } else {
        r = r * factors[i] + digit;
      }
    }
    reshaped(k, r) = state.amplitudes()[flat];
  }
  return DensityMatrix(reshaped * reshaped.adjoint());
}

Operator propagate(const Operator& hamiltonian, double t, double hbar) {
  hamiltonian.require_hermitian();
  if (hbar == 0.0) {
    throw std::invalid_argument("propagate: hbar must be nonzero");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian.matrix());
  const RealVector& eigs = solver.eigenvalues();
  Vector phases(eigs.size());
  for (Index i = 0; i < eigs.size(); ++i) {
    phases[i] = std::exp(Complex(0.0, -eigs[i] * t / hbar));
  }
  Matrix u = solver.eigenvectors() * phases.asDiagonal() *
             solver.eigenvectors().adjoint();
  return Operator(std::move(u));
}

}  // namespace envar
