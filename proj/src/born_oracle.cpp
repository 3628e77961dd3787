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

#include "envar/born_oracle.hpp"

#include <cmath>
#include <sstream>

namespace envar {

ProjectorFamily::ProjectorFamily(std::vector<Operator> projectors, double tol)
    : projectors_(std::move(projectors)) {
  if (projectors_.empty()) {
    throw std::invalid_argument("ProjectorFamily: need at least one projector");
  }
  const Index d = projectors_.front().dim();
  for (std::size_t i = 0; i < projectors_.size(); ++i) {
    const Matrix& p = projectors_[i].matrix();
    if (projectors_[i].dim() != d) {
      throw std::invalid_argument("ProjectorFamily: dimensions disagree");
    }
    const double herm = (p - p.adjoint()).norm();
    if (herm > tol) {
      std::ostringstream msg;
      msg << "projector " << i << " is not Hermitian (defect " << herm << ")";
      throw InvariantViolation(msg.str());
    }
    const double idem = (p * p - p).norm();
    if (idem > tol) {
      std::ostringstream msg;
      msg << "projector " << i << " is not idempotent (defect " << idem << ")";
      throw InvariantViolation(msg.str());
    }
    for (std::size_t j = 0; j < i; ++j) {
      const double overlap = (p * projectors_[j].matrix()).norm();
      if (overlap > tol) {
        std::ostringstream msg;
        msg << "projectors " << i << " and " << j
            << " are not orthogonal (|P_i P_j|_F = " << overlap << ")";
        throw InvariantViolation(msg.str());
      }
    }
  }
}

bool ProjectorFamily::is_complete(double tol) const {
  Matrix sum = Matrix::Zero(dim(), dim());
  for (const Operator& p : projectors_) sum += p.matrix();
  return (sum - Matrix::Identity(dim(), dim())).norm() <= tol;
}

ProjectorFamily ProjectorFamily::from_basis(const Matrix& basis) {
  std::vector<Operator> projectors;
  projectors.reserve(basis.cols());
  for (Index i = 0; i < basis.cols(); ++i) {
    projectors.emplace_back(Matrix(basis.col(i) * basis.col(i).adjoint()));
  }
  return ProjectorFamily(std::move(projectors));
}

RealVector born_probabilities(const StateVector& state, const Matrix& basis) {
  state.require_normalized();
  if (basis.rows() != state.dim()) {
    throw std::invalid_argument(
        "born_probabilities: basis dimension does not match state");
  }
  const double defect =
      (basis.adjoint() * basis - Matrix::Identity(basis.cols(), basis.cols()))
          .norm();
  if (defect > 1e-10) {
    std::ostringstream msg;
    msg << "born_probabilities: basis columns are not orthonormal (defect "
        << defect << ")";
    throw InvariantViolation(msg.str());
  }
  RealVector p(basis.cols());
  for (Index i = 0; i < basis.cols(); ++i) {
    p[i] = std::norm(basis.col(i).dot(state.amplitudes()));
  }
  return p;
}

RealVector born_probabilities(const StateVector& state,
                              const ProjectorFamily& family) {
  state.require_normalized();
  if (family.dim() != state.dim()) {
    throw std::invalid_argument(
        "born_probabilities: projector dimension does not match state");
  }
  RealVector p(static_cast<Index>(family.size()));
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Complex value = state.amplitudes().dot(family.projectors()[i].matrix() *
                                                 state.amplitudes());
    p[static_cast<Index>(i)] = value.real();
  }
  if (family.is_complete() && std::abs(p.sum() - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "born_probabilities: complete family sums to " << p.sum();
    throw InvariantViolation(msg.str());
  }
  return p;
}

FactorizationCheck factorization_check(const StateVector& a,
                                       const StateVector& a_prime,
                                       const StateVector& b,
                                       const StateVector& b_prime) {
  if (a.dim() != a_prime.dim() || b.dim() != b_prime.dim()) {
    throw std::invalid_argument("factorization_check: dimension mismatch");
  }
  FactorizationCheck result;
  result.lhs = std::norm(a_prime.amplitudes().dot(a.amplitudes())) *
               std::norm(b_prime.amplitudes().dot(b.amplitudes()));
  const StateVector joint = tensor_product(a, b);
  const StateVector joint_prime = tensor_product(a_prime, b_prime);
  result.rhs = std::norm(joint_prime.amplitudes().dot(joint.amplitudes()));
  result.residual = std::abs(result.lhs - result.rhs);
  return result;
}

double transition_probability(const StateVector& psi1, const StateVector& psi2,
                              const Operator& u, double unitary_tol) {
  if (u.dim() != psi1.dim() || psi1.dim() != psi2.dim()) {
    throw std::invalid_argument("transition_probability: dimension mismatch");
  }
  u.require_unitary(unitary_tol);
  return std::norm(psi2.amplitudes().dot(u.matrix() * psi1.amplitudes()));
}

AdditivityCheck sigma_additivity_check(const StateVector& state,
                                       const ProjectorFamily& family) {
  state.require_normalized();
  if (family.dim() != state.dim()) {
    throw std::invalid_argument(
        "sigma_additivity_check: dimension mismatch");
  }
  Matrix sum = Matrix::Zero(family.dim(), family.dim());
  for (const Operator& p : family.projectors()) sum += p.matrix();
  const double p_of_sum =
      state.amplitudes().dot(sum * state.amplitudes()).real();

  AdditivityCheck result;
  double total = 0.0;
  result.min_probability = 1.0;
  for (const Operator& p : family.projectors()) {
    const double value =
        state.amplitudes().dot(p.matrix() * state.amplitudes()).real();
    total += value;
    result.min_probability = std::min(result.min_probability, value);
  }
  result.residual = std::abs(p_of_sum - total);
  return result;
}

bool ignorance_check(const StateVector& state, double tol) {
  if (state.num_factors() != 2) {
    throw std::invalid_argument(
        "ignorance_check: state must have exactly two factors");
  }
  // Support cutoff on the reduced spectrum. The eigensolver noise floor is
  // ~1e-16 relative to the top eigenvalue, so anything below 1e-14 is not a
  // resolvable branch.
  constexpr double kSupportCutoff = 1e-14;
  const DensityMatrix reduced = partial_trace(state, {0});
  const RealVector eigs = reduced.eigenvalues();  // descending
  const double top = eigs[0];
  double smallest = top;
  for (Index i = 1; i < eigs.size(); ++i) {
    if (eigs[i] <= kSupportCutoff * top) break;
    smallest = eigs[i];
  }
  return std::sqrt(top) - std::sqrt(std::max(smallest, 0.0)) <= tol;
}

}  // namespace envar
