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

#include "envar/envariance.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace envar {

namespace {

// Singular values closer than this are treated as one degenerate block
// when aligning Schmidt bases for witness construction.
constexpr double kDegeneracyGap = 1e-7;

void check_branch_index(const SchmidtDecomposition& dec, int k) {
  if (k < 0 || k >= dec.rank()) {
    std::ostringstream msg;
    msg << "branch index " << k << " out of range for rank " << dec.rank();
    throw std::invalid_argument(msg.str());
  }
}

// Identity plus a replacement of the action on the given orthonormal
// columns: I − Σ|b_k⟩⟨b_k| + Σ (action col k)⟨b_k|.
Matrix identity_except(const Matrix& basis, const Matrix& action) {
  const Index d = basis.rows();
  Matrix out = Matrix::Identity(d, d);
  out -= basis * basis.adjoint();
  out += action * basis.adjoint();
  return out;
}

// Unitary factor of the polar decomposition of a (square) matrix.
Matrix polar_unitary(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
coefficient_matrix(const StateVector& state) {
  return {state.amplitudes().data(), state.factor_dim(0), state.factor_dim(1)};
}

StateVector from_coefficient_matrix(const Matrix& coeff) {
  Vector amps(coeff.size());
  Eigen::Map<Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(amps.data(), coeff.rows(),
                                             coeff.cols()) = coeff;
  return StateVector(std::move(amps), {coeff.rows(), coeff.cols()});
}

void require_bipartite(const StateVector& state, const char* who) {
  if (state.num_factors() != 2) {
    std::ostringstream msg;
    msg << who << ": state must have exactly two factors "
        << "(group factors into a bipartition first)";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Operator phase_unitary(const SchmidtDecomposition& dec, const RealVector& phi) {
  if (phi.size() != dec.rank()) {
    throw std::invalid_argument(
        "phase_unitary: need one phase per Schmidt branch");
  }
  Matrix action(dec.left_dim(), dec.rank());
  for (int k = 0; k < dec.rank(); ++k) {
    action.col(k) = std::exp(Complex(0.0, phi[k])) * dec.left_basis().col(k);
  }
  return Operator(identity_except(dec.left_basis(), action));
}

Operator phase_counter(const SchmidtDecomposition& dec, const RealVector& phi,
                       const std::vector<long>& l) {
  if (phi.size() != dec.rank() ||
      l.size() != static_cast<std::size_t>(dec.rank())) {
    throw std::invalid_argument(
        "phase_counter: need one phase and one integer per Schmidt branch");
  }
  Matrix action(dec.right_dim(), dec.rank());
  for (int k = 0; k < dec.rank(); ++k) {
    const double theta = phi[k] + 2.0 * std::numbers::pi * static_cast<double>(l[k]);
    action.col(k) = std::exp(Complex(0.0, -theta)) * dec.right_basis().col(k);
  }
  return Operator(identity_except(dec.right_basis(), action));
}

Operator swap_unitary(const SchmidtDecomposition& dec, int k1, int k2,
                      double phi12) {
  check_branch_index(dec, k1);
  check_branch_index(dec, k2);
  if (k1 == k2) {
    throw std::invalid_argument("swap_unitary: branch indices must differ");
  }
  Matrix basis(dec.left_dim(), 2);
  basis.col(0) = dec.left_basis().col(k1);
  basis.col(1) = dec.left_basis().col(k2);
  Matrix action(dec.left_dim(), 2);
  action.col(0) = std::exp(Complex(0.0, -phi12)) * basis.col(1);
  action.col(1) = std::exp(Complex(0.0, phi12)) * basis.col(0);
  return Operator(identity_except(basis, action));
}

Operator counterswap_unitary(const SchmidtDecomposition& dec, int k1, int k2,
                             double phi12, long l12,
                             double modulus_tolerance) {
  check_branch_index(dec, k1);
  check_branch_index(dec, k2);
  if (k1 == k2) {
    throw std::invalid_argument("counterswap_unitary: branch indices must differ");
  }
  const double gap = std::abs(dec.moduli()[k1] - dec.moduli()[k2]);
  if (gap > modulus_tolerance) {
    std::ostringstream msg;
    msg << "counterswap_unitary requires equal branch moduli; |" << k1
        << "| and |" << k2 << "| differ by " << gap;
    throw InvariantViolation(msg.str());
  }
  const double theta = phi12 + dec.phases()[k1] - dec.phases()[k2] +
                       2.0 * std::numbers::pi * static_cast<double>(l12);
  Matrix basis(dec.right_dim(), 2);
  basis.col(0) = dec.right_basis().col(k1);
  basis.col(1) = dec.right_basis().col(k2);
  Matrix action(dec.right_dim(), 2);
  action.col(0) = std::exp(Complex(0.0, theta)) * basis.col(1);
  action.col(1) = std::exp(Complex(0.0, -theta)) * basis.col(0);
  return Operator(identity_except(basis, action));
}

UndoCheck verify_undo(const StateVector& state, const Operator& u_s,
                      const Operator& u_e, double tol) {
  require_bipartite(state, "verify_undo");
  const std::vector<Index>& factors = state.factors();
  if (u_s.dim() != factors[0] || u_e.dim() != factors[1]) {
    throw std::invalid_argument(
        "verify_undo: operator dimensions do not match the bipartite split");
  }
  // (1⊗u_E)(u_S⊗1)|ψ⟩ acts on the coefficient matrix as u_S · C · u_Eᵀ,
  // which avoids materializing the D×D embeddings.
  const auto coeff = coefficient_matrix(state);
  const Matrix after = u_s.matrix() * coeff * u_e.matrix().transpose();
  const double residual = (after - coeff).norm();
  return {residual <= tol, residual};
}

namespace {

// Orthonormal basis of the complement of the (orthonormal) columns of
// `thin`.
Matrix orthonormal_complement(const Matrix& thin) {
  const Index d = thin.rows();
  const Index r = thin.cols();
  if (r >= d) return Matrix(d, 0);
  Eigen::HouseholderQR<Matrix> qr(thin);
  const Matrix q = qr.householderQ();
  return q.rightCols(d - r);
}

// Builds the right-factor unitary mapping (u_S⊗1)|ψ⟩ back to |ψ⟩, given
// that both states have the same left marginal. Writing the coefficient
// matrices as C = UΣV† and C' = U'ΣW†, equal marginals mean U' = U·B with
// B unitary and block-diagonal on groups of equal singular values; then
//   u_Eᵀ = W·B†·V† + (any unitary between the two kernels)
// satisfies C'·u_Eᵀ = C and is unitary.
Operator align_right_bases(const Matrix& coeff, const Matrix& coeff_after) {
  Eigen::BDCSVD<Matrix> svd(coeff, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::BDCSVD<Matrix> svd_after(coeff_after,
                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sigma = svd.singularValues();
  const Index d_e = coeff.cols();

  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > kRankTol * sigma[0]) ++rank;

  Matrix mid = Matrix::Identity(rank, rank);
  Index block_start = 0;
  while (block_start < rank) {
    Index block_end = block_start + 1;
    while (block_end < rank &&
           sigma[block_end - 1] - sigma[block_end] < kDegeneracyGap) {
      ++block_end;
    }
    const Index width = block_end - block_start;
    const Matrix b = polar_unitary(
        svd.matrixU().middleCols(block_start, width).adjoint() *
        svd_after.matrixU().middleCols(block_start, width));
    mid.block(block_start, block_start, width, width) = b.adjoint();
    block_start = block_end;
  }

  const Matrix v = svd.matrixV().leftCols(rank);
  const Matrix w = svd_after.matrixV().leftCols(rank);
  Matrix u_e_t = w * mid * v.adjoint();
  if (rank < d_e) {
    u_e_t += orthonormal_complement(w) * orthonormal_complement(v).adjoint();
  }
  return Operator(u_e_t.transpose());
}

}  // namespace

EnvarianceVerdict check_envariance(const StateVector& state,
                                   const Operator& u_s, double tol) {
  require_bipartite(state, "check_envariance");
  state.require_normalized();
  if (u_s.dim() != state.factor_dim(0)) {
    throw std::invalid_argument(
        "check_envariance: unitary dimension does not match the left factor");
  }
  u_s.require_unitary(std::max(tol, kUnitaryTol));

  const auto coeff = coefficient_matrix(state);
  const StateVector after = from_coefficient_matrix(u_s.matrix() * coeff);
  const DensityMatrix before_reduced = partial_trace(state, {0});
  const DensityMatrix after_reduced = partial_trace(after, {0});
  const double distance = detail::hermitian_operator_norm(
      before_reduced.matrix() - after_reduced.matrix());

  EnvarianceVerdict verdict;
  if (distance > tol) {
    verdict.envariant = false;
    verdict.certificate = distance;
    return verdict;
  }

  const Operator witness =
      align_right_bases(coefficient_matrix(state), coefficient_matrix(after));
  const UndoCheck undo = verify_undo(state, u_s, witness, kWitnessTol);
  if (!undo.ok) {
    std::ostringstream msg;
    msg << "check_envariance: reduced states agree (distance " << distance
        << ") but witness construction reached residual " << undo.residual
        << " > " << kWitnessTol
        << "; the input sits too close to the decision boundary";
    throw WitnessConstructionError(msg.str());
  }
  verdict.envariant = true;
  verdict.witness = witness;
  verdict.witness_residual = undo.residual;
  return verdict;
}

}  // namespace envar
