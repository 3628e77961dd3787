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

#include "envar/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace envar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phi) {
  double w = std::remainder(phi, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w == 0.0 ? 0.0 : w;  // avoid -0.0 in reports
}

// Rotates `column` so its largest-modulus component is real positive and
// returns the rotation phase factor that was divided out.
Complex canonicalize_column(Eigen::Ref<Vector> column) {
  Index pivot = 0;
  double best = -1.0;
  for (Index i = 0; i < column.size(); ++i) {
    const double mag = std::abs(column[i]);
    if (mag > best) {
      best = mag;
      pivot = i;
    }
  }
  const Complex value = column[pivot];
  if (std::abs(value) == 0.0) return Complex(1.0);
  const Complex phase = value / std::abs(value);
  column /= phase;
  return phase;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

void check_orthonormal(const Matrix& basis, double tol, const char* side) {
  const double defect =
      (basis.adjoint() * basis - Matrix::Identity(basis.cols(), basis.cols()))
          .norm();
  if (defect > tol) {
    std::ostringstream msg;
    msg << "Schmidt " << side << " basis is not orthonormal: defect "
        << defect;
    throw InvariantViolation(msg.str());
  }
}

}  // namespace

SchmidtDecomposition::SchmidtDecomposition(RealVector moduli, RealVector phases,
                                           Matrix left_basis,
                                           Matrix right_basis, double tol)
    : moduli_(std::move(moduli)),
      phases_(std::move(phases)),
      left_basis_(std::move(left_basis)),
      right_basis_(std::move(right_basis)) {
  const Index n = moduli_.size();
  if (phases_.size() != n || left_basis_.cols() != n ||
      right_basis_.cols() != n) {
    throw std::invalid_argument(
        "SchmidtDecomposition: moduli, phases and bases must agree in rank");
  }
  if (n == 0) {
    throw std::invalid_argument("SchmidtDecomposition: rank must be positive");
  }
  for (Index k = 0; k < n; ++k) {
    if (moduli_[k] < 0.0) {
      throw InvariantViolation("Schmidt moduli must be nonnegative");
    }
    if (k + 1 < n && moduli_[k] < moduli_[k + 1]) {
      throw InvariantViolation("Schmidt moduli must be sorted descending");
    }
  }
  const double sum_sq = moduli_.squaredNorm();
  if (std::abs(sum_sq - 1.0) > tol) {
    std::ostringstream msg;
    msg << "Schmidt moduli are not normalized: sum of squares " << sum_sq;
    throw InvariantViolation(msg.str());
  }
  check_orthonormal(left_basis_, 1e-10, "left");
  check_orthonormal(right_basis_, 1e-10, "right");
}

Complex SchmidtDecomposition::coefficient(int k) const {
  if (k < 0 || k >= rank()) {
    throw std::invalid_argument("SchmidtDecomposition: branch index out of range");
  }
  return moduli_[k] * std::exp(Complex(0.0, -phases_[k]));
}

SchmidtDecomposition schmidt_decompose(const StateVector& state,
                                       double rank_tolerance) {
  if (state.num_factors() != 2) {
    throw std::invalid_argument(
        "schmidt_decompose: state must have exactly two factors "
        "(group factors into a bipartition first)");
  }
  state.require_normalized();
  const Index d_left = state.factor_dim(0);
  const Index d_right = state.factor_dim(1);

  // Coefficient matrix C(s, e) = amplitude at flat index s*d_right + e.
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      coeff(state.amplitudes().data(), d_left, d_right);

  Eigen::BDCSVD<Matrix> svd(coeff, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sigma = svd.singularValues();
  const double cutoff = rank_tolerance * sigma[0];
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
  if (rank == 0) {
    throw InvariantViolation("schmidt_decompose: state has no branches above tolerance");
  }

  // C = U Σ V†, so |ε_k⟩ is the conjugate of V's k-th column.
  Matrix left = svd.matrixU().leftCols(rank);
  Matrix right = svd.matrixV().leftCols(rank).conjugate();

  RealVector moduli(rank);
  RealVector phases(rank);
  for (Index k = 0; k < rank; ++k) {
    const Complex left_phase = canonicalize_column(left.col(k));
    const Complex right_phase = canonicalize_column(right.col(k));
    moduli[k] = sigma[k];
    phases[k] = wrap_phase(-std::arg(left_phase * right_phase));
  }

  // Descending moduli; ties ordered lexicographically on the left column.
  std::vector<Index> order(rank);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (moduli[a] != moduli[b]) return moduli[a] > moduli[b];
    return lex_less(left.col(a), left.col(b));
  });
  RealVector moduli_s(rank), phases_s(rank);
  Matrix left_s(d_left, rank), right_s(d_right, rank);
  for (Index k = 0; k < rank; ++k) {
    moduli_s[k] = moduli[order[k]];
    phases_s[k] = phases[order[k]];
    left_s.col(k) = left.col(order[k]);
    right_s.col(k) = right.col(order[k]);
  }

  SchmidtDecomposition dec(std::move(moduli_s), std::move(phases_s),
                           std::move(left_s), std::move(right_s));

  const StateVector rebuilt = reconstruct(dec);
  const double residual =
      (rebuilt.amplitudes() - state.amplitudes()).cwiseAbs().maxCoeff();
  if (residual > 1e-10) {
    std::ostringstream msg;
    msg << "schmidt_decompose: reconstruction residual " << residual
        << " exceeds 1e-10";
    throw InvariantViolation(msg.str());
  }
  return dec;
}

StateVector reconstruct(const SchmidtDecomposition& dec) {
  const Index d_left = dec.left_dim();
  const Index d_right = dec.right_dim();
  Vector amps = Vector::Zero(d_left * d_right);
  for (int k = 0; k < dec.rank(); ++k) {
    const Complex a_k = dec.coefficient(k);
    for (Index s = 0; s < d_left; ++s) {
      const Complex scale = a_k * dec.left_basis()(s, k);
      if (scale == Complex(0.0)) continue;
      amps.segment(s * d_right, d_right) += scale * dec.right_basis().col(k);
    }
  }
  return StateVector(std::move(amps), {d_left, d_right});
}

StateVector reconstruct(const SchmidtDecomposition& dec, Index left_dim,
                        Index right_dim) {
  if (left_dim != dec.left_dim() || right_dim != dec.right_dim()) {
    std::ostringstream msg;
    msg << "reconstruct: requested factors (" << left_dim << ", " << right_dim
        << ") do not match decomposition (" << dec.left_dim() << ", "
        << dec.right_dim() << ")";
    throw std::invalid_argument(msg.str());
  }
  return reconstruct(dec);
}

std::vector<std::vector<int>> swappable_classes(const SchmidtDecomposition& dec,
                                                double modulus_tolerance) {
  std::vector<std::vector<int>> classes;
  const RealVector& moduli = dec.moduli();
  int k = 0;
  while (k < dec.rank()) {
    std::vector<int> group{k};
    const double leader = moduli[k];
    int j = k + 1;
    while (j < dec.rank() && leader - moduli[j] <= modulus_tolerance) {
      group.push_back(j);
      ++j;
    }
    classes.push_back(std::move(group));
    k = j;
  }
  return classes;
}

}  // namespace envar
