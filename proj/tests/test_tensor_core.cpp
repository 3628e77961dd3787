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

#include <doctest.h>

#include <numbers>
#include <random>

#include "envar/tensor_core.hpp"
#include "support/expm_oracle.hpp"
#include "support/generators.hpp"

using namespace envar;
using envar::testing::expm_oracle;
using envar::testing::random_amplitudes;
using envar::testing::random_hermitian;
using envar::testing::random_state;
using envar::testing::random_unitary;

namespace {

StateVector plus_state() {
  Vector amps(2);
  amps << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return StateVector(amps, {2});
}

StateVector bell_state() {
  Vector amps = Vector::Zero(4);
  amps[0] = amps[3] = 1.0 / std::sqrt(2.0);
  return StateVector(amps, {2, 2});
}

StateVector singlet_state() {
  Vector amps = Vector::Zero(4);
  amps[1] = 1.0 / std::sqrt(2.0);
  amps[2] = -1.0 / std::sqrt(2.0);
  return StateVector(amps, {2, 2});
}

}  // namespace

TEST_CASE("StateVector validates the factor product") {
  CHECK_THROWS_AS(StateVector(Vector::Zero(4), {2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(Vector::Zero(4), {}), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(Vector::Zero(4), {4, 0}), std::invalid_argument);
}

TEST_CASE("StateVector normalization contract") {
  Vector amps(2);
  amps << 2.0, 0.0;
  const StateVector doubled(amps, {2});
  CHECK(!doubled.is_normalized());
  CHECK_THROWS_AS(doubled.require_normalized(), InvariantViolation);
  CHECK(doubled.normalized().is_normalized());
}

TEST_CASE("group_bipartite relabels factors without moving data") {
  std::mt19937_64 rng(7);
  const StateVector state = random_state(rng, {2, 3, 2});
  const StateVector grouped = state.group_bipartite(2);
  CHECK(grouped.factors() == std::vector<Index>{6, 2});
  CHECK((grouped.amplitudes() - state.amplitudes()).norm() == 0.0);
  CHECK_THROWS_AS(state.group_bipartite(0), std::invalid_argument);
  CHECK_THROWS_AS(state.group_bipartite(3), std::invalid_argument);
}

TEST_CASE("tensor_product places |0>⊗|1> at flat index 1") {
  const StateVector result = tensor_product(basis_state(2, 0), basis_state(2, 1));
  CHECK(result.factors() == std::vector<Index>{2, 2});
  CHECK(result.amplitudes()[1] == Complex(1.0));
  CHECK(result.amplitudes().cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("tensor_product of (|0>+|1>)/sqrt2 with |0>") {
  const StateVector result = tensor_product(plus_state(), basis_state(2, 0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(result.amplitudes()[0] - Complex(r)) < 1e-15);
  CHECK(std::abs(result.amplitudes()[1]) < 1e-15);
  CHECK(std::abs(result.amplitudes()[2] - Complex(r)) < 1e-15);
  CHECK(std::abs(result.amplitudes()[3]) < 1e-15);
}

TEST_CASE("tensor_product preserves the norm") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector a = random_state(rng, {3});
    const StateVector b = random_state(rng, {4});
    const StateVector ab = tensor_product(a, b);
    CHECK(std::abs(ab.norm() - 1.0) <= kNormTol);
    CHECK(ab.factors() == std::vector<Index>{3, 4});
  }
}

TEST_CASE("embed_on_factor of the identity is the identity") {
  const Operator id2(Matrix::Identity(2, 2));
  const Operator embedded = embed_on_factor(id2, 1, {3, 2});
  CHECK((embedded.matrix() - Matrix::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("embed_on_factor places a bit flip on the first qubit") {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const Operator embedded = embed_on_factor(Operator(x), 0, {2, 2});
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 2) = expected(1, 3) = expected(2, 0) = expected(3, 1) = 1.0;
  CHECK((embedded.matrix() - expected).norm() == 0.0);
}

TEST_CASE("embed_on_factor matches the brute-force Kronecker oracle") {
  std::mt19937_64 rng(13);
  const std::vector<Index> factors{3, 4};
  for (std::size_t target = 0; target < 2; ++target) {
    const Index d = factors[target];
    const Operator u(random_unitary(rng, d));
    const Operator embedded = embed_on_factor(u, target, factors);

    // Oracle: entry ((r0,r1),(c0,c1)) = u(r_t,c_t) * delta on the other leg.
    const Index dim = factors[0] * factors[1];
    Matrix expected(dim, dim);
    for (Index row = 0; row < dim; ++row) {
      const Index r0 = row / factors[1], r1 = row % factors[1];
      for (Index col = 0; col < dim; ++col) {
        const Index c0 = col / factors[1], c1 = col % factors[1];
        if (target == 0) {
          expected(row, col) = (r1 == c1) ? u.matrix()(r0, c0) : Complex(0.0);
        } else {
          expected(row, col) = (r0 == c0) ? u.matrix()(r1, c1) : Complex(0.0);
        }
      }
    }
    CHECK((embedded.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("embed_on_factor rejects dimension mismatch") {
  const Operator id3(Matrix::Identity(3, 3));
  CHECK_THROWS_AS(embed_on_factor(id3, 0, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(embed_on_factor(id3, 2, {3, 3}), std::invalid_argument);
}

TEST_CASE("apply: identity, unitary norm preservation, scaling flagged") {
  std::mt19937_64 rng(17);
  const StateVector state = random_state(rng, {2, 2});

  const Operator id(Matrix::Identity(4, 4));
  CHECK((apply(id, state).amplitudes() - state.amplitudes()).norm() == 0.0);

  const Operator u(random_unitary(rng, 4));
  CHECK(std::abs(apply(u, state).norm() - 1.0) <= kNormTol);

  const Operator twice(Matrix(2.0 * Matrix::Identity(2, 2)));
  const StateVector blown = apply(twice, basis_state(2, 0));
  CHECK(blown.norm() == doctest::Approx(2.0));
  CHECK_THROWS_AS(blown.require_normalized(), InvariantViolation);

  CHECK_THROWS_AS(apply(twice, state), std::invalid_argument);
}

TEST_CASE("apply of an embedded one-factor unitary acts factor-wise") {
  std::mt19937_64 rng(19);
  const StateVector a = random_state(rng, {3});
  const StateVector b = random_state(rng, {4});
  const Operator u(random_unitary(rng, 3));
  const Operator v(random_unitary(rng, 4));

  const StateVector lhs =
      apply(embed_on_factor(u, 0, {3, 4}), tensor_product(a, b));
  const StateVector rhs = tensor_product(apply(u, a), b);
  CHECK((lhs.amplitudes() - rhs.amplitudes()).cwiseAbs().maxCoeff() <= 1e-12);

  const StateVector lhs2 =
      apply(embed_on_factor(v, 1, {3, 4}), tensor_product(a, b));
  const StateVector rhs2 = tensor_product(a, apply(v, b));
  CHECK((lhs2.amplitudes() - rhs2.amplitudes()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("partial_trace of a product state is a pure projector") {
  std::mt19937_64 rng(23);
  const StateVector a = random_state(rng, {3});
  const StateVector b = random_state(rng, {4});
  const DensityMatrix rho = partial_trace(tensor_product(a, b), {0});
  const Matrix expected = a.amplitudes() * a.amplitudes().adjoint();
  CHECK((rho.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("partial_trace of Bell and singlet states is maximally mixed") {
  for (const StateVector& state : {bell_state(), singlet_state()}) {
    for (std::size_t keep : {0u, 1u}) {
      const DensityMatrix rho = partial_trace(state, {keep});
      CHECK((rho.matrix() - 0.5 * Matrix::Identity(2, 2)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("partial_trace matches an independent contraction oracle") {
  std::mt19937_64 rng(29);
  const std::vector<Index> factors{2, 3, 2};
  const StateVector state = random_state(rng, factors);
  const DensityMatrix rho = partial_trace(state, {0, 2});

  // Oracle: rho[(a0,a2),(b0,b2)] = sum_m psi(a0,m,a2) conj(psi(b0,m,b2)).
  Matrix expected = Matrix::Zero(4, 4);
  auto flat = [&](Index i, Index j, Index k) { return (i * 3 + j) * 2 + k; };
  for (Index a0 = 0; a0 < 2; ++a0) {
    for (Index a2 = 0; a2 < 2; ++a2) {
      for (Index b0 = 0; b0 < 2; ++b0) {
        for (Index b2 = 0; b2 < 2; ++b2) {
          Complex sum = 0.0;
          for (Index m = 0; m < 3; ++m) {
            sum += state.amplitudes()[flat(a0, m, a2)] *
                   std::conj(state.amplitudes()[flat(b0, m, b2)]);
          }
          expected(a0 * 2 + a2, b0 * 2 + b2) = sum;
        }
      }
    }
  }
  CHECK((rho.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("partial_trace output is a valid density matrix") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector state = random_state(rng, {4, 5});
    const DensityMatrix rho = partial_trace(state, {trial % 2 == 0 ? 0u : 1u});
    CHECK(std::abs(rho.matrix().trace().real() - 1.0) <= 1e-12);
    CHECK(rho.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("partial_trace rejects empty and full keep sets") {
  const StateVector state = bell_state();
  CHECK_THROWS_AS(partial_trace(state, {}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(state, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(state, {2}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(state, {0, 0}), std::invalid_argument);
}

TEST_CASE("propagate: zero Hamiltonian gives the identity") {
  const Operator h(Matrix(Matrix::Zero(3, 3)));
  const Operator u = propagate(h, 2.5);
  CHECK((u.matrix() - Matrix::Identity(3, 3)).norm() <= 1e-14);
}

TEST_CASE("propagate: diagonal Hamiltonian at t = pi gives -I") {
  Matrix h(2, 2);
  h << 1, 0, 0, -1;
  const Operator u = propagate(Operator(h), std::numbers::pi, 1.0);
  CHECK((u.matrix() + Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("propagate matches the scaling-and-squaring oracle") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> time_dist(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + trial % 5;
    const Matrix h = random_hermitian(rng, d);
    const double t = time_dist(rng);
    const Operator u = propagate(Operator(h), t);
    CHECK(u.unitarity_defect() <= 1e-10);
    const Matrix expected = expm_oracle(Complex(0.0, -t) * h);
    CHECK((u.matrix() - expected).norm() <= 1e-10);
  }
}

TEST_CASE("propagate honors hbar") {
  std::mt19937_64 rng(41);
  const Matrix h = random_hermitian(rng, 3);
  const Operator scaled = propagate(Operator(h), 1.3, 2.0);
  const Operator halved = propagate(Operator(Matrix(h / 2.0)), 1.3, 1.0);
  CHECK((scaled.matrix() - halved.matrix()).norm() <= 1e-12);
  CHECK_THROWS_AS(propagate(Operator(h), 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("propagate composes as a one-parameter group") {
  std::mt19937_64 rng(43);
  const Matrix h = random_hermitian(rng, 4);
  const Operator u1 = propagate(Operator(h), 0.7);
  const Operator u2 = propagate(Operator(h), 1.9);
  const Operator u12 = propagate(Operator(h), 2.6);
  CHECK((u1.matrix() * u2.matrix() - u12.matrix()).norm() <= 1e-10);
}

TEST_CASE("propagate rejects non-Hermitian input") {
  Matrix h(2, 2);
  h << 0, 1, 0, 0;
  CHECK_THROWS_AS(propagate(Operator(h), 1.0), InvariantViolation);
}

TEST_CASE("DensityMatrix rejects invalid inputs") {
  Matrix not_hermitian(2, 2);
  not_hermitian << 0.5, 0.3, 0.0, 0.5;
  CHECK_THROWS_AS(DensityMatrix{not_hermitian}, InvariantViolation);

  CHECK_THROWS_AS(DensityMatrix{Matrix(2.0 * Matrix::Identity(2, 2))},
                  InvariantViolation);

  Matrix negative(2, 2);
  negative << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(DensityMatrix{negative}, InvariantViolation);
}

TEST_CASE("Operator checks: unitarity and hermiticity defects") {
  std::mt19937_64 rng(47);
  const Operator u(random_unitary(rng, 5));
  CHECK(u.is_unitary(1e-12));
  const Operator h(random_hermitian(rng, 5));
  CHECK(h.is_hermitian(1e-12));
  CHECK_THROWS_AS(Operator(Matrix::Zero(2, 3)), std::invalid_argument);

  Operator skewed(Matrix(u.matrix() * 1.01));
  CHECK(!skewed.is_unitary(1e-10));
  CHECK_THROWS_AS(skewed.require_unitary(1e-10), InvariantViolation);
}
