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

#include "envar/fine_graining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "envar/envariance.hpp"

namespace envar {

void BranchWeights::validate() const {
  if (counts.empty()) {
    throw std::invalid_argument("BranchWeights: counts must be nonempty");
  }
  std::int64_t sum = 0;
  for (std::int64_t m : counts) {
    if (m < 1) {
      throw std::invalid_argument("BranchWeights: every count must be >= 1");
    }
    sum += m;
  }
  if (sum != total) {
    std::ostringstream msg;
    msg << "BranchWeights: counts sum to " << sum << ", total says " << total;
    throw std::invalid_argument(msg.str());
  }
}

std::int64_t BranchWeights::block_offset(std::size_t k) const {
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < k; ++i) offset += counts[i];
  return offset;
}

namespace {

// Largest-remainder rounding of p·M to integer counts ≥ 1 summing to M.
struct Apportionment {
  std::vector<std::int64_t> counts;
  double max_error = 0.0;
};

Apportionment apportion(const std::vector<double>& p, std::int64_t m_total) {
  const std::size_t n = p.size();
  std::vector<std::int64_t> counts(n);
  std::vector<double> targets(n);
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    targets[k] = p[k] * static_cast<double>(m_total);
    counts[k] = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(targets[k])));
    sum += counts[k];
  }
  std::int64_t slack = m_total - sum;
  while (slack > 0) {
    std::size_t pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const double deficit = targets[k] - static_cast<double>(counts[k]);
      if (deficit > best) {
        best = deficit;
        pick = k;
      }
    }
    ++counts[pick];
    --slack;
  }
  while (slack < 0) {
    std::size_t pick = n;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (counts[k] < 2) continue;
      const double surplus = static_cast<double>(counts[k]) - targets[k];
      if (surplus > best) {
        best = surplus;
        pick = k;
      }
    }
    --counts[pick];
    ++slack;
  }
  Apportionment result;
  result.counts = std::move(counts);
  for (std::size_t k = 0; k < n; ++k) {
    const double err = std::abs(static_cast<double>(result.counts[k]) /
                                    static_cast<double>(m_total) -
                                p[k]);
    result.max_error = std::max(result.max_error, err);
  }
  return result;
}

}  // namespace

Rationalization commensurate_weights(const RealVector& moduli,
                                     std::int64_t max_denominator) {
  const auto n = static_cast<std::int64_t>(moduli.size());
  if (n == 0) {
    throw std::invalid_argument("commensurate_weights: empty modulus vector");
  }
  std::vector<double> p(n);
  double sum = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (moduli[k] < 0.0) {
      throw std::invalid_argument("commensurate_weights: moduli must be >= 0");
    }
    p[k] = moduli[k] * moduli[k];
    sum += p[k];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "commensurate_weights: squared moduli sum to " << sum;
    throw InvariantViolation(msg.str());
  }
  if (max_denominator < n) {
    std::ostringstream msg;
    msg << "commensurate_weights: max_denominator " << max_denominator
        << " cannot give " << n << " branches a count of at least 1";
    throw std::invalid_argument(msg.str());
  }

  Rationalization best;
  best.max_error = std::numeric_limits<double>::infinity();
  for (std::int64_t m_total = n; m_total <= max_denominator; ++m_total) {
    Apportionment candidate = apportion(p, m_total);
    if (candidate.max_error < best.max_error) {
      best.max_error = candidate.max_error;
      best.weights.counts = std::move(candidate.counts);
      best.weights.total = m_total;
    }
  }
  best.weights.validate();
  return best;
}

StateVector attach_counterweight(const SchmidtDecomposition& dec,
                                 const BranchWeights& weights) {
  weights.validate();
  if (static_cast<int>(weights.counts.size()) != dec.rank()) {
    throw std::invalid_argument(
        "attach_counterweight: one count per Schmidt branch required");
  }
  const Index m_total = weights.total;
  const Index d_s = dec.left_dim();
  const Index d_e = dec.right_dim();
  const double amp = 1.0 / std::sqrt(static_cast<double>(m_total));

  Vector amps = Vector::Zero(m_total * d_s * d_e);
  Index j = 0;
  for (int k = 0; k < dec.rank(); ++k) {
    for (std::int64_t copy = 0; copy < weights.counts[k]; ++copy, ++j) {
      for (Index s = 0; s < d_s; ++s) {
        const Complex scale = amp * dec.left_basis()(s, k);
        if (scale == Complex(0.0)) continue;
        amps.segment((j * d_s + s) * d_e, d_e) +=
            scale * dec.right_basis().col(k);
      }
    }
  }
  return StateVector(std::move(amps), {m_total, d_s, d_e});
}

namespace {

struct BlockFactors {
  Matrix left;     // d_S × N unit columns
  Matrix right;    // d_E × N, column k = ε̂_k (norm ≈ 1, unnormalized)
};

// Recovers the per-block product structure of a counterweight state and
// validates it: all rows of a block equal, row norms 1/√M, each block
// rank-1 over (S, E).
BlockFactors extract_block_factors(const StateVector& tripartite,
                                   const BranchWeights& weights,
                                   double tol = 1e-10) {
  const Index m_total = weights.total;
  const Index d_s = tripartite.factor_dim(1);
  const Index d_e = tripartite.factor_dim(2);
  const auto n = static_cast<int>(weights.counts.size());
  const double row_norm = 1.0 / std::sqrt(static_cast<double>(m_total));

  BlockFactors out{Matrix(d_s, n), Matrix(d_e, n)};
  Index j = 0;
  for (int k = 0; k < n; ++k) {
    const auto base = tripartite.amplitudes().segment(j * d_s * d_e, d_s * d_e);
    if (std::abs(base.norm() - row_norm) > tol) {
      throw InvariantViolation(
          "fine_grain: input does not have the counterweight structure "
          "(block norm mismatch)");
    }
    for (std::int64_t copy = 0; copy < weights.counts[k]; ++copy, ++j) {
      const auto row =
          tripartite.amplitudes().segment(j * d_s * d_e, d_s * d_e);
      if ((row - base).norm() > tol) {
        throw InvariantViolation(
            "fine_grain: input does not have the counterweight structure "
            "(rows of one block differ)");
      }
    }
    // χ_k = √M · base, reshaped over (S, E), must factor as s_k ⊗ ε̂_k.
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        chi(base.data(), d_s, d_e);
    Index pivot = 0;
    double best = -1.0;
    for (Index e = 0; e < d_e; ++e) {
      const double mag = chi.col(e).norm();
      if (mag > best) {
        best = mag;
        pivot = e;
      }
    }
    if (best == 0.0) {
      throw InvariantViolation("fine_grain: empty block");
    }
    out.left.col(k) = chi.col(pivot) / best;
    out.right.col(k) =
        (out.left.col(k).adjoint() * chi).transpose() / row_norm;
    const Matrix rank_one =
        row_norm * out.left.col(k) * out.right.col(k).transpose();
    if ((rank_one - chi).norm() > tol) {
      throw InvariantViolation(
          "fine_grain: input does not have the counterweight structure "
          "(block is not a product over S and E)");
    }
  }
  return out;
}

}  // namespace

FineGrainedState fine_grain(const StateVector& tripartite,
                            const BranchWeights& weights) {
  weights.validate();
  if (tripartite.num_factors() != 3) {
    throw std::invalid_argument(
        "fine_grain: expected a three-factor (A, S, E) state");
  }
  if (tripartite.factor_dim(0) != weights.total) {
    std::ostringstream msg;
    msg << "fine_grain: ancilla dimension " << tripartite.factor_dim(0)
        << " does not match the weight total " << weights.total;
    throw std::invalid_argument(msg.str());
  }
  const Index m_total = weights.total;
  const Index d_s = tripartite.factor_dim(1);
  const auto n = static_cast<int>(weights.counts.size());

  const BlockFactors blocks = extract_block_factors(tripartite, weights);

  // The coupling sends the domain vectors |a_j⟩⊗(ε̂_k/‖ε̂_k‖) to the targets
  // |a_j⟩⊗|e_j⟩. The targets are orthonormal by construction, so the map is
  // an isometry on its domain iff the domain Gram matrix is the identity,
  // which reduces to orthonormality of the ε̂_k across blocks.
  Matrix gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      gram(i, k) = (blocks.right.col(i) / blocks.right.col(i).norm())
                       .dot(blocks.right.col(k) / blocks.right.col(k).norm());
    }
  }
  const double gram_defect = (gram - Matrix::Identity(n, n)).norm();
  if (gram_defect > 1e-10) {
    std::ostringstream msg;
    msg << "fine_grain: coupling is not an isometry on its domain "
        << "(Gram defect " << gram_defect << ")";
    throw InvariantViolation(msg.str());
  }

  const double amp = 1.0 / std::sqrt(static_cast<double>(m_total));
  Vector amps = Vector::Zero(m_total * d_s * m_total);
  std::vector<int> branch_index(m_total);
  Vector branch_amplitudes(m_total);
  Index j = 0;
  for (int k = 0; k < n; ++k) {
    const double c_j = amp * blocks.right.col(k).norm();
    for (std::int64_t copy = 0; copy < weights.counts[k]; ++copy, ++j) {
      branch_index[j] = k;
      branch_amplitudes[j] = c_j;
      for (Index s = 0; s < d_s; ++s) {
        amps[(j * d_s + s) * m_total + j] = c_j * blocks.left(s, k);
      }
    }
  }
  return FineGrainedState{
      StateVector(std::move(amps), {m_total, d_s, m_total}),
      std::move(branch_index), std::move(branch_amplitudes)};
}

namespace {

// Deterministic, platform-independent generator for pair subsampling.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }
};

std::vector<std::pair<int, int>> sample_pairs(
    std::vector<std::pair<int, int>> pairs, std::size_t limit,
    std::uint64_t seed) {
  if (pairs.size() <= limit) return pairs;
  SplitMix64 rng{seed};
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(
                                  rng.bounded(pairs.size() - i));
    std::swap(pairs[i], pairs[j]);
  }
  pairs.resize(limit);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

void require_pair_envariant(const StateVector& bipartite,
                            const SchmidtDecomposition& dec, int j1, int j2,
                            double tolerance, double& max_residual) {
  const Operator swap = swap_unitary(dec, j1, j2, 0.0);
  const EnvarianceVerdict verdict = check_envariance(bipartite, swap, tolerance);
  if (!verdict.envariant) {
    std::ostringstream msg;
    msg << "envariant_probabilities: fine branches " << j1 << " and " << j2
        << " are not swap-envariant (certificate "
        << verdict.certificate.value() << ")";
    throw InvariantViolation(msg.str());
  }
  max_residual = std::max(max_residual, verdict.witness_residual);
}

}  // namespace

PipelineResult envariant_probabilities(const StateVector& state,
                                       const PipelineOptions& options) {
  const SchmidtDecomposition dec = schmidt_decompose(state);
  const Rationalization rat =
      commensurate_weights(dec.moduli(), options.max_denominator);
  const BranchWeights& weights = rat.weights;
  const auto n = static_cast<int>(weights.counts.size());
  const std::int64_t m_total = weights.total;

  PipelineResult result;
  result.weights = weights;
  result.approximation_error = rat.max_error;
  result.fine_dims = {m_total, dec.left_dim(), m_total};
  result.pairs_total =
      static_cast<std::size_t>(m_total) * (m_total - 1) / 2;

  std::vector<std::int64_t> counts(n, 0);

  if (m_total <= options.explicit_cap) {
    result.materialized = true;
    const StateVector tripartite = attach_counterweight(dec, weights);
    const FineGrainedState fine = fine_grain(tripartite, weights);
    result.branch_index = fine.branch_index;
    for (int k : fine.branch_index) counts[k] += 1;

    const StateVector grouped = fine.state.group_bipartite(1);
    const SchmidtDecomposition fine_dec = schmidt_decompose(grouped);
    if (fine_dec.rank() != m_total) {
      throw InvariantViolation(
          "envariant_probabilities: fine-grained state has wrong rank");
    }
    const double equal_amp = 1.0 / std::sqrt(static_cast<double>(m_total));
    result.branch_modulus_deviation =
        (fine_dec.moduli().array() - equal_amp).abs().maxCoeff();
    if (swappable_classes(fine_dec, 1e-10).size() != 1) {
      throw InvariantViolation(
          "envariant_probabilities: fine branches do not form a single "
          "swappable class");
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(result.pairs_total);
    for (int a = 0; a < m_total; ++a) {
      for (int b = a + 1; b < m_total; ++b) pairs.emplace_back(a, b);
    }
    pairs = sample_pairs(std::move(pairs), options.pair_check_limit,
                         options.seed);
    for (const auto& [a, b] : pairs) {
      require_pair_envariant(grouped, fine_dec, a, b,
                             options.decision_tolerance,
                             result.max_pair_residual);
    }
    result.pairs_checked = pairs.size();
  } else {
    // Above the cap the dense state (M²·d_S amplitudes) is not built; the
    // branch ledger carries the same data. A swap of two fine branches
    // acts as the identity on every other branch, so its envariance check
    // restricts exactly to the normalized two-branch state, which is what
    // gets checked here for representative pairs.
    result.materialized = false;
    result.branch_index.resize(m_total);
    const double equal_amp = 1.0 / std::sqrt(static_cast<double>(m_total));
    Index j = 0;
    for (int k = 0; k < n; ++k) {
      const double c_j = std::sqrt(static_cast<double>(weights.counts[k]) /
                                   static_cast<double>(m_total)) /
                         std::sqrt(static_cast<double>(weights.counts[k]));
      result.branch_modulus_deviation = std::max(
          result.branch_modulus_deviation, std::abs(c_j - equal_amp));
      for (std::int64_t copy = 0; copy < weights.counts[k]; ++copy, ++j) {
        result.branch_index[j] = k;
      }
      counts[k] = weights.counts[k];
    }

    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < n; ++k) {
      if (weights.counts[k] >= 2) {
        const int off = static_cast<int>(weights.block_offset(k));
        pairs.emplace_back(off, off + 1);
      }
      for (int k2 = k + 1; k2 < n; ++k2) {
        pairs.emplace_back(static_cast<int>(weights.block_offset(k)),
                           static_cast<int>(weights.block_offset(k2)));
      }
    }
    pairs = sample_pairs(std::move(pairs), options.pair_check_limit,
                         options.seed);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector restricted_amps(4);
    restricted_amps << inv_sqrt2, 0.0, 0.0, inv_sqrt2;
    const StateVector restricted(restricted_amps, {2, 2});
    const SchmidtDecomposition restricted_dec = schmidt_decompose(restricted);
    for (const auto& pair : pairs) {
      (void)pair;
      require_pair_envariant(restricted, restricted_dec, 0, 1,
                             options.decision_tolerance,
                             result.max_pair_residual);
    }
    result.pairs_checked = pairs.size();
  }

  result.probabilities.resize(n);
  for (int k = 0; k < n; ++k) {
    if (counts[k] != weights.counts[k]) {
      throw InvariantViolation(
          "envariant_probabilities: branch count does not match weights");
    }
    result.probabilities[k] = static_cast<double>(counts[k]) /
                              static_cast<double>(m_total);
  }
  return result;
}

PipelineResult envariant_probabilities(const StateVector& state,
                                       std::int64_t max_denominator) {
  PipelineOptions options;
  options.max_denominator = max_denominator;
  return envariant_probabilities(state, options);
}

}  // namespace envar
