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

#include "envar/tensor_core.hpp"

namespace envar::testing {

// Dense matrix exponential by scaling and squaring with a Taylor series,
// independent of the eigendecomposition route used by the library.
inline Matrix expm_oracle(const Matrix& a) {
  int squarings = 0;
  double scale = a.norm();
  while (scale > 0.5) {
    scale /= 2.0;
    ++squarings;
  }
  const Matrix x = a / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) {
    sum = sum * sum;
  }
  return sum;
}

}  // namespace envar::testing
