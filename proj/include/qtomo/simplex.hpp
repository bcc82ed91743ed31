// Copyright 2026 The qtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Euclidean projections onto the probability simplex, the set of density
// matrices, and the smoothed set {(1 - delta) S + delta I/m}.
//
// The matrix projections reduce to the vector case: if Z = U diag(d) U*,
// the closest density matrix in Frobenius norm is U diag(proj(d)) U*. The
// same point is also closest in operator norm.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "qtomo/linalg.hpp"

namespace qtomo {

/// Point of the probability simplex.
struct SimplexPoint {
  RealVector coords;
};

namespace detail {

/// Projection of a vector already sorted non-increasing.
inline RealVector project_sorted_onto_simplex(const RealVector& sorted) {
  const Eigen::Index m = sorted.size();
  // pivot k = max { j : mean(z_1..z_j) <= z_j + 1/j }; j = 1 always qualifies.
  double prefix = 0.0;
  double pivot_mean = sorted[0];
  Eigen::Index pivot = 1;
  for (Eigen::Index j = 1; j <= m; ++j) {
    prefix += sorted[j - 1];
    const double mean = prefix / static_cast<double>(j);
    if (mean <= sorted[j - 1] + 1.0 / static_cast<double>(j)) {
      pivot = j;
      pivot_mean = mean;
    }
  }
  const double shift = pivot_mean - 1.0 / static_cast<double>(pivot);
  RealVector out = RealVector::Zero(m);
  for (Eigen::Index j = 0; j < pivot; ++j) out[j] = sorted[j] - shift;
  return out;
}

}  // namespace detail

inline SimplexPoint project_simplex(const RealVector& z) {
  if (z.size() < 1) throw std::invalid_argument("project_simplex: empty input");
  if (!z.allFinite()) throw std::invalid_argument("project_simplex: input contains NaN or Inf");

  const auto order = detail::descending_order(z);
  RealVector sorted(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[static_cast<Eigen::Index>(i)] = z[order[i]];
  const RealVector projected = detail::project_sorted_onto_simplex(sorted);

  SimplexPoint result{RealVector(z.size())};
  for (std::size_t i = 0; i < order.size(); ++i) {
    result.coords[order[i]] = projected[static_cast<Eigen::Index>(i)];
  }
  return result;
}

/// Frobenius projection onto the density matrices.
inline DensityMatrix project_density(const HermitianMatrix& z) {
  const Spectrum s = eigendecompose(z);
  if (!s.eigenvalues.allFinite()) throw std::invalid_argument("project_density: non-finite eigenvalues");
  // eigendecompose already sorts non-increasing, so no permutation is needed.
  return DensityMatrix::from_spectrum(detail::project_sorted_onto_simplex(s.eigenvalues), s.eigenvectors);
}

/// Frobenius projection onto {(1 - delta) S + delta I/m : S density}.
/// Evaluated in the eigenbasis of z as
///   (1 - delta) proj(d / (1 - delta) - delta / ((1 - delta) m)) + delta / m.
inline DensityMatrix project_density_smoothed(const HermitianMatrix& z, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("project_density_smoothed: delta must lie in [0, 1), got " + std::to_string(delta));
  }
  if (delta == 0.0) return project_density(z);

  const double m = static_cast<double>(z.dim());
  const Spectrum s = eigendecompose(z);
  if (!s.eigenvalues.allFinite()) {
    throw std::invalid_argument("project_density_smoothed: non-finite eigenvalues");
  }
  const double keep = 1.0 - delta;
  const RealVector shifted = (s.eigenvalues.array() / keep - delta / (keep * m)).matrix();
  const RealVector inner = detail::project_sorted_onto_simplex(shifted);
  const RealVector mixed = (keep * inner.array() + delta / m).matrix();
  return DensityMatrix::from_spectrum(mixed, s.eigenvectors);
}

}  // namespace qtomo
