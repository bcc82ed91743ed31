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

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "qtomo/linalg.hpp"

namespace qtomo {

/// tr sqrt(S1^{1/2} S2 S1^{1/2}), evaluated as the trace norm of
/// S1^{1/2} S2^{1/2}. Clamped to [0, 1].
inline double fidelity(const DensityMatrix& s1, const DensityMatrix& s2) {
  detail::require_same_dim(s1.dim(), s2.dim(), "fidelity");
  const ComplexMatrix product = matrix_sqrt(s1).matrix() * matrix_sqrt(s2).matrix();
  Eigen::JacobiSVD<ComplexMatrix> svd(product);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

/// Squared Bures distance 2 - 2 F(S1, S2), in [0, 2].
inline double bures_sq(const DensityMatrix& s1, const DensityMatrix& s2) {
  return std::clamp(2.0 - 2.0 * fidelity(s1, s2), 0.0, 2.0);
}

/// Quantum relative entropy tr(S1 log S1 - S1 log S2), natural log.
///
/// Returns +inf when S1 has weight above 1e-9 on the eigenspace of S2 whose
/// eigenvalues are below 1e-10 * lambda_max(S2).
inline double kl_divergence(const DensityMatrix& s1, const DensityMatrix& s2) {
  detail::require_same_dim(s1.dim(), s2.dim(), "kl_divergence");
  const Spectrum sp2 = eigendecompose(s2);
  const double cutoff = 1e-10 * sp2.eigenvalues[0];
  const ComplexMatrix& v = sp2.eigenvectors;

  // Diagonal of S1 in the eigenbasis of S2.
  const RealVector weights = (v.adjoint() * s1.matrix() * v).diagonal().real();
  double off_support = 0.0;
  double cross = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (sp2.eigenvalues[i] < cutoff) {
      off_support += weights[i];
    } else {
      cross += weights[i] * std::log(sp2.eigenvalues[i]);
    }
  }
  if (off_support > 1e-9) return kInf;

  double self = 0.0;
  for (double mu : eigenvalues(s1)) {
    if (mu >= 1e-14) self += mu * std::log(mu);
  }
  return std::max(0.0, self - cross);
}

/// All distances between two states. Schatten distances are keyed by p;
/// p = kInf is the operator norm.
struct DistanceReport {
  std::map<double, double> schatten;
  double bures_sq = 0.0;
  double fidelity = 1.0;
  double kl = 0.0;
};

inline DistanceReport distance_report(const DensityMatrix& s1, const DensityMatrix& s2,
                                      const std::vector<double>& p_grid) {
  detail::require_same_dim(s1.dim(), s2.dim(), "distance_report");
  DistanceReport r;
  const HermitianMatrix diff = s1.hermitian() - s2.hermitian();
  const RealVector diff_values = eigenvalues(diff);
  for (double p : p_grid) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("distance_report: p must be >= 1 or infinity");
    r.schatten[p] = p == 2.0 ? diff.matrix().norm() : schatten_norm_of_values(diff_values, p);
  }
  r.fidelity = fidelity(s1, s2);
  r.bures_sq = std::clamp(2.0 - 2.0 * r.fidelity, 0.0, 2.0);
  r.kl = kl_divergence(s1, s2);
  return r;
}

}  // namespace qtomo
