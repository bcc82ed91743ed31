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

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/linalg.hpp"

namespace qtomo {

/// One element E of an orthonormal basis of the Hermitian matrices, with the
/// projections onto its positive and negative eigenspaces.
struct BasisElement {
  HermitianMatrix matrix;
  HermitianMatrix proj_plus;
  HermitianMatrix proj_minus;
  double sup_norm;
};

/// Normalized Pauli string W_{i_1} x ... x W_{i_k}, W_i = sigma_i / sqrt(2).
///
/// Entry (r, c) is non-zero only for c = r ^ flip_mask, where it equals
///   m^{-1/2} * i^{y_count} * (-1)^{popcount(r & sign_mask)}.
/// Qubit 1 is the most significant bit of the row index.
struct PauliString {
  std::uint32_t flip_mask = 0;  // sigma_1 or sigma_2 on the qubit
  std::uint32_t sign_mask = 0;  // sigma_2 or sigma_3 on the qubit
  unsigned y_count = 0;         // number of sigma_2 factors

  /// Multi-index digits (i_1, ..., i_k) from a 0-based basis position; the
  /// position is the base-4 number i_1 i_2 ... i_k.
  static PauliString from_position(std::size_t position, unsigned qubits) {
    PauliString p;
    for (unsigned q = 0; q < qubits; ++q) {
      const unsigned digit = static_cast<unsigned>(position >> (2 * q)) & 3U;
      const std::uint32_t bit = 1U << q;  // digit q counted from the right is the bit q of the row
      if (digit == 1 || digit == 2) p.flip_mask |= bit;
      if (digit == 2 || digit == 3) p.sign_mask |= bit;
      if (digit == 2) ++p.y_count;
    }
    return p;
  }

  /// i^{y_count}. Here sigma_2 is [[0, i], [-i, 0]], the transpose of the
  /// more common convention.
  Complex global_phase() const {
    switch (y_count % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }

  double sign(std::size_t row) const {
    return (std::popcount(static_cast<std::uint32_t>(row) & sign_mask) & 1U) ? -1.0 : 1.0;
  }

  std::string label(unsigned qubits) const {
    std::string s;
    for (unsigned q = qubits; q-- > 0;) {
      const std::uint32_t bit = 1U << q;
      const bool flip = flip_mask & bit;
      const bool sgn = sign_mask & bit;
      s += flip ? (sgn ? 'Y' : 'X') : (sgn ? 'Z' : 'I');
    }
    return s;
  }
};

/// Orthonormal basis {E_1, ..., E_{m^2}} of the m x m Hermitian matrices.
///
/// Pauli bases are stored symbolically and never materialize m^2 dense
/// matrices, so every dimension up to m = 512 is usable. Other bases are
/// stored densely.
class MeasurementBasis {
 public:
  static constexpr unsigned kMaxQubits = 9;
  static constexpr double kOrthonormalityTolerance = 1e-8;

  static MeasurementBasis pauli(unsigned qubits) {
    if (qubits < 1 || qubits > kMaxQubits) {
      throw std::invalid_argument("build_pauli_basis: qubits must be in [1, 9], got " + std::to_string(qubits));
    }
    MeasurementBasis b;
    b.qubits_ = qubits;
    b.m_ = std::size_t{1} << qubits;
    b.scale_ = 1.0 / std::sqrt(static_cast<double>(b.m_));
    b.sup_norm_bound_ = b.scale_;
    b.two_outcome_ = true;
    const std::size_t count = b.m_ * b.m_;
    b.strings_.reserve(count);
    for (std::size_t j = 0; j < count; ++j) b.strings_.push_back(PauliString::from_position(j, qubits));
    return b;
  }

  /// Arbitrary orthonormal basis. Rejects inputs whose Gram matrix deviates
  /// from the identity by more than `tolerance` in any entry.
  static MeasurementBasis from_matrices(std::vector<HermitianMatrix> matrices,
                                        double tolerance = kOrthonormalityTolerance) {
    if (matrices.empty()) throw std::invalid_argument("MeasurementBasis: empty basis");
    const std::size_t m = matrices.front().dim();
    if (matrices.size() != m * m) {
      throw std::invalid_argument("MeasurementBasis: expected " + std::to_string(m * m) + " elements, got " +
                                  std::to_string(matrices.size()));
    }
    for (const auto& e : matrices) detail::require_same_dim(e.dim(), m, "MeasurementBasis");

    // Real coordinates in which the Hilbert-Schmidt product is the dot product.
    const auto n = HermitianMatrix::to_index(m * m);
    Eigen::MatrixXd coords(n, n);
    const double root2 = std::sqrt(2.0);
    for (Eigen::Index col = 0; col < n; ++col) {
      const ComplexMatrix& a = matrices[static_cast<std::size_t>(col)].matrix();
      Eigen::Index row = 0;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        coords(row++, col) = a(i, i).real();
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
          coords(row++, col) = root2 * a(i, j).real();
          coords(row++, col) = root2 * a(i, j).imag();
        }
      }
    }
    const double deviation =
        ((coords.transpose() * coords) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(deviation <= tolerance)) {
      throw std::invalid_argument("MeasurementBasis: basis is not orthonormal (max Gram deviation " +
                                  std::to_string(deviation) + ")");
    }

    MeasurementBasis b;
    b.m_ = m;
    b.scale_ = 1.0 / std::sqrt(static_cast<double>(m));
    b.two_outcome_ = true;
    b.sup_norm_bound_ = 0.0;
    b.dense_.reserve(matrices.size());
    for (auto& e : matrices) {
      const Spectrum s = eigendecompose(e);
      RealVector plus = RealVector::Zero(s.eigenvalues.size());
      RealVector minus = RealVector::Zero(s.eigenvalues.size());
      const double threshold = zero_threshold(s.eigenvalues);
      for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        const double lambda = s.eigenvalues[i];
        if (lambda >= threshold) plus[i] = 1.0;
        if (lambda <= -threshold) minus[i] = 1.0;
        if (std::abs(std::abs(lambda) - b.scale_) > 1e-10) b.two_outcome_ = false;
      }
      const double sup = s.eigenvalues.cwiseAbs().maxCoeff();
      b.sup_norm_bound_ = std::max(b.sup_norm_bound_, sup);
      b.dense_.push_back(BasisElement{std::move(e), s.assemble(plus), s.assemble(minus), sup});
    }
    return b;
  }

  /// m.
  std::size_t dim() const noexcept { return m_; }
  /// m^2.
  std::size_t size() const noexcept { return m_ * m_; }
  /// Number of qubits for a Pauli basis, 0 otherwise.
  unsigned qubits() const noexcept { return qubits_; }
  bool is_pauli() const noexcept { return qubits_ != 0; }
  /// max_j ||E_j||_inf.
  double sup_norm_bound() const noexcept { return sup_norm_bound_; }
  /// True when every element has spectrum within {+m^{-1/2}, -m^{-1/2}}, so a
  /// measurement of E_j has the two outcomes +-m^{-1/2}.
  bool two_outcome() const noexcept { return two_outcome_; }

  const PauliString& pauli_string(std::size_t j) const {
    check_index(j);
    if (!is_pauli()) throw std::logic_error("MeasurementBasis: not a Pauli basis");
    return strings_[j];
  }

  /// <a, E_j>.
  double inner(const HermitianMatrix& a, std::size_t j) const {
    check_index(j);
    detail::require_same_dim(a.dim(), m_, "MeasurementBasis::inner");
    if (!is_pauli()) return hs_inner(a, dense_[j].matrix);
    // tr(A E) = sum_r A(r ^ flip, r) * E(r, r ^ flip)
    const PauliString& p = strings_[j];
    const ComplexMatrix& mat = a.matrix();
    Complex acc = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const auto c = static_cast<Eigen::Index>(r ^ p.flip_mask);
      acc += p.sign(r) * mat(c, static_cast<Eigen::Index>(r));
    }
    return scale_ * (p.global_phase() * acc).real();
  }

  /// out += coeff * E_j.
  void add_scaled(ComplexMatrix& out, std::size_t j, double coeff) const {
    check_index(j);
    if (!is_pauli()) {
      out += coeff * dense_[j].matrix.matrix();
      return;
    }
    const PauliString& p = strings_[j];
    const Complex base = coeff * scale_ * p.global_phase();
    for (std::size_t r = 0; r < m_; ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r ^ p.flip_mask)) += p.sign(r) * base;
    }
  }

  /// Dense E_j with its eigenprojections. For Pauli elements the projections
  /// are (I +- sqrt(m) E_j) / 2.
  BasisElement element(std::size_t j) const {
    check_index(j);
    if (!is_pauli()) return dense_[j];
    ComplexMatrix e = ComplexMatrix::Zero(HermitianMatrix::to_index(m_), HermitianMatrix::to_index(m_));
    add_scaled(e, j, 1.0);
    const HermitianMatrix mat = HermitianMatrix::symmetrize(e);
    const HermitianMatrix id = HermitianMatrix::identity(m_);
    const double root_m = std::sqrt(static_cast<double>(m_));
    return BasisElement{mat, (id + root_m * mat) * 0.5, (id - root_m * mat) * 0.5, scale_};
  }

  /// <rho, P_j^+>: probability of the outcome +m^{-1/2} when E_j is measured.
  double prob_plus(const HermitianMatrix& rho, std::size_t j) const {
    if (is_pauli()) return 0.5 * (rho.trace() + inner(rho, j) / scale_);
    return hs_inner(rho, dense_[j].proj_plus);
  }

 private:
  MeasurementBasis() = default;

  void check_index(std::size_t j) const {
    if (j >= size()) {
      throw std::out_of_range("MeasurementBasis: index " + std::to_string(j) + " out of range [0, " +
                              std::to_string(size()) + ")");
    }
  }

  unsigned qubits_ = 0;
  std::size_t m_ = 0;
  double scale_ = 0.0;
  double sup_norm_bound_ = 0.0;
  bool two_outcome_ = false;
  std::vector<PauliString> strings_;
  std::vector<BasisElement> dense_;
};

inline MeasurementBasis build_pauli_basis(unsigned qubits) { return MeasurementBasis::pauli(qubits); }

/// alpha_j = sqrt(m) <rho, E_j>, so that rho = sum_j alpha_j / sqrt(m) E_j.
inline RealVector fourier_coefficients(const HermitianMatrix& rho, const MeasurementBasis& basis) {
  detail::require_same_dim(rho.dim(), basis.dim(), "fourier_coefficients");
  const double root_m = std::sqrt(static_cast<double>(basis.dim()));
  RealVector alpha(HermitianMatrix::to_index(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) alpha[static_cast<Eigen::Index>(j)] = root_m * basis.inner(rho, j);
  return alpha;
}

/// sum_j coeffs_j E_j.
inline HermitianMatrix synthesize(const RealVector& coeffs, const MeasurementBasis& basis) {
  if (static_cast<std::size_t>(coeffs.size()) != basis.size()) {
    throw DimensionError("synthesize: expected " + std::to_string(basis.size()) + " coefficients");
  }
  ComplexMatrix out = ComplexMatrix::Zero(HermitianMatrix::to_index(basis.dim()), HermitianMatrix::to_index(basis.dim()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double c = coeffs[static_cast<Eigen::Index>(j)];
    if (c != 0.0) basis.add_scaled(out, j, c);
  }
  return HermitianMatrix::symmetrize(out);
}

}  // namespace qtomo
