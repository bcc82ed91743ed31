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


#include <cmath>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"

#include "oracles.hpp"
#include "qtomo/io.hpp"
#include "qtomo/pauli.hpp"

using namespace qtomo;

namespace {

// Dense W_{i_1} x ... x W_{i_k} built by explicit Kronecker products.
ComplexMatrix kron_oracle(const std::vector<int>& digits) {
  const Complex i(0.0, 1.0);
  ComplexMatrix w[4];
  for (auto& x : w) x.resize(2, 2);
  w[0] << 1, 0, 0, 1;
  w[1] << 0, 1, 1, 0;
  w[2] << 0, i, -i, 0;
  w[3] << 1, 0, 0, -1;
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int d : digits) {
    const ComplexMatrix f = w[d] / std::sqrt(2.0);
    ComplexMatrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    }
    out = next;
  }
  return out;
}

std::vector<int> digits_of(std::size_t position, unsigned k) {
  std::vector<int> d(k);
  for (unsigned q = 0; q < k; ++q) d[k - 1 - q] = static_cast<int>((position >> (2 * q)) & 3U);
  return d;
}

}  // namespace

TEST(build_pauli_basis, single_qubit) {
  const auto basis = build_pauli_basis(1);
  EXPECT_EQ(basis.size(), 4u);
  EXPECT_EQ(basis.sup_norm_bound(), 1.0 / std::sqrt(2.0));
  EXPECT_LT((basis.element(0).matrix.matrix() - ComplexMatrix::Identity(2, 2) / std::sqrt(2.0)).norm(), 1e-15);
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_NEAR(basis.element(a).sup_norm, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(operator_norm(basis.element(a).matrix), 1.0 / std::sqrt(2.0), 1e-15);
    for (std::size_t b = 0; b < 4; ++b) {
      EXPECT_NEAR(hs_inner(basis.element(a).matrix, basis.element(b).matrix), a == b ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(build_pauli_basis, two_qubit_traces) {
  const auto basis = build_pauli_basis(2);
  EXPECT_EQ(basis.size(), 16u);
  EXPECT_NEAR(basis.element(0).matrix.trace(), 2.0, 1e-15);
  for (std::size_t j = 1; j < 16; ++j) EXPECT_EQ(basis.element(j).matrix.trace(), 0.0);
}

TEST(build_pauli_basis, matches_kronecker_products_in_lexicographic_order) {
  for (unsigned k = 1; k <= 3; ++k) {
    const auto basis = build_pauli_basis(k);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      EXPECT_LT((basis.element(j).matrix.matrix() - kron_oracle(digits_of(j, k))).norm(), 1e-15) << "k=" << k
                                                                                                  << " j=" << j;
    }
  }
  EXPECT_EQ(build_pauli_basis(2).pauli_string(1).label(2), "IX");
  EXPECT_EQ(build_pauli_basis(2).pauli_string(4).label(2), "XI");
  EXPECT_EQ(build_pauli_basis(2).pauli_string(11).label(2), "YZ");
}

TEST(build_pauli_basis, rejects_qubit_count_outside_range) {
  EXPECT_THROW(build_pauli_basis(0), std::invalid_argument);
  EXPECT_THROW(build_pauli_basis(10), std::invalid_argument);
  EXPECT_NO_THROW(build_pauli_basis(9));
}

TEST(build_pauli_basis, orthonormal) {
  for (unsigned k = 1; k <= 3; ++k) {
    const auto basis = build_pauli_basis(k);
    std::vector<HermitianMatrix> dense;
    for (std::size_t j = 0; j < basis.size(); ++j) dense.push_back(basis.element(j).matrix);
    for (std::size_t a = 0; a < basis.size(); ++a) {
      for (std::size_t b = 0; b < basis.size(); ++b) {
        ASSERT_NEAR(hs_inner(dense[a], dense[b]), a == b ? 1.0 : 0.0, 1e-10);
      }
    }
  }
}

TEST(basis_element, eigenprojection_consistency) {
  for (unsigned k = 1; k <= 3; ++k) {
    const auto basis = build_pauli_basis(k);
    const double s = 1.0 / std::sqrt(static_cast<double>(basis.dim()));
    const ComplexMatrix id = ComplexMatrix::Identity(static_cast<Eigen::Index>(basis.dim()),
                                                     static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const BasisElement e = basis.element(j);
      const ComplexMatrix& p = e.proj_plus.matrix();
      const ComplexMatrix& n = e.proj_minus.matrix();
      EXPECT_LT((s * p - s * n - e.matrix.matrix()).norm(), 1e-12);
      EXPECT_LT((p + n - id).norm(), 1e-12);
      EXPECT_LT((p * p - p).norm(), 1e-10);
      EXPECT_LT((n * n - n).norm(), 1e-10);
    }
    EXPECT_LT(basis.element(0).proj_minus.matrix().norm(), 1e-15);
  }
}

TEST(measurement_basis, second_moment_identity) {
  for (unsigned k = 1; k <= 3; ++k) {
    const auto basis = build_pauli_basis(k);
    const auto m = static_cast<Eigen::Index>(basis.dim());
    ComplexMatrix acc = ComplexMatrix::Zero(m, m);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const ComplexMatrix e = basis.element(j).matrix.matrix();
      acc += e * e;
    }
    const double md = static_cast<double>(m);
    EXPECT_LT((acc / (md * md) - ComplexMatrix::Identity(m, m) / md).norm(), 1e-10);
  }
}

TEST(measurement_basis, parseval) {
  CounterRng rng(31);
  for (unsigned k = 1; k <= 4; ++k) {
    const auto basis = build_pauli_basis(k);
    for (int t = 0; t < 10; ++t) {
      const auto a = random_hermitian(basis.dim(), rng);
      double sum = 0.0;
      for (std::size_t j = 0; j < basis.size(); ++j) sum += std::pow(basis.inner(a, j), 2);
      EXPECT_NEAR(sum, std::pow(schatten_norm(a, 2.0), 2), 1e-9);
    }
  }
}

TEST(measurement_basis, symbolic_inner_matches_dense) {
  CounterRng rng(32);
  const auto basis = build_pauli_basis(3);
  const auto a = random_hermitian(8, rng);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    EXPECT_NEAR(basis.inner(a, j), hs_inner(a, basis.element(j).matrix), 1e-13);
  }
  EXPECT_THROW(basis.inner(a, basis.size()), std::out_of_range);
  EXPECT_THROW(basis.inner(random_hermitian(4, rng), 0), DimensionError);
}

// A rotated Pauli basis U E_j U* is orthonormal but not Pauli.
TEST(measurement_basis, user_supplied_basis) {
  CounterRng rng(33);
  const auto pauli = build_pauli_basis(2);
  const ComplexMatrix u = random_unitary(4, rng);
  std::vector<HermitianMatrix> rotated;
  for (std::size_t j = 0; j < pauli.size(); ++j) rotated.push_back(pauli.element(j).matrix.conjugated_by(u));
  const auto basis = MeasurementBasis::from_matrices(rotated);
  EXPECT_FALSE(basis.is_pauli());
  EXPECT_TRUE(basis.two_outcome());
  EXPECT_NEAR(basis.sup_norm_bound(), 0.5, 1e-12);

  ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const BasisElement e = basis.element(j);
    acc += e.matrix.matrix() * e.matrix.matrix();
    EXPECT_LT((e.proj_plus.matrix() * e.proj_plus.matrix() - e.proj_plus.matrix()).norm(), 1e-10);
    EXPECT_LT((0.5 * e.proj_plus.matrix() - 0.5 * e.proj_minus.matrix() - e.matrix.matrix()).norm(), 1e-10);
  }
  EXPECT_LT((acc / 16.0 - ComplexMatrix::Identity(4, 4) / 4.0).norm(), 1e-10);

  // JSON round trip through the exchange format.
  std::ostringstream os;
  write_basis_json(os, basis);
  const auto reread = parse_basis_json(os.str());
  EXPECT_EQ(reread.size(), 16u);
  EXPECT_LT((reread.element(5).matrix.matrix() - basis.element(5).matrix.matrix()).norm(), 1e-15);
}

TEST(measurement_basis, rejects_non_orthonormal_input) {
  const auto pauli = build_pauli_basis(1);
  std::vector<HermitianMatrix> elements;
  for (std::size_t j = 0; j < 4; ++j) elements.push_back(pauli.element(j).matrix);
  elements[2] = elements[2] * (1.0 + 1e-6);
  EXPECT_THROW(MeasurementBasis::from_matrices(elements), std::invalid_argument);
  elements[2] = pauli.element(2).matrix * (1.0 + 1e-10);
  EXPECT_NO_THROW(MeasurementBasis::from_matrices(elements));
  elements.pop_back();
  EXPECT_THROW(MeasurementBasis::from_matrices(elements), std::invalid_argument);
}

TEST(fourier_coefficients, examples) {
  const auto basis = build_pauli_basis(2);
  const RealVector mixed = fourier_coefficients(HermitianMatrix::identity(4) / 4.0, basis);
  EXPECT_NEAR(mixed[0], 1.0, 1e-15);
  EXPECT_LT(mixed.tail(15).cwiseAbs().maxCoeff(), 1e-15);

  const RealVector alpha = fourier_coefficients(HermitianMatrix::diagonal({1.0, 0.0}), build_pauli_basis(1));
  EXPECT_NEAR(alpha[0], 1.0, 1e-15);
  EXPECT_NEAR(alpha[1], 0.0, 1e-15);
  EXPECT_NEAR(alpha[2], 0.0, 1e-15);
  EXPECT_NEAR(alpha[3], 1.0, 1e-15);
  EXPECT_THROW(fourier_coefficients(HermitianMatrix::identity(2), basis), DimensionError);
}

TEST(fourier_coefficients, bounded_and_reconstruct_state) {
  CounterRng rng(34);
  for (unsigned k = 1; k <= 4; ++k) {
    const auto basis = build_pauli_basis(k);
    for (int t = 0; t < 20; ++t) {
      const DensityMatrix rho = oracle::random_state(basis.dim(), rng);
      const RealVector alpha = fourier_coefficients(rho, basis);
      EXPECT_NEAR(alpha[0], 1.0, 1e-10);
      EXPECT_LE(alpha.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
      const RealVector scaled = alpha / std::sqrt(static_cast<double>(basis.dim()));
      EXPECT_LT((synthesize(scaled, basis).matrix() - rho.matrix()).norm(), 1e-9);
    }
  }
}

TEST(measurement_basis, large_dimension_is_symbolic) {
  const auto basis = build_pauli_basis(9);
  EXPECT_EQ(basis.size(), 262144u);
  const auto rho = HermitianMatrix::identity(512) / 512.0;
  EXPECT_NEAR(basis.prob_plus(rho, 0), 1.0, 1e-12);
  EXPECT_NEAR(basis.prob_plus(rho, 123457), 0.5, 1e-12);
}
