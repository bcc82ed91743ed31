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
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/rng.hpp"

namespace qtomo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when the Hermitian eigensolver fails to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Raised by matrix_function when the scalar function is undefined at an
/// eigenvalue.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double eigenvalue) : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Dense complex Hermitian matrix. Storage is kept exactly Hermitian: the
/// validating constructor checks the input and then averages it with its
/// adjoint.
class HermitianMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit HermitianMatrix(const ComplexMatrix& entries, double tolerance = kSymmetryTolerance) {
    if (entries.rows() != entries.cols() || entries.rows() < 1) {
      throw DimensionError("HermitianMatrix: expected a non-empty square matrix, got " +
                           std::to_string(entries.rows()) + "x" + std::to_string(entries.cols()));
    }
    const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (!(asym <= tolerance)) {
      throw Error("HermitianMatrix: input violates Hermitian symmetry by " + std::to_string(asym));
    }
    m_ = 0.5 * (entries + entries.adjoint());
  }

  /// (M + M*)/2 without a symmetry check. For results of arithmetic that is
  /// Hermitian in exact arithmetic.
  static HermitianMatrix symmetrize(const ComplexMatrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() < 1) {
      throw DimensionError("HermitianMatrix::symmetrize: expected a non-empty square matrix");
    }
    return HermitianMatrix(Tag{}, 0.5 * (entries + entries.adjoint()));
  }

  static HermitianMatrix zero(std::size_t m) {
    return HermitianMatrix(Tag{}, ComplexMatrix::Zero(to_index(m), to_index(m)));
  }
  static HermitianMatrix identity(std::size_t m) {
    return HermitianMatrix(Tag{}, ComplexMatrix::Identity(to_index(m), to_index(m)));
  }
  static HermitianMatrix diagonal(std::span<const double> values) {
    ComplexMatrix d = ComplexMatrix::Zero(std::ssize(values), std::ssize(values));
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, i) = values[static_cast<std::size_t>(i)];
    return HermitianMatrix(d);
  }
  static HermitianMatrix diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(to_index(i), to_index(j)); }
  double trace() const { return m_.diagonal().real().sum(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    check_same_dim(o);
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    check_same_dim(o);
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator/(HermitianMatrix a, double s) { return a *= (1.0 / s); }
  HermitianMatrix operator-() const { return HermitianMatrix(Tag{}, -m_); }

  /// Conjugation U* A U by a unitary (or any) matrix.
  HermitianMatrix conjugated_by(const ComplexMatrix& u) const {
    return symmetrize(u.adjoint() * m_ * u);
  }

  static Eigen::Index to_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

 private:
  struct Tag {};
  HermitianMatrix(Tag, ComplexMatrix m) : m_(std::move(m)) {}

  void check_same_dim(const HermitianMatrix& o) const {
    if (o.dim() != dim()) {
      throw DimensionError("HermitianMatrix: dimension mismatch " + std::to_string(dim()) + " vs " +
                           std::to_string(o.dim()));
    }
  }

  ComplexMatrix m_;
};

/// Eigendecomposition with eigenvalues sorted non-increasing; column j of
/// `eigenvectors` belongs to `eigenvalues[j]`.
struct Spectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }

  /// U diag(values) U*.
  HermitianMatrix assemble(const RealVector& values) const {
    return HermitianMatrix::symmetrize(eigenvectors * values.asDiagonal() * eigenvectors.adjoint());
  }
  HermitianMatrix reconstruct() const { return assemble(eigenvalues); }
};

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

/// Stable permutation that sorts `values` non-increasing.
inline std::vector<Eigen::Index> descending_order(const RealVector& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
  return order;
}

}  // namespace detail

/// Hilbert-Schmidt inner product tr(a b*). Real for Hermitian arguments.
inline double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  detail::require_same_dim(a.dim(), b.dim(), "hs_inner");
  const Complex value = (a.matrix().array() * b.matrix().array().conjugate()).sum();
  assert(std::abs(value.imag()) <= 1e-12 * std::max(1.0, a.matrix().norm() * b.matrix().norm()));
  return value.real();
}

/// Eigenvalues only, sorted non-increasing.
inline RealVector eigenvalues(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigenvalues: Hermitian eigensolver did not converge", kInf);
  }
  const RealVector& raw = solver.eigenvalues();
  RealVector sorted(raw.size());
  const auto order = detail::descending_order(raw);
  for (std::size_t i = 0; i < order.size(); ++i) sorted[static_cast<Eigen::Index>(i)] = raw[order[i]];
  return sorted;
}

inline Spectrum eigendecompose(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    const ComplexMatrix& v = solver.eigenvectors();
    const double residual =
        (a.matrix() * v - v * solver.eigenvalues().cast<Complex>().asDiagonal()).norm();
    throw ConvergenceError(
        "eigendecompose: Hermitian eigensolver did not converge (residual " + std::to_string(residual) + ")",
        residual);
  }
  const RealVector& raw_values = solver.eigenvalues();
  const ComplexMatrix& raw_vectors = solver.eigenvectors();
  const auto order = detail::descending_order(raw_values);
  Spectrum s{RealVector(raw_values.size()), ComplexMatrix(raw_vectors.rows(), raw_vectors.cols())};
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto dst = static_cast<Eigen::Index>(i);
    s.eigenvalues[dst] = raw_values[order[i]];
    s.eigenvectors.col(dst) = raw_vectors.col(order[i]);
  }
  return s;
}

/// Schatten p-norm of a vector of eigenvalues. p = kInf gives the max norm.
inline double schatten_norm_of_values(const RealVector& values, double p) {
  if (std::isnan(p) || p < 1.0) {
    throw std::invalid_argument("schatten_norm: p must be >= 1 or infinity, got " + std::to_string(p));
  }
  const RealVector mags = values.cwiseAbs();
  const double largest = mags.size() == 0 ? 0.0 : mags.maxCoeff();
  if (std::isinf(p) || largest == 0.0) return largest;
  if (p == 1.0) return mags.sum();
  // Scaled to avoid overflow for large p.
  return largest * std::pow((mags / largest).array().pow(p).sum(), 1.0 / p);
}

inline double schatten_norm(const HermitianMatrix& a, double p) {
  if (p == 2.0) return a.matrix().norm();
  if (std::isnan(p) || p < 1.0) {
    throw std::invalid_argument("schatten_norm: p must be >= 1 or infinity, got " + std::to_string(p));
  }
  return schatten_norm_of_values(eigenvalues(a), p);
}

inline double operator_norm(const HermitianMatrix& a) { return schatten_norm(a, kInf); }

/// Eigenvalues of magnitude below this are treated as exact zeros when rank
/// or support is queried.
inline double zero_threshold(const RealVector& values) {
  const double largest = values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
  return 1e-12 * std::max(1.0, largest);
}

inline std::size_t numerical_rank(const HermitianMatrix& a) {
  const RealVector values = eigenvalues(a);
  const double threshold = zero_threshold(values);
  return static_cast<std::size_t>((values.array().abs() >= threshold).count());
}

/// U f(D) U* where A = U D U*. Eigenvalues below the zero threshold are
/// passed to `f` as exact zeros. Throws DomainError if `f` returns a
/// non-finite value.
template <typename F>
HermitianMatrix matrix_function(const HermitianMatrix& a, F&& f) {
  const Spectrum s = eigendecompose(a);
  const double threshold = zero_threshold(s.eigenvalues);
  RealVector mapped(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) {
    const double lambda = std::abs(s.eigenvalues[i]) < threshold ? 0.0 : s.eigenvalues[i];
    const double value = f(lambda);
    if (!std::isfinite(value)) {
      throw DomainError("matrix_function: function undefined at eigenvalue " + std::to_string(lambda), lambda);
    }
    mapped[i] = value;
  }
  return s.assemble(mapped);
}

inline HermitianMatrix matrix_sqrt(const HermitianMatrix& a) {
  return matrix_function(a, [](double x) { return std::sqrt(x); });
}

inline HermitianMatrix matrix_log(const HermitianMatrix& a) {
  return matrix_function(a, [](double x) { return x > 0.0 ? std::log(x) : std::nan(""); });
}

/// Positive semi-definite, unit-trace Hermitian matrix.
class DensityMatrix {
 public:
  static constexpr double kPsdTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-10;

  explicit DensityMatrix(HermitianMatrix m) : m_(std::move(m)) {
    const double tr = m_.trace();
    if (!(std::abs(tr - 1.0) <= kTraceTolerance)) {
      throw Error("DensityMatrix: trace is " + std::to_string(tr) + ", expected 1");
    }
    const double lowest = eigenvalues(m_).minCoeff();
    if (!(lowest >= -kPsdTolerance)) {
      throw Error("DensityMatrix: smallest eigenvalue " + std::to_string(lowest) + " is negative");
    }
  }

  /// V diag(probabilities) V* for an m x r matrix V with orthonormal columns
  /// and a probability vector. Checks the probability vector only.
  static DensityMatrix from_spectrum(const RealVector& probabilities, const ComplexMatrix& eigenvectors) {
    if (probabilities.size() != eigenvectors.cols() || eigenvectors.rows() < eigenvectors.cols() ||
        eigenvectors.cols() < 1) {
      throw DimensionError("DensityMatrix::from_spectrum: shape mismatch");
    }
    if (!(probabilities.minCoeff() >= -kPsdTolerance) ||
        !(std::abs(probabilities.sum() - 1.0) <= kTraceTolerance)) {
      throw Error("DensityMatrix::from_spectrum: weights are not a probability vector");
    }
    return DensityMatrix(
        Tag{}, HermitianMatrix::symmetrize(eigenvectors * probabilities.asDiagonal() * eigenvectors.adjoint()));
  }

  static DensityMatrix maximally_mixed(std::size_t m) {
    return DensityMatrix(Tag{}, HermitianMatrix::identity(m) / static_cast<double>(m));
  }

  std::size_t dim() const noexcept { return m_.dim(); }
  const HermitianMatrix& hermitian() const noexcept { return m_; }
  const ComplexMatrix& matrix() const noexcept { return m_.matrix(); }
  operator const HermitianMatrix&() const noexcept { return m_; }

 private:
  struct Tag {};
  DensityMatrix(Tag, HermitianMatrix m) : m_(std::move(m)) {}

  HermitianMatrix m_;
};

// ---------------------------------------------------------------------------
// Random matrices

/// Matrix with i.i.d. standard complex Gaussian entries (E|z|^2 = 1).
inline ComplexMatrix random_complex_gaussian(std::size_t rows, std::size_t cols, CounterRng& rng) {
  ComplexMatrix g(HermitianMatrix::to_index(rows), HermitianMatrix::to_index(cols));
  const double scale = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(scale * re, scale * im);
    }
  }
  return g;
}

/// Orthonormal columns spanning the same space as the columns of `g`, with
/// the phase convention that makes the result Haar-distributed for Gaussian g.
inline ComplexMatrix orthonormalize_columns(const ComplexMatrix& g) {
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(g.rows(), g.cols());
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Haar-random unitary.
inline ComplexMatrix random_unitary(std::size_t m, CounterRng& rng) {
  return orthonormalize_columns(random_complex_gaussian(m, m, rng));
}

/// GUE-style random Hermitian matrix (G + G*)/2 scaled by `scale`.
inline HermitianMatrix random_hermitian(std::size_t m, CounterRng& rng, double scale = 1.0) {
  const ComplexMatrix g = random_complex_gaussian(m, m, rng);
  return HermitianMatrix::symmetrize(g * scale);
}

/// Uniform point of the (r-1)-simplex.
inline RealVector random_simplex_point(std::size_t r, CounterRng& rng) {
  RealVector w(HermitianMatrix::to_index(r));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.exponential();
  return w / w.sum();
}

/// Density matrix of rank at most r: Gaussian support frame, orthonormalized,
/// with eigenvalues uniform on the simplex.
inline DensityMatrix random_low_rank_density(std::size_t m, std::size_t r, CounterRng& rng) {
  if (r < 1 || r > m) {
    throw std::invalid_argument("random_low_rank_density: need 1 <= r <= m, got r=" + std::to_string(r) +
                                ", m=" + std::to_string(m));
  }
  const ComplexMatrix frame = orthonormalize_columns(random_complex_gaussian(m, r, rng));
  return DensityMatrix::from_spectrum(random_simplex_point(r, rng), frame);
}

inline DensityMatrix random_low_rank_density(std::size_t m, std::size_t r, std::uint64_t seed) {
  CounterRng rng(seed);
  return random_low_rank_density(m, r, rng);
}

}  // namespace qtomo
