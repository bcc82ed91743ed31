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

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "qtomo/linalg.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/pauli.hpp"
#include "qtomo/simplex.hpp"

namespace qtomo {

namespace estimator {

/// Projection of the unbiased estimate onto the density matrices.
struct MinimalDistance {};

/// Projection onto the smoothed set {(1 - delta) S + delta I/m}. With
/// `auto_delta` the level is default_delta(U, m, n) where U is
/// `noise_scale` if given and m^{-1/2} otherwise.
struct Smoothed {
  double delta = 0.0;
  bool auto_delta = false;
  std::optional<double> noise_scale;
};

enum class SvtStart { kZero, kUnbiased };

/// Constrained least squares over the density matrices, solved by the
/// alternating projection / gradient iteration
///   S_k = proj(Z_{k-1}),  Z_k = S_k + step (Zhat - A(S_k)).
struct SvtLeastSquares {
  double step = 0.5;
  double eps = 1e-8;
  int max_iters = 5000;
  SvtStart start = SvtStart::kZero;
};

/// The unbiased linear estimate itself; not a density matrix in general.
struct RawUnbiased {};

}  // namespace estimator

using EstimatorSpec = std::variant<estimator::MinimalDistance, estimator::Smoothed, estimator::SvtLeastSquares,
                                   estimator::RawUnbiased>;

inline void validate(const EstimatorSpec& spec) {
  if (const auto* s = std::get_if<estimator::Smoothed>(&spec)) {
    if (!s->auto_delta && !(s->delta >= 0.0 && s->delta < 1.0)) {
      throw std::invalid_argument("smoothed estimator: delta must lie in [0, 1)");
    }
    if (s->noise_scale && !(*s->noise_scale > 0.0)) {
      throw std::invalid_argument("smoothed estimator: noise scale must be positive");
    }
  }
  if (const auto* s = std::get_if<estimator::SvtLeastSquares>(&spec)) {
    if (!(s->step >= 0.0) || !(s->eps > 0.0) || s->max_iters < 1) {
      throw std::invalid_argument("svt estimator: need step >= 0, eps > 0 and max_iters >= 1");
    }
  }
}

/// Parses mindist | raw | smoothed | smoothed:auto | smoothed:<delta> |
/// smoothed:sigma=<s> | svt | svt:<step>.
inline EstimatorSpec parse_estimator_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  const bool has_arg = colon != std::string::npos;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw std::invalid_argument("estimator '" + text + "': bad number '" + s + "'");
    return v;
  };

  EstimatorSpec spec;
  if (kind == "mindist" && !has_arg) {
    spec = estimator::MinimalDistance{};
  } else if (kind == "raw" && !has_arg) {
    spec = estimator::RawUnbiased{};
  } else if (kind == "smoothed") {
    estimator::Smoothed s;
    if (!has_arg || arg == "auto") {
      s.auto_delta = true;
    } else if (arg.rfind("sigma=", 0) == 0) {
      s.auto_delta = true;
      s.noise_scale = number(arg.substr(6));
    } else {
      s.delta = number(arg);
    }
    spec = s;
  } else if (kind == "svt") {
    estimator::SvtLeastSquares s;
    if (has_arg) s.step = number(arg);
    spec = s;
  } else {
    throw std::invalid_argument("unrecognized estimator '" + text +
                                "' (expected mindist, smoothed[:delta|auto|sigma=<s>], svt[:step] or raw)");
  }
  validate(spec);
  return spec;
}

inline std::string to_string(const EstimatorSpec& spec) {
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<T, estimator::MinimalDistance>) {
          os << "mindist";
        } else if constexpr (std::is_same_v<T, estimator::Smoothed>) {
          os << "smoothed:";
          if (e.noise_scale) {
            os << "sigma=" << *e.noise_scale;
          } else if (e.auto_delta) {
            os << "auto";
          } else {
            os << e.delta;
          }
        } else if constexpr (std::is_same_v<T, estimator::SvtLeastSquares>) {
          os << "svt";
          if (e.step != estimator::SvtLeastSquares{}.step) os << ':' << e.step;
        } else {
          os << "raw";
        }
        return os.str();
      },
      spec);
}

/// Smoothing level (U m^{3/2} sqrt(log 2m) / sqrt(n)) ^ 1 (natural log).
inline double default_delta(double sup_norm_bound, std::size_t m, std::size_t n) {
  if (!(sup_norm_bound > 0.0) || m < 1 || n < 1) {
    throw std::invalid_argument("default_delta: need U > 0, m >= 1 and n >= 1");
  }
  const double md = static_cast<double>(m);
  const double value =
      sup_norm_bound * std::pow(md, 1.5) * std::sqrt(std::log(2.0 * md)) / std::sqrt(static_cast<double>(n));
  return std::min(value, 1.0);
}

/// Per-basis-element counts and outcome sums of a dataset.
struct DesignSummary {
  std::size_t n = 0;
  std::vector<double> counts;
  std::vector<double> sums;
  double sum_squares = 0.0;
};

inline DesignSummary summarize(const Dataset& data, const MeasurementBasis& basis) {
  if (data.size() == 0) throw std::invalid_argument("estimator: empty dataset");
  if (data.basis_indices.size() != data.outcomes.size()) {
    throw std::invalid_argument("estimator: dataset has mismatched index and outcome columns");
  }
  detail::require_same_dim(data.m, basis.dim(), "estimator");
  DesignSummary s;
  s.n = data.size();
  s.counts.assign(basis.size(), 0.0);
  s.sums.assign(basis.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t j = data.basis_indices[i];
    if (j >= basis.size()) throw std::out_of_range("estimator: basis index out of range");
    s.counts[j] += 1.0;
    s.sums[j] += data.outcomes[i];
    s.sum_squares += data.outcomes[i] * data.outcomes[i];
  }
  return s;
}

namespace detail {

inline HermitianMatrix unbiased_from_summary(const DesignSummary& s, const MeasurementBasis& basis) {
  const double m = static_cast<double>(basis.dim());
  const double factor = m * m / static_cast<double>(s.n);
  ComplexMatrix z = ComplexMatrix::Zero(HermitianMatrix::to_index(basis.dim()), HermitianMatrix::to_index(basis.dim()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (s.sums[j] != 0.0) basis.add_scaled(z, j, factor * s.sums[j]);
  }
  return HermitianMatrix::symmetrize(z);
}

/// Inner products <S, E_j> for every j that was observed.
inline std::vector<double> observed_inner(const HermitianMatrix& s, const DesignSummary& d,
                                          const MeasurementBasis& basis) {
  std::vector<double> out(basis.size(), 0.0);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (d.counts[j] != 0.0) out[j] = basis.inner(s, j);
  }
  return out;
}

inline double objective_from_inner(const std::vector<double>& inner, const DesignSummary& d) {
  double acc = d.sum_squares;
  for (std::size_t j = 0; j < inner.size(); ++j) {
    acc += d.counts[j] * inner[j] * inner[j] - 2.0 * d.sums[j] * inner[j];
  }
  return std::max(acc, 0.0) / static_cast<double>(d.n);
}

}  // namespace detail

/// Zhat = (m^2 / n) sum_i Y_i X_i.
inline HermitianMatrix unbiased_Z(const Dataset& data, const MeasurementBasis& basis) {
  return detail::unbiased_from_summary(summarize(data, basis), basis);
}

/// Empirical least-squares objective n^{-1} sum_i (Y_i - <S, X_i>)^2.
inline double least_squares_objective(const Dataset& data, const MeasurementBasis& basis, const HermitianMatrix& s) {
  const DesignSummary d = summarize(data, basis);
  return detail::objective_from_inner(detail::observed_inner(s, d, basis), d);
}

/// Raised when the SVT objective increases although the step size is within
/// the stable default.
class SvtDivergence : public Error {
 public:
  SvtDivergence(const std::string& what, int iteration, double previous, double current)
      : Error(what), iteration_(iteration), previous_(previous), current_(current) {}
  int iteration() const noexcept { return iteration_; }
  double previous() const noexcept { return previous_; }
  double current() const noexcept { return current_; }

 private:
  int iteration_;
  double previous_;
  double current_;
};

class Estimate {
 public:
  Estimate(HermitianMatrix raw) : matrix_(std::move(raw)) {}
  Estimate(DensityMatrix rho) : matrix_(rho.hermitian()), density_(std::move(rho)) {}

  const HermitianMatrix& matrix() const noexcept { return matrix_; }
  bool is_density() const noexcept { return density_.has_value(); }
  const DensityMatrix& density() const {
    if (!density_) throw std::logic_error("Estimate: the raw unbiased estimate is not a density matrix");
    return *density_;
  }

  /// False when SVT stopped at max_iters.
  bool converged = true;
  int iterations = 0;
  /// Smoothing level actually used (smoothed estimator only).
  double delta = 0.0;
  /// SVT objective after each iteration.
  std::vector<double> objective_trace;

 private:
  HermitianMatrix matrix_;
  std::optional<DensityMatrix> density_;
};

inline double resolve_delta(const estimator::Smoothed& s, std::size_t m, std::size_t n) {
  if (!s.auto_delta) return s.delta;
  const double scale = s.noise_scale.value_or(1.0 / std::sqrt(static_cast<double>(m)));
  return default_delta(scale, m, n);
}

namespace detail {

inline Estimate run_svt(const estimator::SvtLeastSquares& cfg, const DesignSummary& d, const HermitianMatrix& zhat,
                        const MeasurementBasis& basis) {
  const double m = static_cast<double>(basis.dim());
  const double factor = m * m / static_cast<double>(d.n);
  const bool check_monotone = cfg.step <= estimator::SvtLeastSquares{}.step;

  HermitianMatrix z = cfg.start == estimator::SvtStart::kZero ? HermitianMatrix::zero(basis.dim()) : zhat;
  std::optional<DensityMatrix> previous;
  std::vector<double> trace;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    DensityMatrix s = project_density(z);
    const std::vector<double> inner = observed_inner(s, d, basis);
    const double objective = objective_from_inner(inner, d);
    if (check_monotone && !trace.empty() && objective > trace.back() + 1e-12 * (1.0 + trace.back())) {
      std::ostringstream os;
      os << "svt: least-squares objective increased at iteration " << k << " from " << trace.back() << " to "
         << objective << " with step " << cfg.step;
      throw SvtDivergence(os.str(), k, trace.back(), objective);
    }
    trace.push_back(objective);

    if (previous && (s.matrix() - previous->matrix()).norm() <= cfg.eps) {
      Estimate e(std::move(s));
      e.iterations = k;
      e.converged = true;
      e.objective_trace = std::move(trace);
      return e;
    }
    if (k == cfg.max_iters) {
      Estimate e(std::move(s));
      e.iterations = k;
      e.converged = false;
      e.objective_trace = std::move(trace);
      return e;
    }

    // Z = S + step (Zhat - (m^2/n) sum_j c_j <S, E_j> E_j)
    ComplexMatrix next = s.matrix() + cfg.step * zhat.matrix();
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (d.counts[j] != 0.0) basis.add_scaled(next, j, -cfg.step * factor * d.counts[j] * inner[j]);
    }
    z = HermitianMatrix::symmetrize(next);
    previous = std::move(s);
  }
  throw std::logic_error("svt: unreachable");
}

}  // namespace detail

inline Estimate estimate(const Dataset& data, const MeasurementBasis& basis, const EstimatorSpec& spec) {
  validate(spec);
  const DesignSummary d = summarize(data, basis);
  HermitianMatrix zhat = detail::unbiased_from_summary(d, basis);

  return std::visit(
      [&](const auto& e) -> Estimate {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, estimator::RawUnbiased>) {
          return Estimate(std::move(zhat));
        } else if constexpr (std::is_same_v<T, estimator::MinimalDistance>) {
          return Estimate(project_density(zhat));
        } else if constexpr (std::is_same_v<T, estimator::Smoothed>) {
          const double delta = resolve_delta(e, basis.dim(), d.n);
          // At delta = 1 the smoothed set is the single point I/m.
          Estimate out = delta >= 1.0 ? Estimate(DensityMatrix::maximally_mixed(basis.dim()))
                                      : Estimate(project_density_smoothed(zhat, delta));
          out.delta = delta;
          return out;
        } else {
          return detail::run_svt(e, d, zhat, basis);
        }
      },
      spec);
}

}  // namespace qtomo
