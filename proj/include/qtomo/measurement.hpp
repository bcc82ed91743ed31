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

// Trace-regression data Y_i = <rho, X_i> + noise with X_i drawn uniformly
// from a measurement basis.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "qtomo/linalg.hpp"
#include "qtomo/pauli.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

namespace noise {

/// Y = <rho, X> + xi, xi ~ N(0, sigma^2).
struct Gaussian {
  double sigma = 0.0;
};

/// Y is the mean of `repeats` two-point outcomes +-m^{-1/2} of measuring X.
struct PauliOutcome {
  int repeats = 1;
};

/// Y = <rho, X>.
struct Noiseless {};

}  // namespace noise

using NoiseModel = std::variant<noise::Gaussian, noise::PauliOutcome, noise::Noiseless>;

inline void validate(const NoiseModel& model) {
  if (const auto* g = std::get_if<noise::Gaussian>(&model); g && !(g->sigma >= 0.0 && std::isfinite(g->sigma))) {
    throw std::invalid_argument("noise model: gaussian sigma must be a finite non-negative number");
  }
  if (const auto* p = std::get_if<noise::PauliOutcome>(&model); p && p->repeats < 1) {
    throw std::invalid_argument("noise model: pauli repeats must be >= 1");
  }
}

/// Parses "gaussian:<sigma>", "pauli:<K>" or "noiseless".
inline NoiseModel parse_noise_model(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  NoiseModel model;
  try {
    if (kind == "noiseless" && colon == std::string::npos) {
      model = noise::Noiseless{};
    } else if (kind == "gaussian" && !arg.empty()) {
      std::size_t used = 0;
      const double sigma = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      model = noise::Gaussian{sigma};
    } else if (kind == "pauli" && !arg.empty()) {
      std::size_t used = 0;
      const int k = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      model = noise::PauliOutcome{k};
    } else {
      throw std::invalid_argument(text);
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("unrecognized noise model '" + text +
                                "' (expected gaussian:<sigma>, pauli:<K> or noiseless)");
  }
  validate(model);
  return model;
}

inline std::string to_string(const NoiseModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, noise::Gaussian>) {
          std::ostringstream os;
          os << "gaussian:" << m.sigma;
          return os.str();
        } else if constexpr (std::is_same_v<T, noise::PauliOutcome>) {
          return "pauli:" + std::to_string(m.repeats);
        } else {
          return "noiseless";
        }
      },
      model);
}

/// n regression records. Basis indices are 0-based positions in the basis.
struct Dataset {
  std::size_t m = 0;
  std::vector<std::size_t> basis_indices;
  std::vector<double> outcomes;
  NoiseModel model = noise::Noiseless{};
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return outcomes.size(); }
};

namespace detail {

inline double checked_prob_plus(const HermitianMatrix& rho, const MeasurementBasis& basis, std::size_t j) {
  constexpr double kSlack = 1e-10;
  const double p = basis.prob_plus(rho, j);
  if (!(p >= -kSlack && p <= 1.0 + kSlack)) {
    throw std::domain_error("simulate: outcome probability " + std::to_string(p) + " for basis element " +
                            std::to_string(j) + " is outside [0, 1]; the state is not a valid density matrix");
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// Draws n i.i.d. records. Sample i uses the generator stream (seed, i), so
/// the result is a pure function of the arguments.
inline Dataset simulate(const DensityMatrix& rho, const MeasurementBasis& basis, std::size_t n,
                        const NoiseModel& model, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  detail::require_same_dim(rho.dim(), basis.dim(), "simulate");
  validate(model);
  const bool two_point = std::holds_alternative<noise::PauliOutcome>(model);
  if (two_point && !basis.two_outcome()) {
    throw std::invalid_argument("simulate: the pauli outcome model needs a basis with spectra {+-m^{-1/2}}");
  }

  Dataset data;
  data.m = basis.dim();
  data.model = model;
  data.seed = seed;
  data.basis_indices.resize(n);
  data.outcomes.resize(n);

  // Means and probabilities are computed lazily per basis element.
  std::vector<double> mean(basis.size(), std::nan(""));
  std::vector<double> plus(two_point ? basis.size() : 0, std::nan(""));
  const double level = 1.0 / std::sqrt(static_cast<double>(basis.dim()));

  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, i);
    const auto j = static_cast<std::size_t>(rng.below(basis.size()));
    data.basis_indices[i] = j;
    double y = 0.0;
    if (const auto* po = std::get_if<noise::PauliOutcome>(&model)) {
      if (std::isnan(plus[j])) plus[j] = detail::checked_prob_plus(rho, basis, j);
      int ups = 0;
      for (int t = 0; t < po->repeats; ++t) ups += rng.uniform() < plus[j] ? 1 : 0;
      y = level * static_cast<double>(2 * ups - po->repeats) / static_cast<double>(po->repeats);
    } else {
      if (std::isnan(mean[j])) mean[j] = basis.inner(rho, j);
      y = mean[j];
      if (const auto* g = std::get_if<noise::Gaussian>(&model)) y += g->sigma * rng.normal();
    }
    data.outcomes[i] = y;
  }
  return data;
}

/// Var(Y | X = E_j) = (1 - alpha_j^2) / (K m) under the K-repeat two-point model.
inline double conditional_variance(const DensityMatrix& rho, const MeasurementBasis& basis, std::size_t j,
                                   int repeats) {
  if (repeats < 1) throw std::invalid_argument("conditional_variance: repeats must be >= 1");
  if (!basis.two_outcome()) {
    throw std::invalid_argument("conditional_variance: needs a basis with spectra {+-m^{-1/2}}");
  }
  const double m = static_cast<double>(basis.dim());
  const double alpha = std::sqrt(m) * basis.inner(rho, j);
  return std::max(0.0, 1.0 - alpha * alpha) / (static_cast<double>(repeats) * m);
}

// ---------------------------------------------------------------------------
// CSV: header "sample_id,basis_index,outcome"; sample_id is 0-based and
// basis_index is 1-based (E_1 is the first basis element).

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
  os << "sample_id,basis_index,outcome\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << i << ',' << (data.basis_indices[i] + 1) << ',' << detail::format_double(data.outcomes[i]) << '\n';
  }
}

/// Reads the CSV written by write_dataset_csv. `m` is the dimension the
/// indices refer to; indices are checked against [1, m^2].
inline Dataset read_dataset_csv(std::istream& is, std::size_t m) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,basis_index,outcome") {
    throw std::runtime_error("dataset csv: unexpected header '" + line + "'");
  }
  Dataset data;
  data.m = m;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw std::runtime_error("dataset csv: malformed line " + std::to_string(lineno));
    }
    std::size_t index = 0;
    double outcome = 0.0;
    const char* b = line.data();
    const auto r1 = std::from_chars(b + c1 + 1, b + c2, index);
    const auto r2 = std::from_chars(b + c2 + 1, b + line.size(), outcome);
    if (r1.ec != std::errc() || r1.ptr != b + c2 || r2.ec != std::errc() || r2.ptr != b + line.size()) {
      throw std::runtime_error("dataset csv: cannot parse line " + std::to_string(lineno));
    }
    if (index < 1 || index > m * m) {
      throw std::runtime_error("dataset csv: basis_index " + std::to_string(index) + " on line " +
                               std::to_string(lineno) + " is outside [1, " + std::to_string(m * m) + "]");
    }
    data.basis_indices.push_back(index - 1);
    data.outcomes.push_back(outcome);
  }
  return data;
}

}  // namespace qtomo
