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

// Parameter sweeps: for each grid point (qubits, rank, n) and estimator,
// draw a random low-rank state per replication, simulate data, estimate, and
// aggregate the distances to the truth.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qtomo/estimators.hpp"
#include "qtomo/linalg.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/metrics.hpp"
#include "qtomo/pauli.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::vector<unsigned> qubits_grid;
  std::vector<std::size_t> rank_grid;
  std::vector<std::size_t> n_grid;
  NoiseModel model = noise::PauliOutcome{1};
  std::vector<EstimatorSpec> estimators;
  std::vector<double> p_grid;
  int replications = 1;
  std::uint64_t master_seed = 0;
};

struct SummaryRow {
  std::string model;
  std::size_t m = 0;
  std::size_t r = 0;
  std::size_t n = 0;
  std::string estimator;
  std::string metric;
  double mean_error = 0.0;
  double std_error = 0.0;
  int replications = 0;
  double elapsed_ms = 0.0;
  std::uint64_t seed = 0;
  int errors = 0;
  std::optional<double> median_error;
};

struct SweepOptions {
  unsigned threads = 1;
  bool median = false;
  /// Wall-clock timings make output run-dependent, so they are opt-in.
  bool timing = false;
};

struct SweepResult {
  std::vector<SummaryRow> rows;
  std::size_t failed_trials = 0;
  std::vector<std::string> failures;
};

struct GridPoint {
  unsigned qubits;
  std::size_t rank;
  std::size_t n;
};

inline std::string format_p(double p) {
  if (std::isinf(p)) return "inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), p);
  return std::string(buf, res.ptr);
}

/// Checks the config and returns the grid points with r <= 2^k, in
/// canonical (qubits, rank, n) order.
inline std::vector<GridPoint> validate_config(const ExperimentConfig& c) {
  if (c.qubits_grid.empty() || c.rank_grid.empty() || c.n_grid.empty()) {
    throw ConfigError("config: qubits_grid, rank_grid and n_grid must be non-empty");
  }
  if (c.estimators.empty()) throw ConfigError("config: estimators must be non-empty");
  if (c.p_grid.empty()) throw ConfigError("config: p_grid must be non-empty");
  if (c.replications < 1) throw ConfigError("config: replications must be >= 1");
  for (unsigned k : c.qubits_grid) {
    if (k < 1 || k > MeasurementBasis::kMaxQubits) throw ConfigError("config: qubits must be in [1, 9]");
  }
  for (std::size_t r : c.rank_grid) {
    if (r < 1) throw ConfigError("config: ranks must be >= 1");
  }
  for (std::size_t n : c.n_grid) {
    if (n < 1) throw ConfigError("config: n must be >= 1");
  }
  for (double p : c.p_grid) {
    if (std::isnan(p) || p < 1.0) throw ConfigError("config: p values must be >= 1 or inf");
  }
  for (const auto& e : c.estimators) {
    if (std::holds_alternative<estimator::RawUnbiased>(e)) {
      throw ConfigError("config: the raw estimator is not a density matrix and cannot be scored");
    }
    try {
      validate(e);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("config: ") + ex.what());
    }
  }
  try {
    validate(c.model);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }

  std::vector<GridPoint> points;
  for (unsigned k : c.qubits_grid) {
    for (std::size_t r : c.rank_grid) {
      if (r > (std::size_t{1} << k)) continue;
      for (std::size_t n : c.n_grid) points.push_back({k, r, n});
    }
  }
  if (points.empty()) throw ConfigError("config: no (qubits, rank) pair satisfies rank <= 2^qubits");
  return points;
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    for (const auto& [key, _] : j.items()) {
      static const std::vector<std::string> known = {"qubits_grid", "rank_grid",  "n_grid",       "model",
                                                     "estimators",  "p_grid",     "replications", "master_seed"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
    c.qubits_grid = j.at("qubits_grid").get<std::vector<unsigned>>();
    c.rank_grid = j.at("rank_grid").get<std::vector<std::size_t>>();
    c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    c.model = parse_noise_model(j.at("model").get<std::string>());
    for (const auto& e : j.at("estimators")) c.estimators.push_back(parse_estimator_spec(e.get<std::string>()));
    for (const auto& p : j.at("p_grid")) {
      if (p.is_string()) {
        if (p.get<std::string>() != "inf") throw ConfigError("config: p must be a number or \"inf\"");
        c.p_grid.push_back(kInf);
      } else {
        c.p_grid.push_back(p.get<double>());
      }
    }
    c.replications = j.at("replications").get<int>();
    c.master_seed = j.value("master_seed", std::uint64_t{0});
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  validate_config(c);
  return c;
}

/// hash(master_seed, k, r, n, estimator index, replication index).
inline std::uint64_t trial_seed(std::uint64_t master_seed, const GridPoint& g, std::size_t estimator_index,
                                std::size_t replication) {
  return hash_words({master_seed, g.qubits, g.rank, g.n, estimator_index, replication});
}

/// Metric labels in output order: one per p, then "bures" and "kl".
inline std::vector<std::string> metric_labels(const ExperimentConfig& c) {
  std::vector<std::string> labels;
  for (double p : c.p_grid) labels.push_back(format_p(p));
  labels.emplace_back("bures");
  labels.emplace_back("kl");
  return labels;
}

/// One replication: metric values in metric_labels order.
inline std::vector<double> run_trial(const ExperimentConfig& c, const GridPoint& g, const MeasurementBasis& basis,
                                     std::size_t estimator_index, std::size_t replication) {
  const std::uint64_t seed = trial_seed(c.master_seed, g, estimator_index, replication);
  CounterRng state_rng(seed, 0);
  const DensityMatrix rho = random_low_rank_density(basis.dim(), g.rank, state_rng);
  const Dataset data = simulate(rho, basis, g.n, c.model, hash_words({seed, 1}));
  const Estimate est = estimate(data, basis, c.estimators[estimator_index]);
  const DistanceReport report = distance_report(rho, est.density(), c.p_grid);

  std::vector<double> values;
  for (double p : c.p_grid) values.push_back(report.schatten.at(p));
  values.push_back(report.bures_sq);
  values.push_back(report.kl);
  return values;
}

namespace detail {

struct TrialOutcome {
  std::vector<double> values;
  double elapsed_ms = 0.0;
  std::string error;
};

inline void aggregate(std::vector<double> values, bool median, SummaryRow& row) {
  if (values.empty()) {
    row.mean_error = row.std_error = std::nan("");
    if (median) row.median_error = std::nan("");
    return;
  }
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / count;
  if (std::isinf(mean)) {
    row.mean_error = row.std_error = kInf;
  } else {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    row.mean_error = mean;
    row.std_error = values.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  if (median) {
    std::sort(values.begin(), values.end());
    const std::size_t h = values.size() / 2;
    row.median_error = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
  }
}

}  // namespace detail

/// Runs every trial of the sweep. Output rows are in canonical order
/// (grid point, estimator, metric) and do not depend on the thread count.
/// Trial failures are counted in the `errors` column instead of aborting.
inline SweepResult run_sweep(const ExperimentConfig& c, const SweepOptions& options = {}) {
  const std::vector<GridPoint> points = validate_config(c);
  const std::size_t n_est = c.estimators.size();
  const auto reps = static_cast<std::size_t>(c.replications);
  const std::size_t total = points.size() * n_est * reps;

  std::vector<std::optional<MeasurementBasis>> bases(MeasurementBasis::kMaxQubits + 1);
  for (const auto& g : points) {
    if (!bases[g.qubits]) bases[g.qubits] = build_pauli_basis(g.qubits);
  }

  std::vector<detail::TrialOutcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < total; t = next.fetch_add(1)) {
      const std::size_t point = t / (n_est * reps);
      const std::size_t est = (t / reps) % n_est;
      const std::size_t rep = t % reps;
      const auto start = std::chrono::steady_clock::now();
      try {
        outcomes[t].values = run_trial(c, points[point], *bases[points[point].qubits], est, rep);
      } catch (const std::exception& ex) {
        outcomes[t].error = ex.what();
      }
      outcomes[t].elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const unsigned threads = std::max(1U, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  const std::vector<std::string> labels = metric_labels(c);
  const std::string model = to_string(c.model);
  for (std::size_t point = 0; point < points.size(); ++point) {
    const GridPoint& g = points[point];
    for (std::size_t est = 0; est < n_est; ++est) {
      const std::size_t base = (point * n_est + est) * reps;
      int errors = 0;
      double elapsed = 0.0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto& o = outcomes[base + rep];
        elapsed += o.elapsed_ms;
        if (!o.error.empty()) {
          ++errors;
          result.failures.push_back("m=" + std::to_string(std::size_t{1} << g.qubits) + " r=" +
                                    std::to_string(g.rank) + " n=" + std::to_string(g.n) + " estimator=" +
                                    to_string(c.estimators[est]) + " replication=" + std::to_string(rep) + ": " +
                                    o.error);
        }
      }
      result.failed_trials += static_cast<std::size_t>(errors);
      for (std::size_t metric = 0; metric < labels.size(); ++metric) {
        std::vector<double> values;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          const auto& o = outcomes[base + rep];
          if (o.error.empty()) values.push_back(o.values[metric]);
        }
        SummaryRow row;
        row.model = model;
        row.m = std::size_t{1} << g.qubits;
        row.r = g.rank;
        row.n = g.n;
        row.estimator = to_string(c.estimators[est]);
        row.metric = labels[metric];
        row.replications = c.replications;
        row.elapsed_ms = options.timing ? elapsed : 0.0;
        row.seed = c.master_seed;
        row.errors = errors;
        detail::aggregate(std::move(values), options.median, row);
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

/// CSV in SummaryRow field order with a header, LF line endings. Infinite
/// values are written as "inf". The median column is present only when rows
/// carry medians.
inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  const bool with_median = !rows.empty() && rows.front().median_error.has_value();
  os << "model,m,r,n,estimator,metric,mean_error,std_error,replications,elapsed_ms,seed,errors";
  if (with_median) os << ",median_error";
  os << '\n';
  for (const auto& row : rows) {
    os << row.model << ',' << row.m << ',' << row.r << ',' << row.n << ',' << row.estimator << ',' << row.metric
       << ',' << detail::format_double(row.mean_error) << ',' << detail::format_double(row.std_error) << ','
       << row.replications << ',' << detail::format_double(row.elapsed_ms) << ',' << row.seed << ',' << row.errors;
    if (with_median) os << ',' << detail::format_double(row.median_error.value_or(std::nan("")));
    os << '\n';
  }
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of log y on log x.
inline LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("fit_loglog_slope: all coordinates must be finite and positive");
    }
    sx += std::log(x);
    sy += std::log(y);
  }
  const double count = static_cast<double>(points.size());
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: x values must not all be equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace qtomo
