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
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "gtest/gtest.h"

#include "qtomo/bench.hpp"

using namespace qtomo;

namespace {

ExperimentConfig small_config() {
  return parse_config(nlohmann::json::parse(R"({
    "qubits_grid": [1, 2],
    "rank_grid": [1, 3],
    "n_grid": [64, 256],
    "model": "pauli:1",
    "estimators": ["mindist", "smoothed:auto"],
    "p_grid": [1, 2, "inf"],
    "replications": 3,
    "master_seed": 42
  })"));
}

std::string csv(const SweepResult& r) {
  std::ostringstream os;
  write_summary_csv(os, r.rows);
  return os.str();
}

const SummaryRow& find_row(const std::vector<SummaryRow>& rows, const std::string& estimator,
                           const std::string& metric, std::size_t n) {
  for (const auto& row : rows) {
    if (row.estimator == estimator && row.metric == metric && row.n == n) return row;
  }
  throw std::runtime_error("row not found");
}

}  // namespace

TEST(parse_config, reads_all_fields) {
  const ExperimentConfig c = small_config();
  EXPECT_EQ(c.qubits_grid, (std::vector<unsigned>{1, 2}));
  EXPECT_EQ(c.rank_grid, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(c.n_grid, (std::vector<std::size_t>{64, 256}));
  EXPECT_EQ(to_string(c.model), "pauli:1");
  ASSERT_EQ(c.estimators.size(), 2u);
  EXPECT_EQ(to_string(c.estimators[1]), "smoothed:auto");
  ASSERT_EQ(c.p_grid.size(), 3u);
  EXPECT_TRUE(std::isinf(c.p_grid[2]));
  EXPECT_EQ(c.replications, 3);
  EXPECT_EQ(c.master_seed, 42u);
}

TEST(parse_config, rejects_invalid_configs) {
  const std::string good =
      R"("qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1],"replications":1)";
  EXPECT_NO_THROW(parse_config(nlohmann::json::parse("{" + good + "}")));
  const char* bad[] = {
      R"({"qubits_grid":[1],"rank_grid":[3],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1],"replications":1})",
      R"({"qubits_grid":[],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1],"replications":1})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1],"replications":0})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["raw"],"p_grid":[1],"replications":1})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[0.5],"replications":1})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"bogus","estimators":["mindist"],"p_grid":[1],"replications":1})",
      R"({"qubits_grid":[12],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1],"replications":1})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":["two"],"replications":1})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1]})",
      R"({"qubits_grid":[1],"rank_grid":[1],"n_grid":[10],"model":"pauli:1","estimators":["mindist"],"p_grid":[1],"replications":1,"extra":1})",
      R"([1, 2])",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(nlohmann::json::parse(text)), ConfigError) << text;
}

TEST(run_sweep, row_count_and_grid_echo) {
  const ExperimentConfig c = small_config();
  const SweepResult r = run_sweep(c);
  // Valid (k, r) pairs: (1, 1), (2, 1), (2, 3); two n values each.
  const std::size_t metrics = c.p_grid.size() + 2;
  EXPECT_EQ(r.rows.size(), 3u * 2u * c.estimators.size() * metrics);
  EXPECT_EQ(r.failed_trials, 0u);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  for (const auto& row : r.rows) {
    seen.insert({row.m, row.r, row.n});
    EXPECT_LE(row.r, row.m);
    EXPECT_EQ(row.replications, 3);
    EXPECT_EQ(row.seed, 42u);
    EXPECT_EQ(row.errors, 0);
    EXPECT_EQ(row.elapsed_ms, 0.0);
    EXPECT_GE(row.mean_error, 0.0);
    EXPECT_GE(row.std_error, 0.0);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(run_sweep, deterministic_and_thread_count_independent) {
  const ExperimentConfig c = small_config();
  const std::string one = csv(run_sweep(c, {1, false, false}));
  EXPECT_EQ(one, csv(run_sweep(c, {1, false, false})));
  EXPECT_EQ(one, csv(run_sweep(c, {4, false, false})));
  ExperimentConfig other = c;
  other.master_seed = 43;
  EXPECT_NE(one, csv(run_sweep(other)));
}

TEST(run_sweep, grid_points_reproduce_in_isolation) {
  const ExperimentConfig c = small_config();
  ExperimentConfig single = c;
  single.qubits_grid = {2};
  single.rank_grid = {3};
  single.n_grid = {256};
  const SweepResult full = run_sweep(c);
  const SweepResult part = run_sweep(single);
  for (const auto& row : part.rows) {
    bool found = false;
    for (const auto& f : full.rows) {
      if (f.m == row.m && f.r == row.r && f.n == row.n && f.estimator == row.estimator && f.metric == row.metric) {
        EXPECT_EQ(f.mean_error, row.mean_error);
        found = true;
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(run_sweep, median_and_timing_columns) {
  const ExperimentConfig c = small_config();
  const SweepResult r = run_sweep(c, {1, true, true});
  ASSERT_TRUE(r.rows.front().median_error.has_value());
  const std::string text = csv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "model,m,r,n,estimator,metric,mean_error,std_error,replications,elapsed_ms,seed,errors,median_error");
  double total = 0.0;
  for (const auto& row : r.rows) total += row.elapsed_ms;
  EXPECT_GT(total, 0.0);
}

TEST(run_sweep, csv_layout) {
  const std::string text = csv(run_sweep(small_config()));
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "model,m,r,n,estimator,metric,mean_error,std_error,replications,elapsed_ms,seed,errors");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_NE(text.find("\npauli:1,2,1,64,mindist,1,"), std::string::npos);
  EXPECT_NE(text.find(",kl,inf,inf,3,0,42,0\n"), std::string::npos);  // a pure truth vs a rank-deficient estimate
}

TEST(run_sweep, records_trial_failures_without_aborting) {
  // With n = 5 records at m = 8 the default SVT step is far beyond the
  // stable range for that design, and the monotone-objective check fires on
  // some replications.
  ExperimentConfig c = small_config();
  c.qubits_grid = {3};
  c.rank_grid = {1};
  c.n_grid = {5};
  c.estimators = {parse_estimator_spec("svt")};
  c.replications = 20;
  const SweepResult r = run_sweep(c);
  ASSERT_GT(r.failed_trials, 0u);
  EXPECT_LT(r.failed_trials, 20u);
  EXPECT_EQ(r.failures.size(), r.failed_trials);
  EXPECT_NE(r.failures.front().find("objective increased"), std::string::npos);
  ASSERT_EQ(r.rows.size(), c.p_grid.size() + 2);
  for (const auto& row : r.rows) {
    EXPECT_EQ(static_cast<std::size_t>(row.errors), r.failed_trials);
    EXPECT_TRUE(std::isfinite(row.mean_error) || row.metric == "kl");
  }
}

TEST(run_sweep, noiseless_sanity_at_ten_m_squared) {
  ExperimentConfig c;
  c.qubits_grid = {3};
  c.rank_grid = {1};
  c.n_grid = {640, 64000};
  c.model = noise::Noiseless{};
  c.estimators = {parse_estimator_spec("mindist"), parse_estimator_spec("svt")};
  c.p_grid = {1.0};
  c.replications = 20;
  c.master_seed = 5;
  const SweepResult r = run_sweep(c);
  // Least squares is exact on noiseless data once the design spans H_m.
  EXPECT_LT(find_row(r.rows, "svt", "1", 640).mean_error, 0.05);
  // The projected estimate still carries the multinomial count noise of the
  // design, of relative size m / sqrt(n); it is below 0.05 only for larger n.
  const double small_n = find_row(r.rows, "mindist", "1", 640).mean_error;
  const double large_n = find_row(r.rows, "mindist", "1", 64000).mean_error;
  EXPECT_GT(small_n, 0.15);
  EXPECT_LT(small_n, 0.4);
  EXPECT_LT(large_n, 0.05);
}

TEST(fit_loglog_slope, examples) {
  const LogLogFit a = fit_loglog_slope({{10.0, std::pow(10.0, -0.5)}, {100.0, 0.1}, {1000.0, std::pow(1000.0, -0.5)}});
  EXPECT_NEAR(a.slope, -0.5, 1e-12);
  EXPECT_NEAR(a.intercept, 0.0, 1e-12);
  const LogLogFit b = fit_loglog_slope({{1.0, 3.0}, {5.0, 15.0}, {7.0, 21.0}, {40.0, 120.0}});
  EXPECT_NEAR(b.slope, 1.0, 1e-12);
  EXPECT_NEAR(b.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(fit_loglog_slope({{1.0, 1.0}, {2.0, 2.0}, {4.0, 4.0}}).slope, 1.0, 1e-12);
}

TEST(fit_loglog_slope, rejects_bad_input) {
  EXPECT_THROW(fit_loglog_slope({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({{-1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({{2.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}}), std::invalid_argument);
}

TEST(trial_seed, depends_on_every_coordinate) {
  const GridPoint g{2, 1, 100};
  const std::uint64_t s = trial_seed(1, g, 0, 0);
  EXPECT_NE(s, trial_seed(2, g, 0, 0));
  EXPECT_NE(s, trial_seed(1, {3, 1, 100}, 0, 0));
  EXPECT_NE(s, trial_seed(1, {2, 2, 100}, 0, 0));
  EXPECT_NE(s, trial_seed(1, {2, 1, 101}, 0, 0));
  EXPECT_NE(s, trial_seed(1, g, 1, 0));
  EXPECT_NE(s, trial_seed(1, g, 0, 1));
  EXPECT_EQ(s, trial_seed(1, g, 0, 0));
}
