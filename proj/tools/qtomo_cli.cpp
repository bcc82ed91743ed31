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

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtomo/qtomo.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTrialErrors = 3;

qtomo::MeasurementBasis load_basis(unsigned qubits, const std::string& basis_path) {
  if (!basis_path.empty()) return qtomo::parse_basis_json(qtomo::read_text_file(basis_path));
  if (qubits == 0) throw std::invalid_argument("either --qubits or --basis is required");
  return qtomo::build_pauli_basis(qubits);
}

std::vector<double> parse_p_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf") {
      out.push_back(qtomo::kInf);
      continue;
    }
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw std::invalid_argument("bad p value '" + item + "'");
    out.push_back(p);
  }
  if (out.empty()) throw std::invalid_argument("empty p list");
  return out;
}

int cmd_project(const std::string& input, const std::string& output, double delta) {
  const qtomo::HermitianMatrix z = qtomo::load_matrix(input);
  const qtomo::DensityMatrix rho = qtomo::project_density_smoothed(z, delta);
  qtomo::save_matrix(output, rho.hermitian());
  return 0;
}

int cmd_basis(unsigned qubits, const std::string& out) {
  const qtomo::MeasurementBasis basis = qtomo::build_pauli_basis(qubits);
  std::ostringstream os;
  qtomo::write_basis_json(os, basis);
  qtomo::write_text_file(out, os.str());
  return 0;
}

int cmd_simulate(const std::string& state, unsigned qubits, const std::string& basis_path, std::size_t n,
                 const std::string& model, std::uint64_t seed, const std::string& out) {
  const qtomo::DensityMatrix rho(qtomo::load_matrix(state));
  const qtomo::MeasurementBasis basis = load_basis(qubits, basis_path);
  const qtomo::Dataset data = qtomo::simulate(rho, basis, n, qtomo::parse_noise_model(model), seed);
  std::ostringstream os;
  qtomo::write_dataset_csv(os, data);
  qtomo::write_text_file(out, os.str());
  return 0;
}

int cmd_estimate(const std::string& data_path, unsigned qubits, const std::string& basis_path,
                 const std::string& method, const std::string& out) {
  const qtomo::MeasurementBasis basis = load_basis(qubits, basis_path);
  std::ifstream in(data_path);
  if (!in) throw std::runtime_error("cannot open '" + data_path + "'");
  const qtomo::Dataset data = qtomo::read_dataset_csv(in, basis.dim());
  const qtomo::EstimatorSpec spec = qtomo::parse_estimator_spec(method);
  const qtomo::Estimate est = qtomo::estimate(data, basis, spec);
  qtomo::save_matrix(out, est.matrix());
  if (std::holds_alternative<qtomo::estimator::SvtLeastSquares>(spec)) {
    std::cerr << "svt: iterations=" << est.iterations << " converged=" << (est.converged ? "true" : "false")
              << '\n';
  }
  if (std::holds_alternative<qtomo::estimator::Smoothed>(spec)) std::cerr << "smoothed: delta=" << est.delta << '\n';
  return 0;
}

int cmd_distance(const std::string& a, const std::string& b, const std::string& p_list, bool header) {
  const qtomo::DensityMatrix s1(qtomo::load_matrix(a));
  const qtomo::DensityMatrix s2(qtomo::load_matrix(b));
  const std::vector<double> grid = parse_p_list(p_list);
  const qtomo::DistanceReport r = qtomo::distance_report(s1, s2, grid);
  if (header) {
    for (double p : grid) std::cout << "schatten_" << qtomo::format_p(p) << ',';
    std::cout << "bures_sq,fidelity,kl\n";
  }
  for (double p : grid) std::cout << qtomo::detail::format_double(r.schatten.at(p)) << ',';
  std::cout << qtomo::detail::format_double(r.bures_sq) << ',' << qtomo::detail::format_double(r.fidelity) << ','
            << qtomo::detail::format_double(r.kl) << '\n';
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, unsigned threads, bool median, bool timing) {
  qtomo::ExperimentConfig config;
  try {
    config = qtomo::parse_config(nlohmann::json::parse(qtomo::read_text_file(config_path)));
  } catch (const std::exception& ex) {
    std::cerr << "qtomo bench: " << ex.what() << '\n';
    return kExitConfig;
  }
  const qtomo::SweepResult result = qtomo::run_sweep(config, {threads, median, timing});
  std::ostringstream os;
  qtomo::write_summary_csv(os, result.rows);
  qtomo::write_text_file(out, os.str());
  for (const auto& f : result.failures) std::cerr << "trial failed: " << f << '\n';
  return result.failed_trials ? kExitTrialErrors : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-matrix estimation from randomized Pauli measurements"};
  app.require_subcommand(1);

  std::string input, output, state, basis_path, model = "pauli:1", method = "mindist", data_path;
  std::string a_path, b_path, p_list = "1,2,inf", config_path;
  double delta = 0.0;
  unsigned qubits = 0, threads = 1;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool header = false, median = false, timing = false;

  auto* project = app.add_subcommand("project", "Project a Hermitian matrix onto the (smoothed) density matrices");
  project->add_option("--input", input, "Input matrix JSON")->required();
  project->add_option("--output", output, "Output matrix JSON")->required();
  project->add_option("--delta", delta, "Smoothing level in [0, 1)")->check(CLI::Range(0.0, 1.0));

  auto* basis = app.add_subcommand("basis", "Write the Pauli basis as a JSON array of matrices");
  basis->add_option("--qubits", qubits, "Number of qubits k (m = 2^k)")->required();
  basis->add_option("--out", output, "Output JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Simulate measurement data for a state");
  simulate->add_option("--state", state, "State JSON")->required();
  simulate->add_option("--qubits", qubits, "Number of qubits (Pauli basis)");
  simulate->add_option("--basis", basis_path, "Basis JSON (instead of --qubits)");
  simulate->add_option("--n", n, "Number of samples")->required();
  simulate->add_option("--model", model, "gaussian:<sigma> | pauli:<K> | noiseless");
  simulate->add_option("--seed", seed, "Seed");
  simulate->add_option("--out", output, "Output CSV")->required();

  auto* estimate = app.add_subcommand("estimate", "Estimate a density matrix from data");
  estimate->add_option("--data", data_path, "Data CSV")->required();
  estimate->add_option("--qubits", qubits, "Number of qubits (Pauli basis)");
  estimate->add_option("--basis", basis_path, "Basis JSON (instead of --qubits)");
  estimate->add_option("--method", method, "mindist | smoothed[:delta|auto|sigma=<s>] | svt[:step] | raw");
  estimate->add_option("--out", output, "Output matrix JSON")->required();

  auto* distance = app.add_subcommand("distance", "Print distances between two states as a CSV row");
  distance->add_option("--a", a_path, "First state JSON")->required();
  distance->add_option("--b", b_path, "Second state JSON")->required();
  distance->add_option("--p", p_list, "Comma-separated Schatten orders, e.g. 1,2,inf");
  distance->add_flag("--header", header, "Also print a header row");

  auto* bench = app.add_subcommand("bench", "Run a parameter sweep and write summary CSV");
  bench->add_option("--config", config_path, "Config JSON")->required();
  bench->add_option("--out", output, "Output CSV")->required();
  bench->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--median", median, "Add a median_error column");
  bench->add_flag("--timing", timing, "Record wall-clock time in elapsed_ms");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*project) return cmd_project(input, output, delta);
    if (*basis) return cmd_basis(qubits, output);
    if (*simulate) return cmd_simulate(state, qubits, basis_path, n, model, seed, output);
    if (*estimate) return cmd_estimate(data_path, qubits, basis_path, method, output);
    if (*distance) return cmd_distance(a_path, b_path, p_list, header);
    if (*bench) return cmd_bench(config_path, output, threads, median, timing);
  } catch (const std::exception& ex) {
    std::cerr << "qtomo: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
