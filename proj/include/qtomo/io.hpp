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

// JSON exchange format for matrices:
//   {"m": <int>, "re": [[...], ...], "im": [[...], ...]}
// and for bases: an array of such objects.

#pragma once

#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtomo/linalg.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/pauli.hpp"

namespace qtomo {

/// Symmetry tolerance applied when reading matrices.
inline constexpr double kJsonSymmetryTolerance = 1e-9;

inline void write_matrix_json(std::ostream& os, const HermitianMatrix& a) {
  const auto& mat = a.matrix();
  auto block = [&](bool imag) {
    os << '[';
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      os << (i ? ",\n    [" : "\n    [");
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        if (j) os << ", ";
        os << detail::format_double(imag ? mat(i, j).imag() : mat(i, j).real());
      }
      os << ']';
    }
    os << "\n  ]";
  };
  os << "{\n  \"m\": " << a.dim() << ",\n  \"re\": ";
  block(false);
  os << ",\n  \"im\": ";
  block(true);
  os << "\n}";
}

inline std::string matrix_to_json_string(const HermitianMatrix& a) {
  std::ostringstream os;
  write_matrix_json(os, a);
  return os.str();
}

inline HermitianMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("re") || !j.contains("im")) {
    throw std::runtime_error("matrix json: expected an object with keys m, re, im");
  }
  if (!j["m"].is_number_integer() || j["m"].get<long long>() < 1) {
    throw std::runtime_error("matrix json: m must be a positive integer");
  }
  const auto m = j["m"].get<std::size_t>();
  auto read_block = [&](const char* key) {
    const auto& rows = j[key];
    if (!rows.is_array() || rows.size() != m) {
      throw std::runtime_error(std::string("matrix json: '") + key + "' must have " + std::to_string(m) + " rows");
    }
    Eigen::MatrixXd out(HermitianMatrix::to_index(m), HermitianMatrix::to_index(m));
    for (std::size_t r = 0; r < m; ++r) {
      if (!rows[r].is_array() || rows[r].size() != m) {
        throw std::runtime_error(std::string("matrix json: row ") + std::to_string(r) + " of '" + key +
                                 "' must have " + std::to_string(m) + " entries");
      }
      for (std::size_t c = 0; c < m; ++c) {
        if (!rows[r][c].is_number()) throw std::runtime_error("matrix json: non-numeric entry");
        out(HermitianMatrix::to_index(r), HermitianMatrix::to_index(c)) = rows[r][c].get<double>();
      }
    }
    return out;
  };
  ComplexMatrix mat(HermitianMatrix::to_index(m), HermitianMatrix::to_index(m));
  mat.real() = read_block("re");
  mat.imag() = read_block("im");
  return HermitianMatrix(mat, kJsonSymmetryTolerance);
}

inline HermitianMatrix parse_matrix_json(const std::string& text) {
  return matrix_from_json(nlohmann::json::parse(text));
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

inline HermitianMatrix load_matrix(const std::string& path) { return parse_matrix_json(read_text_file(path)); }

inline void save_matrix(const std::string& path, const HermitianMatrix& a) {
  write_text_file(path, matrix_to_json_string(a) + "\n");
}

inline void write_basis_json(std::ostream& os, const MeasurementBasis& basis) {
  os << '[';
  for (std::size_t j = 0; j < basis.size(); ++j) {
    os << (j ? ",\n" : "\n");
    write_matrix_json(os, basis.element(j).matrix);
  }
  os << "\n]\n";
}

inline MeasurementBasis parse_basis_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_array()) throw std::runtime_error("basis json: expected an array of matrix objects");
  std::vector<HermitianMatrix> elements;
  elements.reserve(j.size());
  for (const auto& e : j) elements.push_back(matrix_from_json(e));
  return MeasurementBasis::from_matrices(std::move(elements));
}

}  // namespace qtomo
