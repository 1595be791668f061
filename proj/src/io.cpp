#include "smart/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smart {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Matrix& A) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(A(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("ragged CSV rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty matrix file: " + path);
  Matrix A(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) A(i, j) = rows[i][j];
  }
  return A;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows,
                       bool include_timing) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "method,sweep_name,sweep_value,replicate,seed,error,seconds,hyperparams\n";
  for (const ResultRow& r : rows) {
    out << r.method << ',' << r.sweep_name << ',' << format_double(r.sweep_value) << ','
        << r.replicate << ',' << r.seed << ',' << format_double(r.error) << ','
        << format_double(include_timing ? r.seconds : 0.0) << ',' << r.hyperparams << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace smart
