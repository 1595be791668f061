#pragma once

#include <string>
#include <vector>

#include "smart/linalg.hpp"
#include "smart/simulation.hpp"

namespace smart {

/// Matrix CSV: no header, one matrix row per line, comma separated,
/// 17 significant digits (lossless double round-trip).
void write_matrix_csv(const std::string& path, const Matrix& A);
Matrix read_matrix_csv(const std::string& path);

/// Result CSV with the fixed header
/// method,sweep_name,sweep_value,replicate,seed,error,seconds,hyperparams
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows,
                       bool include_timing = true);

std::string format_double(double v);

}  // namespace smart
