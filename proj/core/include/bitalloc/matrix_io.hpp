#pragma once

#include <filesystem>
#include <string_view>

#include <Eigen/Core>

#include "bitalloc/error.hpp"

namespace bitalloc {

enum class MatrixFormat {
  kAuto,        // coordinate on a %%MatrixMarket banner or a bare "r c nnz" first line
  kCoordinate,  // "rows cols nnz" header, then 1-based "row col value" triples
  kDense,       // one comma-delimited row per line
};

/// Parse errors carry the 1-based line number of the offending input.
Eigen::MatrixXd parse_matrix(std::string_view text, MatrixFormat format = MatrixFormat::kAuto);

/// Reads a matrix. ".mtx" files are coordinate text; otherwise the format
/// is detected as in parse_matrix.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

/// A vector stored as a single row or a single column.
Eigen::VectorXd load_vector(const std::filesystem::path& path);

/// Dense comma-delimited output with shortest round-trip formatting.
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);

/// Coordinate text with a MatrixMarket banner; zeros are omitted.
void save_matrix_coordinate(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);

}  // namespace bitalloc
