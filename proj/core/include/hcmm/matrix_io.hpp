#pragma once

#include <filesystem>
#include <iosfwd>

#include "hcmm/matrix.hpp"

namespace hcmm {

// Text format: first line "<rows>,<cols>", then one comma-separated line per row.
DenseMatrix read_matrix_csv(std::istream& in);
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);

// Binary format, little-endian: "HCMM", u32 rows, u32 cols, u32 reserved (0),
// then rows*cols IEEE-754 doubles in row-major order.
DenseMatrix read_matrix_binary(std::istream& in);
void write_matrix_binary(std::ostream& out, const DenseMatrix& m);

// Picks the format from the leading magic bytes.
DenseMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m, bool binary);

}  // namespace hcmm
